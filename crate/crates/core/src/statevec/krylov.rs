//! Hermitian Lanczos propagator for `exp(-i H t)|ψ⟩`.
//!
//! Each substep builds an orthonormal Krylov basis `V` (full
//! reorthogonalization) with tridiagonal projection `T`, and advances by
//! `V exp(-i T τ) e₁`. The step `τ` is accepted when the a-posteriori
//! estimate `β_m |[exp(-i T τ)]_{m,1}|` is within the time-proportional share
//! of the tolerance; otherwise it is shrunk. A Krylov breakdown means the
//! subspace is invariant and the step is exact.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::hamiltonian::HamiltonianOp;
use super::state::StateVector;
use crate::error::{Error, Result};

pub const MAX_KRYLOV_DIM: usize = 30;
pub const DEFAULT_TOL: f64 = 1e-10;

const CHUNK: usize = 8192;
const PAR_DIM: usize = 1 << 15;

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub krylov_dim: usize,
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            krylov_dim: MAX_KRYLOV_DIM,
            tol: DEFAULT_TOL,
            max_substeps: 100_000,
        }
    }
}

impl KrylovOptions {
    pub fn with_tol(tol: f64) -> Self {
        KrylovOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Returns `exp(-i (H/ħ) t)|ψ⟩`, renormalized.
pub fn evolve(h: &HamiltonianOp, state: &StateVector, t_ns: f64, tol: f64) -> Result<StateVector> {
    let mut out = state.clone();
    evolve_in_place(h, &mut out, t_ns, KrylovOptions::with_tol(tol))?;
    Ok(out)
}

pub fn evolve_in_place(
    h: &HamiltonianOp,
    state: &mut StateVector,
    t_ns: f64,
    opts: KrylovOptions,
) -> Result<()> {
    if state.num_qubits() != h.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: h.num_qubits(),
            got: state.num_qubits(),
        });
    }
    if !(t_ns >= 0.0) || !t_ns.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "evolution time must be finite and non-negative, got {t_ns}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let hnorm = h.norm_bound();
    if t_ns == 0.0 || hnorm == 0.0 {
        return Ok(());
    }

    let dim = h.dim();
    let m_max = opts.krylov_dim.clamp(1, dim);
    let mut lanczos = Lanczos::new(dim, m_max);
    let breakdown_tol = 1e-13 * hnorm;

    let mut remaining = t_ns;
    // initial guess: a few radians of phase per step
    let mut tau = t_ns.min(0.5 * m_max as f64 / hnorm).max(t_ns * 1e-6);
    let mut attempts = 0usize;

    while remaining > 0.0 {
        lanczos.build(h, state.amplitudes(), breakdown_tol);
        let proj = Projection::new(&lanczos);

        loop {
            attempts += 1;
            if attempts > opts.max_substeps {
                return Err(Error::NoConvergence(opts.max_substeps));
            }
            let step = if lanczos.breakdown { remaining } else { tau.min(remaining) };
            let coeffs = proj.propagate(step);
            let err = if lanczos.breakdown {
                0.0
            } else {
                lanczos.beta_next * coeffs[coeffs.len() - 1].norm()
            };
            let budget = opts.tol * step / t_ns;
            if err <= budget {
                lanczos.combine(&coeffs, state.amplitudes_mut());
                state.renormalize();
                remaining -= step;
                if remaining <= t_ns * 1e-14 {
                    remaining = 0.0;
                }
                let m = coeffs.len() as f64;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * (budget / err).powf(1.0 / m)).clamp(1.0, 5.0)
                };
                tau = step * grow;
                break;
            }
            let m = coeffs.len() as f64;
            tau = step * (0.9 * (budget / err).powf(1.0 / m)).clamp(0.1, 0.9);
        }
    }
    Ok(())
}

struct Lanczos {
    basis: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    beta_next: f64,
    breakdown: bool,
    m_max: usize,
}

impl Lanczos {
    fn new(dim: usize, m_max: usize) -> Self {
        Lanczos {
            basis: (0..m_max).map(|_| vec![Complex64::default(); dim]).collect(),
            alpha: Vec::with_capacity(m_max),
            beta: Vec::with_capacity(m_max),
            beta_next: 0.0,
            breakdown: false,
            m_max,
        }
    }

    fn len(&self) -> usize {
        self.alpha.len()
    }

    fn build(&mut self, h: &HamiltonianOp, start: &[Complex64], breakdown_tol: f64) {
        self.alpha.clear();
        self.beta.clear();
        self.breakdown = false;
        self.beta_next = 0.0;

        let n0 = norm(start);
        self.basis[0]
            .iter_mut()
            .zip(start)
            .for_each(|(v, s)| *v = s / n0);

        let mut w = vec![Complex64::default(); start.len()];
        for k in 0..self.m_max {
            h.apply_into(&self.basis[k], &mut w);
            let a = dot(&self.basis[k], &w).re;
            self.alpha.push(a);
            axpy(-Complex64::new(a, 0.0), &self.basis[k], &mut w);
            if k > 0 {
                axpy(-Complex64::new(self.beta[k - 1], 0.0), &self.basis[k - 1], &mut w);
            }
            for v in &self.basis[..=k] {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
            let b = norm(&w);
            if b <= breakdown_tol {
                self.breakdown = true;
                return;
            }
            if k + 1 == self.m_max {
                self.beta_next = b;
                // invariant subspace of full dimension
                if self.m_max == start.len() {
                    self.breakdown = true;
                }
                return;
            }
            self.beta.push(b);
            let inv = 1.0 / b;
            self.basis[k + 1]
                .iter_mut()
                .zip(&w)
                .for_each(|(v, x)| *v = x * inv);
        }
    }

    fn combine(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        let m = coeffs.len();
        let basis = &self.basis[..m];
        let fill = |(offset, chunk): (usize, &mut [Complex64])| {
            let base = offset * CHUNK;
            for (i, o) in chunk.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for (c, v) in coeffs.iter().zip(basis) {
                    acc += c * v[base + i];
                }
                *o = acc;
            }
        };
        if out.len() >= PAR_DIM {
            out.par_chunks_mut(CHUNK).enumerate().for_each(fill);
        } else {
            out.chunks_mut(CHUNK).enumerate().for_each(fill);
        }
    }
}

/// Eigen-decomposed tridiagonal projection, so `exp(-i T τ) e₁` is cheap for
/// any `τ`.
struct Projection {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Projection {
    fn new(l: &Lanczos) -> Self {
        let m = l.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            t[(k, k)] = l.alpha[k];
            if k + 1 < m {
                t[(k, k + 1)] = l.beta[k];
                t[(k + 1, k)] = l.beta[k];
            }
        }
        let eig = SymmetricEigen::new(t);
        Projection {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    fn propagate(&self, tau: f64) -> Vec<Complex64> {
        let m = self.values.len();
        let weights: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(self.vectors[(0, j)], -self.values[j] * tau))
            .collect();
        (0..m)
            .map(|k| {
                (0..m)
                    .map(|j| weights[j] * self.vectors[(k, j)])
                    .sum::<Complex64>()
            })
            .collect()
    }
}

// Fixed-size chunked reductions: the summation order depends only on the
// vector length, never on the thread count.
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let partial = |(x, y): (&[Complex64], &[Complex64])| {
        x.iter()
            .zip(y)
            .map(|(p, q)| p.conj() * q)
            .sum::<Complex64>()
    };
    if a.len() >= PAR_DIM {
        let parts: Vec<Complex64> = a
            .par_chunks(CHUNK)
            .zip(b.par_chunks(CHUNK))
            .map(partial)
            .collect();
        parts.into_iter().sum()
    } else {
        a.chunks(CHUNK).zip(b.chunks(CHUNK)).map(partial).sum()
    }
}

fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).re.sqrt()
}

fn axpy(c: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    if y.len() >= PAR_DIM {
        y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += c * xi);
    } else {
        y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += c * xi);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{neel_pattern, sample_disorder, LatticeSpec};
    use crate::statevec::{basis_state, excitation_probability, imbalance};
    use std::f64::consts::TAU;

    #[test]
    fn zero_time_is_identity() {
        let l = LatticeSpec::grid(2, 2, 2.0).unwrap();
        let h = HamiltonianOp::clean(&l);
        let s = basis_state(&l, 0b0101).unwrap();
        assert_eq!(evolve(&h, &s, 0.0, 1e-10).unwrap(), s);
    }

    #[test]
    fn two_level_rabi() {
        let g = 2.185;
        let l = LatticeSpec::grid(1, 2, g).unwrap();
        let h = HamiltonianOp::clean(&l);
        let s = basis_state(&l, 0b01).unwrap();
        for t in [0.0, 10.0, 57.3, 114.4, 250.0, 1000.0] {
            let out = evolve(&h, &s, t, 1e-10).unwrap();
            let p = out.amplitudes()[0b10].norm_sqr();
            let expect = (TAU * g * 1e-3 * t).sin().powi(2);
            assert!((p - expect).abs() < 1e-12, "t={t} p={p} expect={expect}");
            let w = TAU * g * 1e-3 * t;
            let i_expect = w.cos().powi(2) - w.sin().powi(2);
            assert!((imbalance(&out, &l).unwrap() - i_expect).abs() < 1e-12);
        }
        let out = evolve(&h, &s, 114.4, 1e-10).unwrap();
        assert!(excitation_probability(&out, 1).unwrap() > 0.9999999);
    }

    #[test]
    fn composition() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let d = sample_disorder(&l, 10.0, 5).unwrap();
        let h = HamiltonianOp::from_disorder(&l, &d).unwrap();
        let s = basis_state(&l, neel_pattern(&l)).unwrap();
        let once = evolve(&h, &s, 170.0, 1e-11).unwrap();
        let twice = evolve(&h, &evolve(&h, &s, 60.0, 1e-11).unwrap(), 110.0, 1e-11).unwrap();
        let diff: f64 = once
            .amplitudes()
            .iter()
            .zip(twice.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-8, "diff {diff}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let l = LatticeSpec::grid(1, 2, 2.0).unwrap();
        let h = HamiltonianOp::clean(&l);
        let s = basis_state(&l, 1).unwrap();
        assert!(evolve(&h, &s, -1.0, 1e-10).is_err());
        assert!(evolve(&h, &s, 1.0, 0.0).is_err());
        let tiny = KrylovOptions {
            krylov_dim: 2,
            tol: 1e-300,
            max_substeps: 5,
        };
        let big = LatticeSpec::grid(2, 3, 2.0).unwrap();
        let hb = HamiltonianOp::clean(&big);
        let mut sb = basis_state(&big, 0b101010).unwrap();
        assert!(matches!(
            evolve_in_place(&hb, &mut sb, 500.0, tiny),
            Err(Error::NoConvergence(5))
        ));
    }
}
