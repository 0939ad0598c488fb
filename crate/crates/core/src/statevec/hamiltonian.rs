use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::state::StateVector;
use crate::error::{Error, Result};
use crate::lattice::{DisorderProfile, LatticeSpec};

/// Below this dimension the matvec runs on the calling thread.
const PAR_DIM: usize = 1 << 14;

pub fn mhz_to_rad_per_ns(mhz: f64) -> f64 {
    TAU * mhz * 1e-3
}

#[derive(Debug, Clone, Copy)]
struct Hop {
    i: u32,
    j: u32,
    mask: usize,
    omega: f64,
}

/// `H/ħ` for the XY lattice with on-site detunings, in rad/ns, applied
/// matrix-free. The diagonal is cached (`2^N` reals); hopping terms are
/// applied per edge.
#[derive(Debug, Clone)]
pub struct HamiltonianOp {
    num_qubits: usize,
    detunings_mhz: Vec<f64>,
    hops: Vec<Hop>,
    diag: Vec<f64>,
}

impl HamiltonianOp {
    pub fn new(lattice: &LatticeSpec, detunings_mhz: &[f64]) -> Result<Self> {
        Self::with_decoupled(lattice, detunings_mhz, &[])
    }

    pub fn from_disorder(lattice: &LatticeSpec, disorder: &DisorderProfile) -> Result<Self> {
        Self::new(lattice, &disorder.detunings_mhz)
    }

    /// Zero-disorder system Hamiltonian.
    pub fn clean(lattice: &LatticeSpec) -> Self {
        Self::new(lattice, &vec![0.0; lattice.num_qubits()]).expect("zero detunings match lattice")
    }

    /// Drops every coupling touching a qubit in `decoupled`.
    pub fn with_decoupled(
        lattice: &LatticeSpec,
        detunings_mhz: &[f64],
        decoupled: &[usize],
    ) -> Result<Self> {
        let n = lattice.num_qubits();
        if detunings_mhz.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: detunings_mhz.len(),
            });
        }
        if n > 30 {
            return Err(Error::InvalidArgument(format!(
                "{n} qubits is beyond state-vector reach"
            )));
        }
        let hops = lattice
            .edges()
            .into_iter()
            .filter(|e| !decoupled.contains(&e.i) && !decoupled.contains(&e.j))
            .map(|e| Hop {
                i: e.i as u32,
                j: e.j as u32,
                mask: (1usize << e.i) | (1usize << e.j),
                omega: mhz_to_rad_per_ns(e.g_mhz),
            })
            .collect();
        let omegas: Vec<f64> = detunings_mhz.iter().map(|&d| mhz_to_rad_per_ns(d)).collect();
        let diag = (0..1usize << n)
            .map(|b| {
                omegas
                    .iter()
                    .enumerate()
                    .map(|(q, w)| if b >> q & 1 == 1 { *w } else { -*w })
                    .sum()
            })
            .collect();
        Ok(HamiltonianOp {
            num_qubits: n,
            detunings_mhz: detunings_mhz.to_vec(),
            hops,
            diag,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn detunings_mhz(&self) -> &[f64] {
        &self.detunings_mhz
    }

    /// Diagonal element for basis index `b` (rad/ns).
    pub fn diagonal(&self, b: usize) -> f64 {
        self.diag[b]
    }

    /// Upper bound on the spectral radius, from the row-sum norm.
    pub fn norm_bound(&self) -> f64 {
        let diag_max = self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        diag_max + self.hops.iter().map(|h| h.omega.abs()).sum::<f64>()
    }

    #[inline]
    fn row(&self, b: usize, x: &[Complex64]) -> Complex64 {
        let mut acc = x[b] * self.diag[b];
        for h in &self.hops {
            // nonzero only when the two bits differ (01 <-> 10 swap)
            if (b >> h.i ^ b >> h.j) & 1 == 1 {
                acc += x[b ^ h.mask] * h.omega;
            }
        }
        acc
    }

    /// `out = (H/ħ) x`.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        if x.len() >= PAR_DIM {
            out.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
                let base = c * 4096;
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o = self.row(base + k, x);
                }
            });
        } else {
            for (b, o) in out.iter_mut().enumerate() {
                *o = self.row(b, x);
            }
        }
    }
}

/// `(H/ħ)|ψ⟩` as a raw (unnormalized) amplitude vector.
pub fn apply_hamiltonian(h: &HamiltonianOp, state: &StateVector) -> Result<Vec<Complex64>> {
    if state.num_qubits() != h.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: h.num_qubits,
            got: state.num_qubits(),
        });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); h.dim()];
    h.apply_into(state.amplitudes(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::sample_disorder;
    use crate::statevec::basis_state;
    use rand::Rng;

    fn random_vec(dim: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = crate::seed::rng_from_seed(seed);
        (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn clean_vacuum_is_annihilated() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let h = HamiltonianOp::clean(&l);
        let out = apply_hamiltonian(&h, &basis_state(&l, 0).unwrap()).unwrap();
        assert!(out.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn two_site_swap() {
        let l = LatticeSpec::grid(1, 2, 2.185).unwrap();
        let h = HamiltonianOp::clean(&l);
        // |10> in qubit order (q0=1, q1=0) is basis index 1
        let out = apply_hamiltonian(&h, &basis_state(&l, 0b01).unwrap()).unwrap();
        let w = TAU * 2.185e-3;
        assert!((out[0b10] - Complex64::new(w, 0.0)).norm() < 1e-15);
        assert_eq!(out[0b01], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn detuning_sign_convention() {
        let l = LatticeSpec::grid(1, 2, 2.0).unwrap();
        let h = HamiltonianOp::new(&l, &[3.0, 0.0]).unwrap();
        let w = mhz_to_rad_per_ns(3.0);
        assert!((h.diagonal(0b01) - w).abs() < 1e-15);
        assert!((h.diagonal(0b00) + w).abs() < 1e-15);
    }

    #[test]
    fn hermitian_on_random_vectors() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let d = sample_disorder(&l, 20.0, 4).unwrap();
        let h = HamiltonianOp::from_disorder(&l, &d).unwrap();
        let u = random_vec(512, 1);
        let v = random_vec(512, 2);
        let mut hu = vec![Complex64::default(); 512];
        let mut hv = vec![Complex64::default(); 512];
        h.apply_into(&u, &mut hu);
        h.apply_into(&v, &mut hv);
        assert!((dot(&u, &hv) - dot(&v, &hu).conj()).norm() < 1e-10);
    }

    #[test]
    fn conserves_excitation_sector() {
        let l = LatticeSpec::grid(2, 3, 2.185).unwrap();
        let d = sample_disorder(&l, 5.0, 9).unwrap();
        let h = HamiltonianOp::from_disorder(&l, &d).unwrap();
        let mut x = random_vec(64, 3);
        for (b, a) in x.iter_mut().enumerate() {
            if b.count_ones() != 3 {
                *a = Complex64::default();
            }
        }
        let mut out = vec![Complex64::default(); 64];
        h.apply_into(&x, &mut out);
        for (b, a) in out.iter().enumerate() {
            if b.count_ones() != 3 {
                assert_eq!(a.norm(), 0.0);
            }
        }
    }

    #[test]
    fn decoupling_removes_edges() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let h = HamiltonianOp::with_decoupled(&l, &[0.0; 9], &[4]).unwrap();
        assert_eq!(h.hops.len(), 8);
    }
}
