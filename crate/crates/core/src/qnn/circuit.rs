use crate::error::{Error, Result};
use crate::lattice::{DisorderProfile, LatticeSpec};
use crate::spectral::SectorPropagator;
use crate::statevec::{
    apply_rotation, evolve_in_place, excitation_probability, HamiltonianOp, KrylovOptions,
    StateVector,
};

use super::params::QnnParams;

/// Largest excitation sector for which the analog block is cached as dense
/// per-sector unitaries (reached at 12 qubits); bigger lattices use Lanczos.
pub const DENSE_SECTOR_LIMIT: u128 = 1024;

/// The analog block `exp(-i H₀ t₀)` plus the rotation layout of one lattice.
#[derive(Debug, Clone)]
pub struct Qnn {
    h0: HamiltonianOp,
    t0_ns: f64,
    num_qubits: usize,
    krylov: KrylovOptions,
    dense: Option<SectorPropagator>,
}

impl Qnn {
    pub fn new(lattice: &LatticeSpec, t0_ns: f64) -> Result<Self> {
        if !(t0_ns >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "analog time must be non-negative, got {t0_ns}"
            )));
        }
        let n = lattice.num_qubits();
        let dense = if SectorPropagator::max_block_dim(n) <= DENSE_SECTOR_LIMIT {
            Some(SectorPropagator::new(lattice, &DisorderProfile::zero(n), t0_ns)?)
        } else {
            None
        };
        Ok(Qnn {
            h0: HamiltonianOp::clean(lattice),
            t0_ns,
            num_qubits: n,
            krylov: KrylovOptions::default(),
            dense,
        })
    }

    /// Forces the Lanczos propagator with the given options.
    pub fn with_krylov(mut self, krylov: KrylovOptions) -> Self {
        self.krylov = krylov;
        self.dense = None;
        self
    }

    pub fn t0_ns(&self) -> f64 {
        self.t0_ns
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn check(&self, input: &StateVector, params: &QnnParams) -> Result<()> {
        if params.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                got: params.num_qubits,
            });
        }
        if input.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                got: input.num_qubits(),
            });
        }
        Ok(())
    }

    /// Output state just before measurement.
    pub fn output_state(&self, input: &StateVector, params: &QnnParams) -> Result<StateVector> {
        self.check(input, params)?;
        let mut s = input.clone();
        let n = self.num_qubits;
        for layer in 0..params.layers {
            for q in 0..n {
                let (qubit, theta, phi) = params.rotation(layer * n + q);
                apply_rotation(&mut s, qubit, theta, phi)?;
            }
            match &self.dense {
                Some(u) => u.apply(&mut s)?,
                None => evolve_in_place(&self.h0, &mut s, self.t0_ns, self.krylov)?,
            }
        }
        let (qubit, theta, phi) = params.rotation(params.final_rotation());
        apply_rotation(&mut s, qubit, theta, phi)?;
        Ok(s)
    }

    /// Probability of finding the readout qubit excited.
    pub fn forward(&self, input: &StateVector, params: &QnnParams) -> Result<f64> {
        let s = self.output_state(input, params)?;
        Ok(excitation_probability(&s, params.readout_index)?.clamp(0.0, 1.0))
    }
}

pub fn qnn_forward(
    input: &StateVector,
    params: &QnnParams,
    lattice: &LatticeSpec,
    t0_ns: f64,
) -> Result<f64> {
    if params.readout_index >= lattice.num_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: params.readout_index,
            num_qubits: lattice.num_qubits(),
        });
    }
    Qnn::new(lattice, t0_ns)?.forward(input, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::basis_state;
    use std::f64::consts::PI;

    #[test]
    fn vacuum_stays_dark() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let mut p = QnnParams::zeros(9, 1, 4).unwrap();
        p.theta.iter_mut().for_each(|t| *t = 0.8);
        let vac = basis_state(&l, 0).unwrap();
        assert!(qnn_forward(&vac, &p, &l, 200.0).unwrap().abs() < 1e-14);

        let last = p.final_rotation();
        p.phi[last] = PI;
        assert!((qnn_forward(&vac, &p, &l, 200.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dense_block_matches_lanczos() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let mut rng = crate::seed::rng_from_seed(11);
        let p = QnnParams::random(9, 2, 4, &mut rng).unwrap();
        let input = basis_state(&l, crate::lattice::neel_pattern(&l)).unwrap();
        let dense = Qnn::new(&l, 200.0).unwrap();
        assert!(dense.dense.is_some());
        let lanczos = Qnn::new(&l, 200.0)
            .unwrap()
            .with_krylov(KrylovOptions::with_tol(1e-12));
        let a = dense.output_state(&input, &p).unwrap();
        let b = lanczos.output_state(&input, &p).unwrap();
        let diff: f64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        assert!(diff.sqrt() < 1e-9, "{}", diff.sqrt());
    }

    #[test]
    fn mismatch_is_rejected() {
        let l = LatticeSpec::grid(2, 2, 2.0).unwrap();
        let p = QnnParams::zeros(9, 1, 4).unwrap();
        let vac = basis_state(&l, 0).unwrap();
        assert!(qnn_forward(&vac, &p, &l, 200.0).is_err());
    }
}
