use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation angles for `layers` full layers plus the final readout rotation.
///
/// Rotation `l * num_qubits + q` acts on qubit `q` in layer `l`; the last
/// entry (`num_qubits * layers`) is the readout qubit's final rotation. The
/// flat parameter vector is all `theta` followed by all `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnnParams {
    pub num_qubits: usize,
    pub layers: usize,
    pub readout_index: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl QnnParams {
    pub fn zeros(num_qubits: usize, layers: usize, readout_index: usize) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidArgument("need at least one layer".into()));
        }
        if readout_index >= num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: readout_index,
                num_qubits,
            });
        }
        let n = num_qubits * layers + 1;
        Ok(QnnParams {
            num_qubits,
            layers,
            readout_index,
            theta: vec![0.0; n],
            phi: vec![0.0; n],
        })
    }

    /// Every angle uniform in `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(
        num_qubits: usize,
        layers: usize,
        readout_index: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut p = Self::zeros(num_qubits, layers, readout_index)?;
        for x in p.theta.iter_mut().chain(p.phi.iter_mut()) {
            *x = rng.random_range(0.0..TAU);
        }
        Ok(p)
    }

    /// Number of rotations, `num_qubits * layers + 1`.
    pub fn num_rotations(&self) -> usize {
        self.theta.len()
    }

    /// Number of trainable angles, `2 (num_qubits * layers + 1)`.
    pub fn dim(&self) -> usize {
        2 * self.num_rotations()
    }

    pub fn final_rotation(&self) -> usize {
        self.num_rotations() - 1
    }

    /// `(qubit, theta, phi)` for rotation `r`.
    pub fn rotation(&self, r: usize) -> (usize, f64, f64) {
        let qubit = if r == self.final_rotation() {
            self.readout_index
        } else {
            r % self.num_qubits
        };
        (qubit, self.theta[r], self.phi[r])
    }

    pub fn get(&self, j: usize) -> f64 {
        let n = self.num_rotations();
        if j < n {
            self.theta[j]
        } else {
            self.phi[j - n]
        }
    }

    pub fn set(&mut self, j: usize, value: f64) {
        let n = self.num_rotations();
        if j < n {
            self.theta[j] = value;
        } else {
            self.phi[j - n] = value;
        }
    }

    /// True if flat index `j` is a `phi` angle.
    pub fn is_phi(&self, j: usize) -> bool {
        j >= self.num_rotations()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.theta.iter().chain(&self.phi).copied().collect()
    }

    pub fn set_flat(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let n = self.num_rotations();
        self.theta.copy_from_slice(&x[..n]);
        self.phi.copy_from_slice(&x[n..]);
        Ok(())
    }

    pub fn shifted(&self, j: usize, delta: f64) -> Self {
        let mut p = self.clone();
        p.set(j, p.get(j) + delta);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_formula() {
        for (nq, nl) in [(2, 1), (4, 1), (9, 1), (9, 2), (16, 3)] {
            let p = QnnParams::zeros(nq, nl, 0).unwrap();
            assert_eq!(p.dim(), 2 * (nq * nl + 1));
        }
    }

    #[test]
    fn final_rotation_is_on_readout() {
        let p = QnnParams::zeros(9, 1, 4).unwrap();
        assert_eq!(p.rotation(9).0, 4);
        assert_eq!(p.rotation(3).0, 3);
        let p = QnnParams::zeros(4, 2, 1).unwrap();
        assert_eq!(p.rotation(5).0, 1);
        assert_eq!(p.rotation(8).0, 1);
    }

    #[test]
    fn flat_round_trip() {
        let mut rng = crate::seed::rng_from_seed(3);
        let p = QnnParams::random(4, 1, 0, &mut rng).unwrap();
        assert!(p.to_flat().iter().all(|&x| (0.0..TAU).contains(&x)));
        let mut q = QnnParams::zeros(4, 1, 0).unwrap();
        q.set_flat(&p.to_flat()).unwrap();
        assert_eq!(p, q);
        assert!(q.set_flat(&[0.0; 3]).is_err());
        assert!(QnnParams::zeros(4, 0, 0).is_err());
        assert!(QnnParams::zeros(4, 1, 4).is_err());
    }
}
