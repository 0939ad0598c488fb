use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Normalized amplitudes over the computational basis. Bit `i` of a basis
/// index is the state of qubit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes, normalizing them. Fails on zero norm or a length
    /// that is not `2^num_qubits`.
    pub fn from_amplitudes(num_qubits: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: amps.len(),
            });
        }
        let norm = norm(&amps);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroMass);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn vacuum(num_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// Expected total number of excitations.
    pub fn excitation_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(b, a)| b.count_ones() as f64 * a.norm_sqr())
            .sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn basis_state(lattice: &LatticeSpec, bitmask: u64) -> Result<StateVector> {
    let n = lattice.num_qubits();
    if n >= usize::BITS as usize - 1 || bitmask >= (1u64 << n) {
        return Err(Error::BasisOutOfRange {
            index: bitmask as usize,
            num_qubits: n,
        });
    }
    let mut s = StateVector::vacuum(n);
    s.amps[0] = Complex64::new(0.0, 0.0);
    s.amps[bitmask as usize] = Complex64::new(1.0, 0.0);
    Ok(s)
}

/// The 2x2 unitary `Z(θ) X(φ) Z(-θ)`, row-major `[r00, r01, r10, r11]`.
pub fn rotation_matrix(theta: f64, phi: f64) -> [Complex64; 4] {
    let c = (phi / 2.0).cos();
    let s = (phi / 2.0).sin();
    let minus_i_s = Complex64::new(0.0, -s);
    [
        Complex64::new(c, 0.0),
        minus_i_s * Complex64::from_polar(1.0, -theta),
        minus_i_s * Complex64::from_polar(1.0, theta),
        Complex64::new(c, 0.0),
    ]
}

/// Rotates `qubit` by angle `phi` about the equatorial axis `(cos θ, sin θ, 0)`.
pub fn apply_rotation(state: &mut StateVector, qubit: usize, theta: f64, phi: f64) -> Result<()> {
    if qubit >= state.num_qubits {
        return Err(Error::QubitOutOfRange {
            qubit,
            num_qubits: state.num_qubits,
        });
    }
    let [r00, r01, r10, r11] = rotation_matrix(theta, phi);
    let stride = 1usize << qubit;
    for block in state.amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = r00 * x0 + r01 * x1;
            *a1 = r10 * x0 + r11 * x1;
        }
    }
    Ok(())
}

pub fn excitation_probability(state: &StateVector, qubit: usize) -> Result<f64> {
    if qubit >= state.num_qubits {
        return Err(Error::QubitOutOfRange {
            qubit,
            num_qubits: state.num_qubits,
        });
    }
    let stride = 1usize << qubit;
    Ok(state
        .amps
        .chunks_exact(stride << 1)
        .flat_map(|block| &block[stride..])
        .map(|a| a.norm_sqr())
        .sum())
}

/// `(N_A - N_B) / (N_A + N_B)` with `A` the Neel (even) sublattice.
pub fn imbalance(state: &StateVector, lattice: &LatticeSpec) -> Result<f64> {
    if state.num_qubits != lattice.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: lattice.num_qubits(),
            got: state.num_qubits,
        });
    }
    let mut n_a = 0.0;
    let mut n_b = 0.0;
    for q in 0..state.num_qubits {
        let p = excitation_probability(state, q)?;
        if lattice.on_sublattice_a(q) {
            n_a += p;
        } else {
            n_b += p;
        }
    }
    let total = n_a + n_b;
    if total <= 1e-14 {
        return Err(Error::ZeroExcitation);
    }
    Ok((n_a - n_b) / total)
}

pub fn basis_distribution(state: &StateVector) -> Vec<f64> {
    state.amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Squared statistical overlap `(Σ √(p_b q_b))² / (Σ p · Σ q)`.
pub fn overlap_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    if p.iter().chain(q).any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidArgument(
            "distributions must be non-negative".into(),
        ));
    }
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if sp <= 0.0 || sq <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((bc * bc / (sp * sq)).clamp(0.0, 1.0))
}

const DUMP_HEADER_LEN: u32 = 4;

/// Writes the amplitude dump: `u32` header length (4), `u32` qubit count, then
/// `2^N` interleaved `f64` (re, im) pairs. All little-endian.
pub fn write_amplitudes<W: Write>(state: &StateVector, mut w: W) -> Result<()> {
    w.write_all(&DUMP_HEADER_LEN.to_le_bytes())?;
    w.write_all(&(state.num_qubits as u32).to_le_bytes())?;
    for a in &state.amps {
        w.write_all(&a.re.to_le_bytes())?;
        w.write_all(&a.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_amplitudes<R: Read>(mut r: R) -> Result<StateVector> {
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let header_len = u32::from_le_bytes(word) as usize;
    if header_len < 4 {
        return Err(Error::InvalidArgument(format!(
            "amplitude dump header length {header_len} < 4"
        )));
    }
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header)?;
    let num_qubits = u32::from_le_bytes(header[..4].try_into().unwrap()) as usize;
    if num_qubits > 40 {
        return Err(Error::InvalidArgument(format!(
            "amplitude dump claims {num_qubits} qubits"
        )));
    }
    let mut amps = Vec::with_capacity(1 << num_qubits);
    let mut buf = [0u8; 16];
    for _ in 0..(1usize << num_qubits) {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        amps.push(Complex64::new(re, im));
    }
    Ok(StateVector { num_qubits, amps })
}
