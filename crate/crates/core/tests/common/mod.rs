//! Dense reference implementations built from Pauli matrices and Kronecker
//! products, sharing nothing with the library's matrix-free kernels.
#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qns::lattice::LatticeSpec;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// basis order (|0⟩, |1⟩); σz|1⟩ = +|1⟩
pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}
pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}
pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(-1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
}

/// `op` on qubit `q` of `n`; qubit i is bit i of the basis index, so qubit 0
/// is the rightmost Kronecker factor.
pub fn embed(op: &CMat, q: usize, n: usize) -> CMat {
    let mut m = CMat::identity(1, 1);
    for k in (0..n).rev() {
        let f = if k == q { op.clone() } else { CMat::identity(2, 2) };
        m = m.kronecker(&f);
    }
    m
}

/// `H/ħ` in rad/ns: Σ g (XX + YY)/2 + Σ d σz.
pub fn dense_hamiltonian(lattice: &LatticeSpec, detunings_mhz: &[f64]) -> CMat {
    let n = lattice.num_qubits();
    let w = |mhz: f64| TAU * mhz * 1e-3;
    let mut h = CMat::zeros(1 << n, 1 << n);
    for e in lattice.edges() {
        let xx = embed(&pauli_x(), e.i, n) * embed(&pauli_x(), e.j, n);
        let yy = embed(&pauli_y(), e.i, n) * embed(&pauli_y(), e.j, n);
        h += (xx + yy) * c(0.5 * w(e.g_mhz), 0.0);
    }
    for (i, &d) in detunings_mhz.iter().enumerate() {
        h += embed(&pauli_z(), i, n) * c(w(d), 0.0);
    }
    h
}

/// `exp(-i H t)` from the Hermitian eigendecomposition.
pub fn dense_propagator(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CVec::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
    );
    v * CMat::from_diagonal(&phases) * v.adjoint()
}

pub fn dense_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut e: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `exp(-i φ/2 (cos θ X + sin θ Y))`.
pub fn dense_rotation(theta: f64, phi: f64) -> CMat {
    let axis = pauli_x() * c(theta.cos(), 0.0) + pauli_y() * c(theta.sin(), 0.0);
    CMat::identity(2, 2) * c((phi / 2.0).cos(), 0.0) - axis * c(0.0, (phi / 2.0).sin())
}

pub fn excited_population(psi: &CVec, q: usize) -> f64 {
    psi.iter()
        .enumerate()
        .filter(|(b, _)| b >> q & 1 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

pub fn to_dense(amps: &[Complex64]) -> CVec {
    CVec::from_column_slice(amps)
}

pub fn distance(a: &[Complex64], b: &CVec) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Circuit forward pass: `layers` blocks of (all rotations, evolve t0), then
/// the final rotation on the readout qubit. `theta`/`phi` are ordered by
/// rotation index `layer * n + qubit`, readout last.
pub fn dense_forward(
    lattice: &LatticeSpec,
    input: &CVec,
    theta: &[f64],
    phi: &[f64],
    layers: usize,
    readout: usize,
    t0_ns: f64,
) -> f64 {
    let n = lattice.num_qubits();
    let u0 = dense_propagator(&dense_hamiltonian(lattice, &vec![0.0; n]), t0_ns);
    let mut psi = input.clone();
    for l in 0..layers {
        for q in 0..n {
            let r = l * n + q;
            psi = embed(&dense_rotation(theta[r], phi[r]), q, n) * psi;
        }
        psi = &u0 * psi;
    }
    let r = n * layers;
    psi = embed(&dense_rotation(theta[r], phi[r]), readout, n) * psi;
    excited_population(&psi, readout)
}

/// Sample mean of exponential spacings' adjacent gap ratios is the Poisson
/// value `2 ln 2 − 1`.
pub const POISSON_R: f64 = 0.386_294_361_119_890_6;
