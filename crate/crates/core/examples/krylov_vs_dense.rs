//! Lanczos propagator against exact diagonalization of the full 512x512
//! Hamiltonian of a disordered 3x3 lattice.
//!
//! ```bash
//! cargo run --release -p qns-core --example krylov_vs_dense
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qns::lattice::{neel_pattern, sample_disorder, LatticeSpec};
use qns::statevec::{apply_hamiltonian, basis_state, evolve, HamiltonianOp, StateVector};

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let disorder = sample_disorder(&lattice, 20.0, 9)?;
    let h = HamiltonianOp::from_disorder(&lattice, &disorder)?;
    let dim = h.dim();

    // dense H from columns H|b⟩ (real symmetric in this basis)
    let mut dense = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        let col = apply_hamiltonian(&h, &basis_state(&lattice, b as u64)?)?;
        for (a, v) in col.iter().enumerate() {
            dense[(a, b)] = v.re;
        }
    }
    let eig = dense.symmetric_eigen();
    let psi0 = basis_state(&lattice, neel_pattern(&lattice))?;
    let v0 = DVector::from_iterator(dim, psi0.amplitudes().iter().map(|a| a.re));

    println!("{:>6} {:>12} {:>14}", "t_ns", "|Δψ|", "norm drift");
    for t in [1.0, 10.0, 50.0, 200.0, 1000.0] {
        let c = eig.eigenvectors.transpose() * &v0;
        let phased: Vec<Complex64> = c
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(&ck, &e)| Complex64::from_polar(ck, -e * t))
            .collect();
        let exact: Vec<Complex64> = (0..dim)
            .map(|a| (0..dim).map(|k| phased[k] * eig.eigenvectors[(a, k)]).sum())
            .collect();
        let exact = StateVector::from_amplitudes(9, exact)?;
        let krylov = evolve(&h, &psi0, t, 1e-10)?;
        let err: f64 = krylov
            .amplitudes()
            .iter()
            .zip(exact.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        println!("{t:6.0} {err:12.2e} {:14.2e}", (krylov.norm() - 1.0).abs());
    }
    Ok(())
}
