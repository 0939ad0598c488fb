//! Full state-vector engine: amplitudes over the `2^N` computational basis,
//! matrix-free Hamiltonian action, Lanczos propagation and single-qubit gates.

mod hamiltonian;
mod krylov;
mod state;

pub use hamiltonian::{apply_hamiltonian, mhz_to_rad_per_ns, HamiltonianOp};
pub use krylov::{evolve, evolve_in_place, KrylovOptions, DEFAULT_TOL, MAX_KRYLOV_DIM};
pub use state::{
    apply_rotation, basis_distribution, basis_state, excitation_probability, imbalance,
    overlap_fidelity, read_amplitudes, rotation_matrix, write_amplitudes, StateVector,
};
