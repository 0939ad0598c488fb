//! Simulation and training toolkit for classifying ergodic and localized
//! many-body states of a disordered 2D XY qubit lattice with a single-qubit
//! readout digital-analog variational circuit.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: grid geometry, couplings, disorder, Neel pattern
//! - [`statevec`]: state vectors, matrix-free Hamiltonian, Lanczos propagator
//! - [`spectral`]: excitation-sector diagonalization and gap-ratio statistics
//! - [`qnn`]: the variational classifier, losses, gradients and training
//! - [`experiments`]: seeded end-to-end pipelines and the readout-noise model
//! - [`config`] / [`cli`]: run configuration and the `qns` command dispatch
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod output;
pub mod qnn;
pub mod seed;
pub mod spectral;
pub mod statevec;

pub use error::{Error, Result};
pub use lattice::{DisorderProfile, LatticeSpec};
pub use statevec::{HamiltonianOp, StateVector};
