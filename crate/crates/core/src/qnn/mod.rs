//! The digital-analog variational classifier.
//!
//! A layer applies `R(θ, φ) = Z(θ) X(φ) Z(-θ)` to every qubit and then
//! evolves under the clean lattice Hamiltonian for `t0`. After the last layer
//! a single rotation acts on the readout qubit, whose excitation probability
//! is the classifier output (ergodic when `p >= threshold`).

mod circuit;
mod gradient;
mod loss;
mod optimizer;
mod params;
mod threshold;
mod train;

pub use circuit::{qnn_forward, Qnn};
pub use gradient::{gradient_fd, gradient_shift, GradientMode, SamplePipeline};
pub use loss::{bce_loss, bce_loss_derivative, sample_loss, Label, PROB_CLIP};
pub use optimizer::{Optimizer, OptimizerKind};
pub use params::QnnParams;
pub use threshold::{calibrate_threshold, classify, gaussian_fit, GaussianFit};
pub use train::{
    accuracy, init_search, train, train_from, BatchMode, EpochRecord, InitCandidate,
    InitSearchResult, LabeledSample, PrepMode, prepare_all, TrainedModel, TrainingConfig, MODEL_FORMAT_VERSION,
};
