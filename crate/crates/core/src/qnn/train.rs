//! Datasets-as-recipes, initialization search and the training loop.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{neel_pattern, sample_disorder, LatticeConfig, LatticeSpec};
use crate::seed::derived_rng;
use crate::statevec::{basis_state, evolve_in_place, HamiltonianOp, KrylovOptions, StateVector};

use super::circuit::Qnn;
use super::gradient::{gradient_shift, GradientMode, SamplePipeline};
use super::loss::{bce_loss, Label};
use super::optimizer::{Optimizer, OptimizerKind};
use super::params::QnnParams;
use super::threshold::{calibrate_threshold, classify};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// How an input state is prepared from the Neel state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PrepMode {
    /// Every active qubit takes part in the quench.
    #[default]
    Full,
    /// `qubit` is held in `|0⟩` and decoupled from the lattice during the quench.
    Probe { qubit: usize },
}

/// Recipe for one input state: Neel state evolved for `t_state_ns` under the
/// disordered Hamiltonian drawn from `(h_mhz, disorder_seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub label: Label,
    pub h_mhz: f64,
    pub disorder_seed: u64,
    pub t_state_ns: f64,
    #[serde(default)]
    pub prep: PrepMode,
}

impl LabeledSample {
    pub fn prepare(&self, lattice: &LatticeSpec) -> Result<StateVector> {
        let disorder = sample_disorder(lattice, self.h_mhz, self.disorder_seed)?;
        let mut pattern = neel_pattern(lattice);
        let decoupled: Vec<usize> = match self.prep {
            PrepMode::Full => Vec::new(),
            PrepMode::Probe { qubit } => {
                if qubit >= lattice.num_qubits() {
                    return Err(Error::QubitOutOfRange {
                        qubit,
                        num_qubits: lattice.num_qubits(),
                    });
                }
                pattern &= !(1u64 << qubit);
                vec![qubit]
            }
        };
        let h = HamiltonianOp::with_decoupled(lattice, &disorder.detunings_mhz, &decoupled)?;
        let mut state = basis_state(lattice, pattern)?;
        evolve_in_place(&h, &mut state, self.t_state_ns, KrylovOptions::default())?;
        Ok(state)
    }
}

/// Materializes every recipe, concurrently, in input order.
pub fn prepare_all(lattice: &LatticeSpec, samples: &[LabeledSample]) -> Result<Vec<StateVector>> {
    samples.par_iter().map(|s| s.prepare(lattice)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// One update per epoch from the batch-averaged gradient.
    #[default]
    FullBatch,
    /// One update per training sample, shuffled each epoch.
    PerSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub w_ergodic: f64,
    pub w_localized: f64,
    pub gradient_mode: GradientMode,
    /// Central-difference step (rad) for finite-difference gradients.
    pub fd_step: f64,
    pub t0_ns: f64,
    pub layers: usize,
    pub batch_mode: BatchMode,
    pub threshold: f64,
    /// Replace `threshold` by the Gaussian-intersection threshold of the final
    /// training-set outputs.
    pub calibrate_threshold: bool,
    /// Random candidates tried before training; 0 starts from one random draw.
    pub init_candidates: usize,
    /// Per-class size of the dataset used to rank initial candidates.
    pub init_samples_per_class: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 25,
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.05,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            w_ergodic: 3.0,
            w_localized: 1.0,
            gradient_mode: GradientMode::ChainShift,
            fd_step: 1e-5,
            t0_ns: 200.0,
            layers: 1,
            batch_mode: BatchMode::FullBatch,
            threshold: 0.5,
            calibrate_threshold: false,
            init_candidates: 50,
            init_samples_per_class: 50,
            seed: 2021,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::Config {
                key: key.into(),
                message,
            })
        };
        if self.epochs == 0 {
            return bad("training.epochs", "must be >= 1".into());
        }
        if !(self.w_ergodic > 0.0) {
            return bad("training.w_ergodic", "weights must be positive".into());
        }
        if !(self.w_localized > 0.0) {
            return bad("training.w_localized", "weights must be positive".into());
        }
        if !(self.learning_rate > 0.0) {
            return bad("training.learning_rate", "must be positive".into());
        }
        if !(self.fd_step > 0.0) {
            return bad("training.fd_step", "must be positive".into());
        }
        if !(self.t0_ns >= 0.0) {
            return bad("training.t0_ns", "must be non-negative".into());
        }
        if self.layers == 0 {
            return bad("training.layers", "must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad("training.threshold", "must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn weight(&self, label: Label) -> f64 {
        match label {
            Label::Ergodic => self.w_ergodic,
            Label::Localized => self.w_localized,
        }
    }

    fn optimizer(&self, dim: usize) -> Optimizer {
        match self.optimizer {
            OptimizerKind::Adam => Optimizer::adam(
                dim,
                self.learning_rate,
                self.adam_beta1,
                self.adam_beta2,
                self.adam_epsilon,
            ),
            OptimizerKind::Sgd => Optimizer::sgd(self.learning_rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Training loss at the start of the epoch (Forward stage).
    pub loss: f64,
    pub train_accuracy: f64,
    /// Test accuracy after the epoch's update (Testing stage).
    /// `None` when training ran without a test set.
    pub test_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub lattice: LatticeConfig,
    pub params: QnnParams,
    pub threshold: f64,
    pub history: Vec<EpochRecord>,
    pub config: TrainingConfig,
}

impl TrainedModel {
    pub fn qnn(&self, lattice: &LatticeSpec) -> Result<Qnn> {
        Qnn::new(lattice, self.config.t0_ns)
    }

    pub fn probabilities(&self, lattice: &LatticeSpec, states: &[StateVector]) -> Result<Vec<f64>> {
        let qnn = self.qnn(lattice)?;
        states
            .par_iter()
            .map(|s| qnn.forward(s, &self.params))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }
}

/// Fraction of `probs` whose thresholded class equals the label.
pub fn accuracy(probs: &[f64], labels: &[Label], threshold: f64) -> f64 {
    let hits = probs
        .iter()
        .zip(labels)
        .filter(|(&p, &l)| classify(p, threshold) == l)
        .count();
    hits as f64 / probs.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitCandidate {
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSearchResult {
    pub best: QnnParams,
    pub best_index: usize,
    pub candidates: Vec<InitCandidate>,
}

/// Draws `n_candidates` parameter sets uniform in `[0, 2π)` and keeps the one
/// with the lowest weighted loss on `dataset`. Candidate `c` comes from the
/// stream `(seed, "init-candidate", c)`.
pub fn init_search(
    lattice: &LatticeSpec,
    dataset: &[LabeledSample],
    n_candidates: usize,
    seed: u64,
    config: &TrainingConfig,
) -> Result<InitSearchResult> {
    if n_candidates == 0 {
        return Err(Error::InvalidArgument("need at least one candidate".into()));
    }
    let states = prepare_all(lattice, dataset)?;
    let labels: Vec<Label> = dataset.iter().map(|s| s.label).collect();
    let weights: Vec<f64> = labels.iter().map(|&l| config.weight(l)).collect();
    let qnn = Qnn::new(lattice, config.t0_ns)?;
    let pipeline = SamplePipeline::new(&qnn, &states, &labels, &weights)?;

    let mut best: Option<(f64, usize, QnnParams)> = None;
    let mut candidates = Vec::with_capacity(n_candidates);
    for c in 0..n_candidates {
        let mut rng = derived_rng(seed, "init-candidate", c as u64);
        let params = QnnParams::random(
            lattice.num_qubits(),
            config.layers,
            lattice.readout_index(),
            &mut rng,
        )?;
        let probs = pipeline.probabilities(&params)?;
        let loss = bce_loss(&probs, &labels, &weights)?;
        candidates.push(InitCandidate {
            loss,
            accuracy: accuracy(&probs, &labels, config.threshold),
        });
        if best.as_ref().map_or(true, |b| loss < b.0) {
            best = Some((loss, c, params));
        }
    }
    let (_, best_index, best) = best.expect("at least one candidate");
    Ok(InitSearchResult {
        best,
        best_index,
        candidates,
    })
}

/// Trains from a single random initial draw (stream `(seed, "init", 0)`).
pub fn train(
    lattice: &LatticeSpec,
    train_set: &[LabeledSample],
    test_set: &[LabeledSample],
    config: &TrainingConfig,
) -> Result<TrainedModel> {
    let mut rng = derived_rng(config.seed, "init", 0);
    let init = QnnParams::random(
        lattice.num_qubits(),
        config.layers,
        lattice.readout_index(),
        &mut rng,
    )?;
    train_from(lattice, train_set, test_set, config, init)
}

/// Each epoch: Forward (training loss and accuracy), Backward (gradient and
/// optimizer update), Testing (test accuracy with the updated parameters).
pub fn train_from(
    lattice: &LatticeSpec,
    train_set: &[LabeledSample],
    test_set: &[LabeledSample],
    config: &TrainingConfig,
    init: QnnParams,
) -> Result<TrainedModel> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if init.num_qubits != lattice.num_qubits() || init.layers != config.layers {
        return Err(Error::DimensionMismatch {
            expected: lattice.num_qubits(),
            got: init.num_qubits,
        });
    }
    let train_states = prepare_all(lattice, train_set)?;
    let test_states = prepare_all(lattice, test_set)?;
    let train_labels: Vec<Label> = train_set.iter().map(|s| s.label).collect();
    let test_labels: Vec<Label> = test_set.iter().map(|s| s.label).collect();
    let train_weights: Vec<f64> = train_labels.iter().map(|&l| config.weight(l)).collect();
    let test_weights: Vec<f64> = test_labels.iter().map(|&l| config.weight(l)).collect();

    let qnn = Qnn::new(lattice, config.t0_ns)?;
    let train_pipe = SamplePipeline::new(&qnn, &train_states, &train_labels, &train_weights)?;
    let test_pipe = if test_states.is_empty() {
        None
    } else {
        Some(SamplePipeline::new(&qnn, &test_states, &test_labels, &test_weights)?)
    };

    let mut params = init;
    let mut x = params.to_flat();
    let mut optimizer = config.optimizer(params.dim());
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let probs = train_pipe.probabilities(&params)?;
        let loss = bce_loss(&probs, &train_labels, &train_weights)?;
        let train_accuracy = accuracy(&probs, &train_labels, config.threshold);

        match config.batch_mode {
            BatchMode::FullBatch => {
                let grad = gradient_shift(&train_pipe, &params, config.gradient_mode, config.fd_step)?;
                optimizer.step(&mut x, &grad);
                params.set_flat(&x)?;
            }
            BatchMode::PerSample => {
                let mut order: Vec<usize> = (0..train_pipe.len()).collect();
                order.shuffle(&mut derived_rng(config.seed, "epoch-order", epoch as u64));
                for i in order {
                    let grad = gradient_shift(
                        &train_pipe.sample(i),
                        &params,
                        config.gradient_mode,
                        config.fd_step,
                    )?;
                    optimizer.step(&mut x, &grad);
                    params.set_flat(&x)?;
                }
            }
        }

        let test_accuracy = match &test_pipe {
            Some(p) => Some(accuracy(&p.probabilities(&params)?, &test_labels, config.threshold)),
            None => None,
        };
        history.push(EpochRecord {
            epoch,
            loss,
            train_accuracy,
            test_accuracy,
        });
    }

    let threshold = if config.calibrate_threshold {
        calibrate_threshold(&train_pipe.probabilities(&params)?, &train_labels)?
    } else {
        config.threshold
    };

    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        lattice: lattice.to_config(),
        params,
        threshold,
        history,
        config: config.clone(),
    })
}
