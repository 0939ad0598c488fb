//! Train-and-test pipelines for the ergodic/localized classifier.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::output::Table;
use crate::qnn::{
    accuracy, gaussian_fit, init_search, prepare_all, train_from, Label, LabeledSample, PrepMode,
    QnnParams, TrainedModel, TrainingConfig,
};
use crate::seed::{derive_seed, derived_rng};
use crate::statevec::excitation_probability;

use super::dataset::{dataset_table, generate_with_prep, DatasetConfig};
use super::noise::NoiseModel;
use super::record::ExperimentRecord;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassificationConfig {
    pub dataset: DatasetConfig,
    pub training: TrainingConfig,
    /// Readout noise applied to test-set outputs; `None` is noiseless.
    pub noise: Option<NoiseModel>,
}

impl ClassificationConfig {
    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.training.validate()?;
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationOutcome {
    pub record: ExperimentRecord,
    pub model: TrainedModel,
    pub test_set: Vec<LabeledSample>,
    /// Noiseless test-set outputs.
    pub test_probabilities: Vec<f64>,
    pub test_accuracy: f64,
}

const HISTOGRAM_BINS: usize = 20;

/// Datasets from `(seed, "train-set" | "test-set" | "init-set", 0)`, init
/// search from `(seed, "init-search", 0)`, training streams from
/// `(seed, "training", 0)`.
pub fn run_classification_experiment(
    lattice: &LatticeSpec,
    config: &ClassificationConfig,
    seed: u64,
) -> Result<ClassificationOutcome> {
    pipeline(lattice, config, seed, "classification", PrepMode::Full)
}

/// Probe-qubit variant: the readout qubit sits in `|0⟩`, decoupled, while the
/// rest of the lattice is quenched; the classifier threshold is calibrated
/// on the training outputs afterwards.
pub fn run_probe_experiment(
    lattice: &LatticeSpec,
    config: &ClassificationConfig,
    seed: u64,
) -> Result<ClassificationOutcome> {
    let mut cfg = config.clone();
    cfg.training.calibrate_threshold = true;
    let qubit = lattice.readout_index();
    pipeline(lattice, &cfg, seed, "probe", PrepMode::Probe { qubit })
}

fn pipeline(
    lattice: &LatticeSpec,
    config: &ClassificationConfig,
    seed: u64,
    kind: &str,
    prep: PrepMode,
) -> Result<ClassificationOutcome> {
    let started = Instant::now();
    config.validate()?;
    let d = &config.dataset;
    let make = |n: usize, stream: &str| {
        generate_with_prep(
            lattice,
            n,
            d.h_erg_mhz,
            d.h_loc_mhz,
            d.t_state_ns,
            derive_seed(seed, stream, 0),
            prep,
        )
    };
    let train_set = make(d.n_train_per_class, "train-set")?;
    let test_set = if d.n_test_per_class > 0 {
        make(d.n_test_per_class, "test-set")?
    } else {
        Vec::new()
    };

    let mut training = config.training.clone();
    training.seed = derive_seed(seed, "training", 0);

    let mut rec = ExperimentRecord::new(kind, seed, config)?;
    let init = if training.init_candidates > 0 {
        let init_set = make(training.init_samples_per_class.max(1), "init-set")?;
        let search = init_search(
            lattice,
            &init_set,
            training.init_candidates,
            derive_seed(seed, "init-search", 0),
            &training,
        )?;
        rec.set("init_best_index", search.best_index);
        rec.set("init_best_loss", search.candidates[search.best_index].loss);
        let mut t = Table::new("init_candidates", &["candidate", "loss", "accuracy"]);
        for (i, c) in search.candidates.iter().enumerate() {
            t.push(vec![i.into(), c.loss.into(), c.accuracy.into()]);
        }
        rec.tables.push(t);
        search.best
    } else {
        QnnParams::random(
            lattice.num_qubits(),
            training.layers,
            lattice.readout_index(),
            &mut derived_rng(training.seed, "init", 0),
        )?
    };

    let model = train_from(lattice, &train_set, &test_set, &training, init)?;

    let test_states = prepare_all(lattice, &test_set)?;
    if let PrepMode::Probe { qubit } = prep {
        let max_probe = test_states
            .iter()
            .map(|s| excitation_probability(s, qubit))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        rec.set("probe_max_excitation_before_qnn", max_probe);
    }
    let probs = model.probabilities(lattice, &test_states)?;
    let labels: Vec<Label> = test_set.iter().map(|s| s.label).collect();
    let observed = match &config.noise {
        Some(n) => n.observe_all(&probs)?,
        None => probs.clone(),
    };
    let test_accuracy = if probs.is_empty() {
        f64::NAN
    } else {
        accuracy(&observed, &labels, model.threshold)
    };

    let first = model.history.first().map(|h| h.loss);
    let last = model.history.last().map(|h| h.loss);
    rec.set("threshold", model.threshold);
    rec.set("test_accuracy", test_accuracy);
    if config.noise.is_some() && !probs.is_empty() {
        rec.set("test_accuracy_noiseless", accuracy(&probs, &labels, model.threshold));
    }
    rec.set("initial_loss", first);
    rec.set("final_loss", last);
    rec.set("loss_decreased", matches!((first, last), (Some(a), Some(b)) if b < a));
    rec.set("readout_index", lattice.readout_index());
    for label in [Label::Ergodic, Label::Localized] {
        let vals: Vec<f64> = observed
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == label)
            .map(|(&p, _)| p)
            .collect();
        if let Ok(fit) = gaussian_fit(&vals) {
            rec.set(&format!("fit_{}_mean", label.as_str()), fit.mean);
            rec.set(&format!("fit_{}_std", label.as_str()), fit.std);
        }
    }

    let mut history = Table::new("history", &["epoch", "loss", "train_acc", "test_acc"]);
    for h in &model.history {
        history.push(vec![
            h.epoch.into(),
            h.loss.into(),
            h.train_accuracy.into(),
            h.test_accuracy.into(),
        ]);
    }
    let mut outputs = Table::new("test_outputs", &["index", "label", "h_mhz", "p", "p_observed", "predicted"]);
    for (i, s) in test_set.iter().enumerate() {
        let predicted = crate::qnn::classify(observed[i], model.threshold);
        outputs.push(vec![
            i.into(),
            s.label.as_str().into(),
            s.h_mhz.into(),
            probs[i].into(),
            observed[i].into(),
            predicted.as_str().into(),
        ]);
    }
    let mut hist = Table::new("histogram", &["bin_lo", "bin_hi", "ergodic", "localized"]);
    let mut counts = [[0usize; 2]; HISTOGRAM_BINS];
    for (&p, &l) in observed.iter().zip(&labels) {
        let b = ((p * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        counts[b][(l == Label::Localized) as usize] += 1;
    }
    for (b, c) in counts.iter().enumerate() {
        hist.push(vec![
            (b as f64 / HISTOGRAM_BINS as f64).into(),
            ((b + 1) as f64 / HISTOGRAM_BINS as f64).into(),
            c[0].into(),
            c[1].into(),
        ]);
    }
    rec.tables.push(history);
    rec.tables.push(outputs);
    rec.tables.push(hist);
    rec.tables.push(dataset_table("train_set", &train_set));

    Ok(ClassificationOutcome {
        record: rec.finish(started),
        model,
        test_set,
        test_probabilities: probs,
        test_accuracy,
    })
}

/// Rejects models whose geometry does not match `lattice`.
pub(crate) fn check_model(model: &TrainedModel, lattice: &LatticeSpec) -> Result<()> {
    if model.params.num_qubits != lattice.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: lattice.num_qubits(),
            got: model.params.num_qubits,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ClassificationConfig {
        let mut c = ClassificationConfig::default();
        c.dataset.n_train_per_class = 3;
        c.dataset.n_test_per_class = 3;
        c.dataset.t_state_ns = 50.0;
        c.training.epochs = 3;
        c.training.init_candidates = 3;
        c.training.init_samples_per_class = 2;
        c
    }

    #[test]
    fn record_shape_and_determinism() {
        let l = LatticeSpec::grid(2, 2, 2.185).unwrap();
        let a = run_classification_experiment(&l, &small(), 7).unwrap();
        let b = run_classification_experiment(&l, &small(), 7).unwrap();
        assert_eq!(a.model, b.model);
        for name in ["history", "test_outputs", "histogram", "train_set", "init_candidates"] {
            let ta = a.record.table(name).unwrap();
            assert_eq!(ta.to_csv_string().unwrap(), b.record.table(name).unwrap().to_csv_string().unwrap());
        }
        assert_eq!(a.record.table("history").unwrap().rows.len(), 3);
        let hist = a.record.table("histogram").unwrap();
        let total: f64 = hist.column("ergodic").unwrap().iter().sum::<f64>()
            + hist.column("localized").unwrap().iter().sum::<f64>();
        assert_eq!(total, 6.0);
    }

    #[test]
    fn probe_keeps_probe_dark_and_calibrates() {
        let l = LatticeSpec::grid(2, 2, 2.185).unwrap().with_readout(0).unwrap();
        let out = run_probe_experiment(&l, &small(), 3).unwrap();
        assert_eq!(out.record.metric("probe_max_excitation_before_qnn"), Some(0.0));
        assert!(out.model.config.calibrate_threshold);
    }
}
