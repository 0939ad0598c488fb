//! Level statistics and the generalization sweeps of a trained classifier
//! over disorder strength and preparation time.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{neel_pattern, sample_disorder, LatticeSpec};
use crate::output::Table;
use crate::qnn::{classify, Label, LabeledSample, TrainedModel};
use crate::seed::derive_seed;
use crate::spectral::{correlation_coefficient, mean, neel_sector_sweep, spearman, std_dev};
use crate::statevec::{basis_state, evolve_in_place, HamiltonianOp, KrylovOptions};

use super::classification::{check_model, run_classification_experiment, ClassificationConfig};
use super::dataset::generate_dataset;
use super::record::ExperimentRecord;

#[derive(Serialize)]
struct LevelStatsSettings<'a> {
    h_over_g: &'a [f64],
    realizations: usize,
}

/// Neel-sector mean gap ratio versus `h/g`; disorder streams come from
/// `(seed, "level-stats", ·)`.
pub fn level_stats_record(
    lattice: &LatticeSpec,
    h_over_g: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rec = ExperimentRecord::new(
        "level-stats",
        seed,
        &LevelStatsSettings {
            h_over_g,
            realizations,
        },
    )?;
    let points = neel_sector_sweep(lattice, h_over_g, realizations, seed)?;
    let mut t = Table::new(
        "level_stats",
        &["h_over_g", "r_mean", "r_stderr", "realizations", "degenerate"],
    );
    for p in &points {
        t.push(vec![
            p.h_over_g.into(),
            p.r_mean.into(),
            p.r_stderr.into(),
            p.realizations.into(),
            p.degenerate.into(),
        ]);
    }
    let r: Vec<f64> = points.iter().map(|p| p.r_mean).collect();
    rec.set("r_max", r.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    rec.set("r_last", r.last());
    if r.len() >= 2 {
        rec.set("spearman_r_vs_h", spearman(h_over_g, &r).ok());
    }
    rec.tables.push(t);
    Ok(rec.finish(started))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSweepConfig {
    pub h_over_g: Vec<f64>,
    pub profiles_per_point: usize,
    pub t_state_ns: f64,
    /// Realizations for the companion gap-ratio curve; 0 skips it.
    pub level_stats_realizations: usize,
}

impl Default for DisorderSweepConfig {
    fn default() -> Self {
        DisorderSweepConfig {
            h_over_g: (0..20).map(|i| 0.46 + (18.3 - 0.46) * i as f64 / 19.0).collect(),
            profiles_per_point: 50,
            t_state_ns: 200.0,
            level_stats_realizations: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub h_over_g: f64,
    pub h_mhz: f64,
    pub p_localized: f64,
    pub mean_output: f64,
    pub std_output: f64,
    pub profiles: usize,
}

/// Fraction of freshly prepared states classified localized at each `h/g`.
///
/// Profile `j` draws from the stream `(seed, "sweep-profile", j)` at every
/// grid point, so neighbouring points differ only through `h` (common random
/// numbers keep the curve smooth).
pub fn run_disorder_sweep(
    model: &TrainedModel,
    lattice: &LatticeSpec,
    config: &DisorderSweepConfig,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    check_model(model, lattice)?;
    if config.profiles_per_point == 0 {
        return Err(Error::InvalidArgument("profiles_per_point must be >= 1".into()));
    }
    let qnn = model.qnn(lattice)?;
    let g = lattice.coupling_mhz();
    config
        .h_over_g
        .iter()
        .map(|&x| {
            let h = x * g;
            let outputs: Vec<f64> = (0..config.profiles_per_point as u64)
                .into_par_iter()
                .map(|j| {
                    let s = LabeledSample {
                        label: Label::Localized,
                        h_mhz: h,
                        disorder_seed: derive_seed(seed, "sweep-profile", j),
                        t_state_ns: config.t_state_ns,
                        prep: Default::default(),
                    };
                    qnn.forward(&s.prepare(lattice)?, &model.params)
                })
                .collect::<Result<_>>()?;
            let loc = outputs
                .iter()
                .filter(|&&p| classify(p, model.threshold) == Label::Localized)
                .count();
            Ok(SweepPoint {
                h_over_g: x,
                h_mhz: h,
                p_localized: loc as f64 / outputs.len() as f64,
                mean_output: mean(&outputs),
                std_output: if outputs.len() > 1 { std_dev(&outputs) } else { 0.0 },
                profiles: outputs.len(),
            })
        })
        .collect()
}

/// Disorder sweep as a record; with `level_stats_realizations > 0` the table
/// gains an `r_mean` column and the summary the correlation between curves.
pub fn disorder_sweep_record(
    model: &TrainedModel,
    lattice: &LatticeSpec,
    config: &DisorderSweepConfig,
    seed: u64,
) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rec = ExperimentRecord::new("sweep-disorder", seed, config)?;
    let points = run_disorder_sweep(model, lattice, config, seed)?;
    let r = if config.level_stats_realizations > 0 {
        let pts = neel_sector_sweep(
            lattice,
            &config.h_over_g,
            config.level_stats_realizations,
            derive_seed(seed, "level-stats", 0),
        )?;
        Some(pts.into_iter().map(|p| p.r_mean).collect::<Vec<f64>>())
    } else {
        None
    };
    let mut cols = vec!["h_over_g", "h_mhz", "p_localized", "mean_output", "std_output", "profiles"];
    if r.is_some() {
        cols.push("r_mean");
    }
    let mut t = Table::new("sweep_disorder", &cols);
    for (i, p) in points.iter().enumerate() {
        let mut row = vec![
            p.h_over_g.into(),
            p.h_mhz.into(),
            p.p_localized.into(),
            p.mean_output.into(),
            p.std_output.into(),
            p.profiles.into(),
        ];
        if let Some(r) = &r {
            row.push(r[i].into());
        }
        t.push(row);
    }
    let pl: Vec<f64> = points.iter().map(|p| p.p_localized).collect();
    if pl.len() >= 2 {
        rec.set("spearman_p_vs_h", spearman(&config.h_over_g, &pl).ok());
    }
    if let Some(r) = &r {
        rec.set("correlation_p_vs_r", correlation_coefficient(&pl, r).ok());
    }
    rec.tables.push(t);
    Ok(rec.finish(started))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSweepConfig {
    /// Preparation times, sorted ascending.
    pub t_grid_ns: Vec<f64>,
    pub samples_per_class: usize,
    pub h_erg_mhz: f64,
    pub h_loc_mhz: f64,
    /// Analog times for the retraining study; empty skips it.
    pub retrain_t0_ns: Vec<f64>,
}

impl Default for TimeSweepConfig {
    fn default() -> Self {
        TimeSweepConfig {
            t_grid_ns: (0..20)
                .map(|i| (6f64.ln() + (501f64.ln() - 6f64.ln()) * i as f64 / 19.0).exp())
                .collect(),
            samples_per_class: 25,
            h_erg_mhz: 1.0,
            h_loc_mhz: 50.0,
            retrain_t0_ns: vec![100.0, 200.0, 300.0, 400.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSweepResult {
    pub t_ns: Vec<f64>,
    pub mean_ergodic: Vec<f64>,
    pub mean_localized: Vec<f64>,
    /// `mean_ergodic − mean_localized`; positive when the classes sit on the
    /// sides of the threshold the classifier expects.
    pub gap: Vec<f64>,
    pub accuracy: Vec<f64>,
    /// `(t0_ns, test accuracy)` of the retrained classifiers.
    pub retrained: Vec<(f64, f64)>,
}

/// Applies `model` to states prepared for each time in the grid (the same
/// disorder realizations at every time, from `(seed, "time-sweep", 0)`), then
/// retrains from scratch at each analog time in `retrain_t0_ns` with
/// `classification` (master seed `(seed, "retrain", k)`).
pub fn run_time_sweep(
    model: &TrainedModel,
    lattice: &LatticeSpec,
    config: &TimeSweepConfig,
    classification: &ClassificationConfig,
    seed: u64,
) -> Result<TimeSweepResult> {
    check_model(model, lattice)?;
    let grid = &config.t_grid_ns;
    if grid.iter().any(|t| !(*t >= 0.0)) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "time grid must be non-negative and sorted".into(),
        ));
    }
    let samples = generate_dataset(
        lattice,
        config.samples_per_class,
        config.h_erg_mhz,
        config.h_loc_mhz,
        0.0,
        derive_seed(seed, "time-sweep", 0),
    )?;
    let qnn = model.qnn(lattice)?;
    // outputs[sample][time]
    let outputs: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|s| {
            let disorder = sample_disorder(lattice, s.h_mhz, s.disorder_seed)?;
            let h = HamiltonianOp::from_disorder(lattice, &disorder)?;
            let mut state = basis_state(lattice, neel_pattern(lattice))?;
            let mut now = 0.0;
            grid.iter()
                .map(|&t| {
                    if t > now {
                        evolve_in_place(&h, &mut state, t - now, KrylovOptions::default())?;
                        now = t;
                    }
                    qnn.forward(&state, &model.params)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut res = TimeSweepResult {
        t_ns: grid.clone(),
        mean_ergodic: Vec::new(),
        mean_localized: Vec::new(),
        gap: Vec::new(),
        accuracy: Vec::new(),
        retrained: Vec::new(),
    };
    for k in 0..grid.len() {
        let of = |label: Label| -> Vec<f64> {
            samples
                .iter()
                .zip(&outputs)
                .filter(|(s, _)| s.label == label)
                .map(|(_, o)| o[k])
                .collect()
        };
        let (e, l) = (mean(&of(Label::Ergodic)), mean(&of(Label::Localized)));
        let hits = samples
            .iter()
            .zip(&outputs)
            .filter(|(s, o)| classify(o[k], model.threshold) == s.label)
            .count();
        res.mean_ergodic.push(e);
        res.mean_localized.push(l);
        res.gap.push(e - l);
        res.accuracy.push(hits as f64 / samples.len() as f64);
    }
    for (k, &t0) in config.retrain_t0_ns.iter().enumerate() {
        let mut c = classification.clone();
        c.training.t0_ns = t0;
        let out = run_classification_experiment(lattice, &c, derive_seed(seed, "retrain", k as u64))?;
        res.retrained.push((t0, out.test_accuracy));
    }
    Ok(res)
}

#[derive(Serialize)]
struct TimeSweepSettings<'a> {
    sweep: &'a TimeSweepConfig,
    retraining: &'a ClassificationConfig,
}

pub fn time_sweep_record(
    model: &TrainedModel,
    lattice: &LatticeSpec,
    config: &TimeSweepConfig,
    classification: &ClassificationConfig,
    seed: u64,
) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rec = ExperimentRecord::new(
        "sweep-time",
        seed,
        &TimeSweepSettings {
            sweep: config,
            retraining: classification,
        },
    )?;
    let r = run_time_sweep(model, lattice, config, classification, seed)?;
    let mut t = Table::new(
        "sweep_time",
        &["t_ns", "mean_p_ergodic", "mean_p_localized", "gap", "accuracy", "samples_per_class"],
    );
    for k in 0..r.t_ns.len() {
        t.push(vec![
            r.t_ns[k].into(),
            r.mean_ergodic[k].into(),
            r.mean_localized[k].into(),
            r.gap[k].into(),
            r.accuracy[k].into(),
            config.samples_per_class.into(),
        ]);
    }
    rec.tables.push(t);
    if !r.retrained.is_empty() {
        let mut t = Table::new("retrain", &["t0_ns", "test_accuracy"]);
        for &(t0, acc) in &r.retrained {
            t.push(vec![t0.into(), acc.into()]);
        }
        rec.tables.push(t);
        rec.set(
            "retrain_min_accuracy",
            r.retrained.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
        );
    }
    let late: Vec<f64> = r
        .t_ns
        .iter()
        .zip(&r.gap)
        .filter(|(&t, _)| t >= 40.0)
        .map(|(_, &g)| g)
        .collect();
    if !late.is_empty() {
        rec.set("min_gap_t_ge_40ns", late.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    Ok(rec.finish(started))
}
