//! Quench dynamics of the sublattice imbalance.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{neel_pattern, sample_disorder, LatticeSpec};
use crate::output::Table;
use crate::seed::derive_seed;
use crate::spectral::{mean, std_dev};
use crate::statevec::{basis_state, evolve_in_place, imbalance, HamiltonianOp, KrylovOptions};

use super::record::ExperimentRecord;

/// Time at which the quasi-steady-state imbalance is read off.
pub const STEADY_STATE_NS: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImbalanceCurve {
    pub h_mhz: f64,
    pub times_ns: Vec<f64>,
    pub mean: Vec<f64>,
    /// Sample standard deviation across realizations (0 for one realization).
    pub std: Vec<f64>,
    pub realizations: usize,
    pub steady_mean: f64,
    pub steady_std: f64,
}

fn spread(values: &[f64]) -> f64 {
    if values.len() < 2 {
        0.0
    } else {
        std_dev(values)
    }
}

/// Neel-state quench averaged over disorder; realization `r` uses the stream
/// `(seed, "imbalance", r)`. `time_grid_ns` must be non-negative and sorted.
pub fn run_imbalance_dynamics(
    lattice: &LatticeSpec,
    h_mhz: f64,
    time_grid_ns: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<ImbalanceCurve> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("realizations must be >= 1".into()));
    }
    if time_grid_ns.iter().any(|t| !(*t >= 0.0)) || time_grid_ns.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "time grid must be non-negative and sorted".into(),
        ));
    }
    // evaluation times: the requested grid plus the steady-state point
    let mut times = time_grid_ns.to_vec();
    let steady_at = times.partition_point(|&t| t < STEADY_STATE_NS);
    let steady_in_grid = times.get(steady_at) == Some(&STEADY_STATE_NS);
    if !steady_in_grid {
        times.insert(steady_at, STEADY_STATE_NS);
    }

    let traces: Vec<Vec<f64>> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let disorder = sample_disorder(lattice, h_mhz, derive_seed(seed, "imbalance", r))?;
            let h = HamiltonianOp::from_disorder(lattice, &disorder)?;
            let mut state = basis_state(lattice, neel_pattern(lattice))?;
            let mut now = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &t in &times {
                if t > now {
                    evolve_in_place(&h, &mut state, t - now, KrylovOptions::default())?;
                    now = t;
                }
                out.push(imbalance(&state, lattice)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let column = |k: usize| -> Vec<f64> { traces.iter().map(|tr| tr[k]).collect() };
    let steady = column(steady_at);
    let mut mean_curve = Vec::with_capacity(time_grid_ns.len());
    let mut std_curve = Vec::with_capacity(time_grid_ns.len());
    for k in 0..times.len() {
        if k == steady_at && !steady_in_grid {
            continue;
        }
        let c = column(k);
        mean_curve.push(mean(&c));
        std_curve.push(spread(&c));
    }
    Ok(ImbalanceCurve {
        h_mhz,
        times_ns: time_grid_ns.to_vec(),
        mean: mean_curve,
        std: std_curve,
        realizations,
        steady_mean: mean(&steady),
        steady_std: spread(&steady),
    })
}

#[derive(Serialize)]
struct ImbalanceSettings<'a> {
    h_mhz: &'a [f64],
    time_grid_ns: &'a [f64],
    realizations: usize,
}

/// One curve per disorder strength; strength `k` uses master seed
/// `(seed, "imbalance-h", k)`.
pub fn imbalance_record(
    lattice: &LatticeSpec,
    h_mhz: &[f64],
    time_grid_ns: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rec = ExperimentRecord::new(
        "imbalance",
        seed,
        &ImbalanceSettings {
            h_mhz,
            time_grid_ns,
            realizations,
        },
    )?;
    let mut curves = Table::new("imbalance", &["h_mhz", "t_ns", "I_mean", "I_std", "realizations"]);
    let mut steady = Table::new("steady_state", &["h_mhz", "t_ns", "I_mean", "I_std", "realizations"]);
    for (k, &h) in h_mhz.iter().enumerate() {
        let c = run_imbalance_dynamics(
            lattice,
            h,
            time_grid_ns,
            realizations,
            derive_seed(seed, "imbalance-h", k as u64),
        )?;
        for i in 0..c.times_ns.len() {
            curves.push(vec![
                h.into(),
                c.times_ns[i].into(),
                c.mean[i].into(),
                c.std[i].into(),
                realizations.into(),
            ]);
        }
        steady.push(vec![
            h.into(),
            STEADY_STATE_NS.into(),
            c.steady_mean.into(),
            c.steady_std.into(),
            realizations.into(),
        ]);
    }
    rec.tables = vec![curves, steady];
    Ok(rec.finish(started))
}
