//! Finite detuning ramps between idle points and the working point.
//!
//! Qubits start from their idle detunings, ramp linearly to the disordered
//! working point over `t_ramp`, hold, and ramp back. The final basis
//! distribution is compared with the instant-ramp reference.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{neel_pattern, sample_disorder, LatticeSpec};
use crate::output::Table;
use crate::seed::derive_seed;
use crate::spectral::{mean, spearman};
use crate::statevec::{
    basis_distribution, basis_state, evolve_in_place, overlap_fidelity, HamiltonianOp,
    KrylovOptions, StateVector,
};

use super::record::ExperimentRecord;

/// Longest piecewise-constant step used to integrate a ramp.
pub const MAX_RAMP_STEP_NS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RampingConfig {
    pub ramp_grid_ns: Vec<f64>,
    pub hold_ns: f64,
    /// Idle detunings: `+offset` on sublattice A, `−offset` on B.
    pub idle_offset_mhz: f64,
    /// Per-qubit idle detunings; overrides `idle_offset_mhz` when set.
    pub idle_offsets_mhz: Option<Vec<f64>>,
    /// Disorder strength of the working point.
    pub h_mhz: f64,
    pub realizations: usize,
}

impl Default for RampingConfig {
    fn default() -> Self {
        RampingConfig {
            ramp_grid_ns: (0..=25).map(|i| 4.0 * i as f64).collect(),
            hold_ns: 200.0,
            idle_offset_mhz: 100.0,
            idle_offsets_mhz: None,
            h_mhz: 1.0,
            realizations: 5,
        }
    }
}

impl RampingConfig {
    pub fn idle_detunings(&self, lattice: &LatticeSpec) -> Result<Vec<f64>> {
        match &self.idle_offsets_mhz {
            Some(v) if v.len() != lattice.num_qubits() => Err(Error::DimensionMismatch {
                expected: lattice.num_qubits(),
                got: v.len(),
            }),
            Some(v) => Ok(v.clone()),
            None => Ok((0..lattice.num_qubits())
                .map(|i| {
                    if lattice.on_sublattice_a(i) {
                        self.idle_offset_mhz
                    } else {
                        -self.idle_offset_mhz
                    }
                })
                .collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampPoint {
    pub t_ramp_ns: f64,
    pub fidelity_mean: f64,
    pub fidelity_min: f64,
}

/// Piecewise-linear sweep from `from` to `to` over `duration`, integrated
/// with equal midpoint-sampled steps no longer than [`MAX_RAMP_STEP_NS`].
fn ramp(
    lattice: &LatticeSpec,
    state: &mut StateVector,
    from: &[f64],
    to: &[f64],
    duration: f64,
) -> Result<()> {
    if duration <= 0.0 {
        return Ok(());
    }
    let steps = (duration / MAX_RAMP_STEP_NS).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let mut d = vec![0.0; from.len()];
    for k in 0..steps {
        let s = (k as f64 + 0.5) / steps as f64;
        for (i, x) in d.iter_mut().enumerate() {
            *x = from[i] + (to[i] - from[i]) * s;
        }
        let h = HamiltonianOp::new(lattice, &d)?;
        evolve_in_place(&h, state, dt, KrylovOptions::default())?;
    }
    Ok(())
}

fn final_distribution(
    lattice: &LatticeSpec,
    idle: &[f64],
    target: &[f64],
    t_ramp: f64,
    hold: f64,
) -> Result<Vec<f64>> {
    let mut state = basis_state(lattice, neel_pattern(lattice))?;
    ramp(lattice, &mut state, idle, target, t_ramp)?;
    let h = HamiltonianOp::new(lattice, target)?;
    evolve_in_place(&h, &mut state, hold, KrylovOptions::default())?;
    ramp(lattice, &mut state, target, idle, t_ramp)?;
    Ok(basis_distribution(&state))
}

/// Fidelity against the instant ramp for each ramp time, averaged over
/// working points drawn from `(seed, "ramp-disorder", r)`.
pub fn run_ramping_study(
    lattice: &LatticeSpec,
    config: &RampingConfig,
    seed: u64,
) -> Result<Vec<RampPoint>> {
    if config.ramp_grid_ns.iter().any(|t| !(*t >= 0.0)) || !(config.hold_ns >= 0.0) {
        return Err(Error::InvalidArgument("ramp and hold times must be >= 0".into()));
    }
    if config.realizations == 0 {
        return Err(Error::InvalidArgument("realizations must be >= 1".into()));
    }
    let idle = config.idle_detunings(lattice)?;
    let targets: Vec<Vec<f64>> = (0..config.realizations as u64)
        .map(|r| {
            sample_disorder(lattice, config.h_mhz, derive_seed(seed, "ramp-disorder", r))
                .map(|d| d.detunings_mhz)
        })
        .collect::<Result<_>>()?;
    let references: Vec<Vec<f64>> = targets
        .iter()
        .map(|t| final_distribution(lattice, &idle, t, 0.0, config.hold_ns))
        .collect::<Result<_>>()?;

    config
        .ramp_grid_ns
        .par_iter()
        .map(|&t_ramp| {
            let f: Vec<f64> = targets
                .iter()
                .zip(&references)
                .map(|(t, reference)| {
                    let p = final_distribution(lattice, &idle, t, t_ramp, config.hold_ns)?;
                    overlap_fidelity(&p, reference)
                })
                .collect::<Result<_>>()?;
            Ok(RampPoint {
                t_ramp_ns: t_ramp,
                fidelity_mean: mean(&f),
                fidelity_min: f.iter().cloned().fold(f64::INFINITY, f64::min),
            })
        })
        .collect()
}

pub fn ramping_record(lattice: &LatticeSpec, config: &RampingConfig, seed: u64) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let mut rec = ExperimentRecord::new("ramping", seed, config)?;
    let points = run_ramping_study(lattice, config, seed)?;
    let mut t = Table::new("ramping", &["t_ramp_ns", "fidelity_mean", "fidelity_min", "realizations"]);
    for p in &points {
        t.push(vec![
            p.t_ramp_ns.into(),
            p.fidelity_mean.into(),
            p.fidelity_min.into(),
            config.realizations.into(),
        ]);
    }
    let f: Vec<f64> = points.iter().map(|p| p.fidelity_mean).collect();
    if f.len() >= 2 {
        rec.set("spearman_f_vs_ramp", spearman(&config.ramp_grid_ns, &f).ok());
    }
    rec.tables.push(t);
    Ok(rec.finish(started))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instant_ramp_is_exact() {
        let l = LatticeSpec::grid(2, 2, 2.0).unwrap();
        let cfg = RampingConfig {
            ramp_grid_ns: vec![0.0, 2.0],
            hold_ns: 50.0,
            realizations: 2,
            ..Default::default()
        };
        let pts = run_ramping_study(&l, &cfg, 1).unwrap();
        assert_eq!(pts[0].fidelity_mean, 1.0);
        assert!(pts[1].fidelity_mean <= 1.0 && pts[1].fidelity_mean > 0.9);
    }

    #[test]
    fn ramp_steps_stay_short() {
        // 1.2 ns → 3 steps of 0.4 ns, matching an explicit step-by-step run
        let l = LatticeSpec::grid(1, 2, 2.0).unwrap();
        let from = [100.0, -100.0];
        let to = [0.5, -0.5];
        let mut a = basis_state(&l, 1).unwrap();
        ramp(&l, &mut a, &from, &to, 1.2).unwrap();
        let mut b = basis_state(&l, 1).unwrap();
        for k in 0..3 {
            let s = (k as f64 + 0.5) / 3.0;
            let d: Vec<f64> = from.iter().zip(&to).map(|(f, t)| f + (t - f) * s).collect();
            evolve_in_place(&HamiltonianOp::new(&l, &d).unwrap(), &mut b, 1.2 / 3.0, KrylovOptions::default())
                .unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn checkerboard_idle() {
        let l = LatticeSpec::grid(2, 2, 2.0).unwrap();
        let idle = RampingConfig::default().idle_detunings(&l).unwrap();
        assert_eq!(idle, vec![100.0, -100.0, -100.0, 100.0]);
    }
}
