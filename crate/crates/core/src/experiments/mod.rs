//! End-to-end experiment pipelines.
//!
//! Every pipeline takes one master seed and derives all of its random streams
//! from it with [`crate::seed::derive_seed`]; parallel work is collected in
//! index order, so outputs do not depend on the number of worker threads.

mod classification;
mod dataset;
mod dynamics;
mod noise;
mod ramping;
mod record;
mod sweeps;

pub use classification::{
    run_classification_experiment, run_probe_experiment, ClassificationConfig,
    ClassificationOutcome,
};
pub use dataset::{dataset_table, generate_dataset, DatasetConfig};
pub use dynamics::{imbalance_record, run_imbalance_dynamics, ImbalanceCurve, STEADY_STATE_NS};
pub use noise::{apply_readout_noise, NoiseModel};
pub use ramping::{ramping_record, run_ramping_study, RampPoint, RampingConfig, MAX_RAMP_STEP_NS};
pub use record::ExperimentRecord;
pub use sweeps::{
    disorder_sweep_record, level_stats_record, run_disorder_sweep, run_time_sweep,
    time_sweep_record, DisorderSweepConfig, SweepPoint, TimeSweepConfig, TimeSweepResult,
};
