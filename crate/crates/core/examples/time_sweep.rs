//! Classifier outputs for states prepared over 6–501 ns (log grid), using a
//! model trained on 200 ns states. Retraining at other analog times is
//! skipped here; see `qns sweep-time` for the full study.
//!
//! ```bash
//! cargo run --release -p qns-core --example time_sweep
//! ```

use qns::experiments::{
    run_classification_experiment, run_time_sweep, ClassificationConfig, TimeSweepConfig,
};
use qns::lattice::LatticeSpec;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let config = ClassificationConfig::default();
    let model = run_classification_experiment(&lattice, &config, 2021)?.model;
    let sweep = TimeSweepConfig {
        retrain_t0_ns: vec![],
        ..Default::default()
    };
    let r = run_time_sweep(&model, &lattice, &sweep, &config, 11)?;
    println!("{:>8} {:>8} {:>8} {:>8} {:>8}", "t_ns", "p_erg", "p_loc", "gap", "acc");
    for k in 0..r.t_ns.len() {
        println!(
            "{:8.1} {:8.3} {:8.3} {:8.3} {:8.2}",
            r.t_ns[k], r.mean_ergodic[k], r.mean_localized[k], r.gap[k], r.accuracy[k]
        );
    }
    Ok(())
}
