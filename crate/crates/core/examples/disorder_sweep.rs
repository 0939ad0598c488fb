//! Apply a classifier trained at h = 1 / 50 MHz to states across the whole
//! disorder range and set the result beside the gap-ratio curve.
//!
//! ```bash
//! cargo run --release -p qns-core --example disorder_sweep
//! ```

use qns::experiments::{
    disorder_sweep_record, run_classification_experiment, ClassificationConfig,
    DisorderSweepConfig,
};
use qns::lattice::LatticeSpec;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let mut config = ClassificationConfig::default();
    config.training.calibrate_threshold = true;
    let model = run_classification_experiment(&lattice, &config, 2021)?.model;

    let sweep = DisorderSweepConfig {
        level_stats_realizations: 100,
        ..Default::default()
    };
    let rec = disorder_sweep_record(&model, &lattice, &sweep, 7)?;
    print!("{}", rec.tables[0].to_csv_string()?);
    println!(
        "spearman(P, h/g) = {:.3}, corr(P, r) = {:.3}",
        rec.metric("spearman_p_vs_h").unwrap_or(f64::NAN),
        rec.metric("correlation_p_vs_r").unwrap_or(f64::NAN)
    );
    Ok(())
}
