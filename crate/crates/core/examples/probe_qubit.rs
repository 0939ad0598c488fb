//! Probe-qubit variant: the centre qubit stays dark and decoupled while the
//! eight outer qubits are quenched, then serves as the classifier readout.
//!
//! ```bash
//! cargo run --release -p qns-core --example probe_qubit
//! ```

use qns::experiments::{run_probe_experiment, ClassificationConfig};
use qns::lattice::LatticeSpec;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let out = run_probe_experiment(&lattice, &ClassificationConfig::default(), 2021)?;
    let rec = &out.record;
    println!(
        "probe excitation before the circuit: {}",
        rec.metric("probe_max_excitation_before_qnn").unwrap_or(f64::NAN)
    );
    println!("calibrated threshold: {:.3}", out.model.threshold);
    println!("test accuracy:        {:.3}", out.test_accuracy);
    Ok(())
}
