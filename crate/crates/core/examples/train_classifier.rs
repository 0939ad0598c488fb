//! Train the single-readout classifier on 3x3 ergodic (h = 1 MHz) versus
//! localized (h = 50 MHz) states and report the test distributions.
//!
//! ```bash
//! cargo run --release -p qns-core --example train_classifier [seed]
//! ```

use qns::experiments::{run_classification_experiment, ClassificationConfig};
use qns::lattice::LatticeSpec;

fn main() -> qns::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2021);
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let config = ClassificationConfig::default();
    let out = run_classification_experiment(&lattice, &config, seed)?;

    println!("epoch   loss    train   test");
    for h in &out.model.history {
        println!(
            "{:5} {:7.4} {:7.3} {:6.3}",
            h.epoch,
            h.loss,
            h.train_accuracy,
            h.test_accuracy.unwrap_or(f64::NAN)
        );
    }
    let rec = &out.record;
    for class in ["ergodic", "localized"] {
        println!(
            "{class:>9}: p = {:.3} ± {:.3}",
            rec.metric(&format!("fit_{class}_mean")).unwrap_or(f64::NAN),
            rec.metric(&format!("fit_{class}_std")).unwrap_or(f64::NAN)
        );
    }
    println!("test accuracy {:.3} at threshold {}", out.test_accuracy, out.model.threshold);
    Ok(())
}
