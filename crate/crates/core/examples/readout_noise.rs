//! Readout errors and finite shots on top of a trained classifier.
//!
//! ```bash
//! cargo run --release -p qns-core --example readout_noise
//! ```

use qns::experiments::{run_classification_experiment, ClassificationConfig, NoiseModel};
use qns::lattice::LatticeSpec;
use qns::qnn::accuracy;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let out = run_classification_experiment(&lattice, &ClassificationConfig::default(), 2021)?;
    let labels: Vec<_> = out.test_set.iter().map(|s| s.label).collect();
    let t = out.model.threshold;

    println!("{:>6} {:>6} {:>6} {:>9}", "f00", "f11", "shots", "accuracy");
    println!("{:>6} {:>6} {:>6} {:9.3}", 1, 1, "exact", out.test_accuracy);
    for shots in [0, 1000, 100, 10] {
        let noise = NoiseModel {
            shots,
            seed: 4,
            ..NoiseModel::default()
        };
        let observed = noise.observe_all(&out.test_probabilities)?;
        let shots = if shots == 0 { "exact".to_string() } else { shots.to_string() };
        println!(
            "{:6.3} {:6.3} {:>6} {:9.3}",
            noise.f00,
            noise.f11,
            shots,
            accuracy(&observed, &labels, t)
        );
    }
    Ok(())
}
