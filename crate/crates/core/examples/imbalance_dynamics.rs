//! Neel-state quench on a 3x3 lattice: sublattice imbalance I(t) at weak and
//! strong disorder, averaged over disorder realizations.
//!
//! ```bash
//! cargo run --release -p qns-core --example imbalance_dynamics
//! ```

use qns::experiments::run_imbalance_dynamics;
use qns::lattice::LatticeSpec;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let times: Vec<f64> = (0..=20).map(|i| 25.0 * i as f64).collect();
    let weak = run_imbalance_dynamics(&lattice, 1.0, &times, 20, 1)?;
    let strong = run_imbalance_dynamics(&lattice, 50.0, &times, 20, 1)?;

    println!("{:>6} {:>16} {:>16}", "t_ns", "I (h=1 MHz)", "I (h=50 MHz)");
    for (k, t) in times.iter().enumerate() {
        println!(
            "{t:6.0} {:9.3} ± {:5.3} {:9.3} ± {:5.3}",
            weak.mean[k], weak.std[k], strong.mean[k], strong.std[k]
        );
    }
    println!(
        "quasi-steady state (200 ns): {:.3} vs {:.3}",
        weak.steady_mean, strong.steady_mean
    );
    Ok(())
}
