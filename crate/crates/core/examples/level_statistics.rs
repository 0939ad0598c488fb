//! Mean gap ratio of the 3x3 Neel sector against disorder strength.
//!
//! ```bash
//! cargo run --release -p qns-core --example level_statistics
//! ```

use qns::lattice::LatticeSpec;
use qns::spectral::neel_sector_sweep;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let grid: Vec<f64> = (0..20).map(|i| 0.5 + i as f64 * (18.0 - 0.5) / 19.0).collect();
    let curve = neel_sector_sweep(&lattice, &grid, 200, 2021)?;
    println!("{:>8} {:>8} {:>8}", "h/g", "r_mean", "stderr");
    for p in &curve {
        println!("{:8.3} {:8.4} {:8.4}", p.h_over_g, p.r_mean, p.r_stderr);
    }
    Ok(())
}
