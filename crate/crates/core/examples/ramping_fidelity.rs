//! How much a finite ramp between idle detunings and the working point
//! disturbs the measured distribution, against an instant ramp.
//!
//! ```bash
//! cargo run --release -p qns-core --example ramping_fidelity
//! ```

use qns::experiments::{run_ramping_study, RampingConfig};
use qns::lattice::LatticeSpec;

fn main() -> qns::Result<()> {
    let lattice = LatticeSpec::grid(3, 3, 2.185)?;
    let config = RampingConfig {
        ramp_grid_ns: vec![0.0, 2.0, 4.0, 10.0, 20.0, 50.0, 100.0],
        realizations: 3,
        ..Default::default()
    };
    println!("{:>8} {:>10} {:>10}", "ramp_ns", "F_mean", "F_min");
    for p in run_ramping_study(&lattice, &config, 1)? {
        println!("{:8.1} {:10.5} {:10.5}", p.t_ramp_ns, p.fidelity_mean, p.fidelity_min);
    }
    Ok(())
}
