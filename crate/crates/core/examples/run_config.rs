//! Drive an experiment from a TOML run configuration, exactly as the `qns`
//! binary does, and list the artifacts it writes.
//!
//! ```bash
//! cargo run --release -p qns-core --example run_config [out_dir]
//! ```

use qns::cli::dispatch;
use qns::config::{ExperimentKind, RunConfig};

const CONFIG: &str = r#"
seed = 5

[lattice]
rows = 2
cols = 3

[level_stats]
h_over_g = "0.5:12:8"
realizations = 50
"#;

fn main() -> qns::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("qns-run-config").display().to_string());
    let mut config = RunConfig::from_toml_str(CONFIG)?;
    config.experiment = Some(ExperimentKind::LevelStats);
    config.output_dir = out.into();
    for path in dispatch(&config)? {
        println!("{}", path.display());
    }
    println!("--- resolved config ---\n{}", config.to_toml_string()?);
    Ok(())
}
