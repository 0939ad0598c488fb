use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::output::Table;
use crate::qnn::{Label, LabeledSample, PrepMode};
use crate::seed::derive_seed;

/// Class definitions and dataset sizes shared by the training pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub h_erg_mhz: f64,
    pub h_loc_mhz: f64,
    pub t_state_ns: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_train_per_class: 10,
            n_test_per_class: 25,
            h_erg_mhz: 1.0,
            h_loc_mhz: 50.0,
            t_state_ns: 200.0,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::Config {
                key: format!("dataset.{key}"),
                message,
            })
        };
        if self.n_train_per_class == 0 {
            return bad("n_train_per_class", "must be >= 1".into());
        }
        for (key, h) in [("h_erg_mhz", self.h_erg_mhz), ("h_loc_mhz", self.h_loc_mhz)] {
            if !(h >= 0.0 && h.is_finite()) {
                return bad(key, format!("must be a non-negative number, got {h}"));
            }
        }
        if !(self.t_state_ns >= 0.0 && self.t_state_ns.is_finite()) {
            return bad("t_state_ns", format!("must be non-negative, got {}", self.t_state_ns));
        }
        Ok(())
    }
}

/// `n_per_class` recipes per class, alternating ergodic / localized. Sample
/// `i` of a class draws its disorder from `(seed, "<class>", i)`.
pub fn generate_dataset(
    lattice: &LatticeSpec,
    n_per_class: usize,
    h_erg_mhz: f64,
    h_loc_mhz: f64,
    t_state_ns: f64,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    generate_with_prep(lattice, n_per_class, h_erg_mhz, h_loc_mhz, t_state_ns, seed, PrepMode::Full)
}

pub(crate) fn generate_with_prep(
    lattice: &LatticeSpec,
    n_per_class: usize,
    h_erg_mhz: f64,
    h_loc_mhz: f64,
    t_state_ns: f64,
    seed: u64,
    prep: PrepMode,
) -> Result<Vec<LabeledSample>> {
    let _ = lattice;
    if n_per_class == 0 {
        return Err(Error::InvalidArgument("n_per_class must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(2 * n_per_class);
    for i in 0..n_per_class as u64 {
        for (label, h) in [(Label::Ergodic, h_erg_mhz), (Label::Localized, h_loc_mhz)] {
            out.push(LabeledSample {
                label,
                h_mhz: h,
                disorder_seed: derive_seed(seed, label.as_str(), i),
                t_state_ns,
                prep,
            });
        }
    }
    Ok(out)
}

/// Recipes as a table (one row per sample).
pub fn dataset_table(name: &str, samples: &[LabeledSample]) -> Table {
    let mut t = Table::new(
        name,
        &["index", "label", "h_mhz", "disorder_seed", "t_state_ns", "probe_qubit"],
    );
    for (i, s) in samples.iter().enumerate() {
        let probe = match s.prep {
            PrepMode::Full => "".into(),
            PrepMode::Probe { qubit } => qubit.into(),
        };
        t.push(vec![
            i.into(),
            s.label.as_str().into(),
            s.h_mhz.into(),
            s.disorder_seed.into(),
            s.t_state_ns.into(),
            probe,
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_balance() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let d = generate_dataset(&l, 10, 1.0, 50.0, 200.0, 4).unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d.iter().filter(|s| s.label == Label::Ergodic).count(), 10);
        assert!(d.iter().all(|s| s.t_state_ns == 200.0));
        assert!(d
            .iter()
            .all(|s| s.h_mhz == if s.label == Label::Ergodic { 1.0 } else { 50.0 }));
        assert_eq!(d, generate_dataset(&l, 10, 1.0, 50.0, 200.0, 4).unwrap());
        let other = generate_dataset(&l, 10, 1.0, 50.0, 200.0, 5).unwrap();
        assert_ne!(d[0].disorder_seed, other[0].disorder_seed);
        assert!(generate_dataset(&l, 0, 1.0, 50.0, 200.0, 4).is_err());
    }
}
