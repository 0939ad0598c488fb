//! Run configuration: a TOML document with one table per concern. Every
//! field has a default, so an empty file is a valid configuration; unknown
//! keys are rejected.
//!
//! ```toml
//! seed = 7
//! [lattice]
//! rows = 4
//! cols = 4
//! [training]
//! epochs = 40
//! [level_stats]
//! h_over_g = "0.5:18:20"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    ClassificationConfig, DatasetConfig, DisorderSweepConfig, NoiseModel, RampingConfig,
    TimeSweepConfig,
};
use crate::lattice::{LatticeConfig, LatticeSpec};
use crate::qnn::TrainingConfig;

/// A list of grid values: `start:stop:count` (linear, endpoints included),
/// `log:start:stop:count` (geometric) or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Linear { start: f64, stop: f64, count: usize },
    Log { start: f64, stop: f64, count: usize },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Linear { start, stop, count } => spaced(start, stop, count, |x| x, |x| x),
            Grid::Log { start, stop, count } => spaced(start, stop, count, f64::ln, f64::exp),
            Grid::List(ref v) => v.clone(),
        }
    }
}

fn spaced(start: f64, stop: f64, count: usize, to: fn(f64) -> f64, from: fn(f64) -> f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    from(to(start) + (to(stop) - to(start)) * i as f64 / (count - 1) as f64)
                }
            })
            .collect(),
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let num = |x: &str| -> std::result::Result<f64, String> {
            x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number"))
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let (log, rest) = match parts.as_slice() {
                ["log", rest @ ..] => (true, rest),
                rest => (false, rest),
            };
            let [a, b, n] = rest else {
                return Err(format!("expected start:stop:count or log:start:stop:count, got `{s}`"));
            };
            let (start, stop) = (num(a)?, num(b)?);
            let count: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a count"))?;
            if !start.is_finite() || !stop.is_finite() {
                return Err(format!("range bounds must be finite in `{s}`"));
            }
            if log {
                if !(start > 0.0 && stop > 0.0) {
                    return Err(format!("log range needs positive bounds, got `{s}`"));
                }
                Ok(Grid::Log { start, stop, count })
            } else {
                Ok(Grid::Linear { start, stop, count })
            }
        } else if s.is_empty() {
            Ok(Grid::List(Vec::new()))
        } else {
            s.split(',').map(num).collect::<std::result::Result<_, _>>().map(Grid::List)
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Linear { start, stop, count } => write!(f, "{start}:{stop}:{count}"),
            Grid::Log { start, stop, count } => write!(f, "log:{start}:{stop}:{count}"),
            Grid::List(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GridRepr {
    Text(String),
    List(Vec<f64>),
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Grid::List(v) => GridRepr::List(v.clone()),
            other => GridRepr::Text(other.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match GridRepr::deserialize(d)? {
            GridRepr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            GridRepr::List(v) => Ok(Grid::List(v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Imbalance,
    LevelStats,
    Train,
    Classify,
    SweepDisorder,
    SweepTime,
    Probe,
    Ramping,
    Dataset,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Imbalance => "imbalance",
            ExperimentKind::LevelStats => "level-stats",
            ExperimentKind::Train => "train",
            ExperimentKind::Classify => "classify",
            ExperimentKind::SweepDisorder => "sweep-disorder",
            ExperimentKind::SweepTime => "sweep-time",
            ExperimentKind::Probe => "probe",
            ExperimentKind::Ramping => "ramping",
            ExperimentKind::Dataset => "dataset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImbalanceSection {
    pub h_mhz: Vec<f64>,
    pub times_ns: Grid,
    pub realizations: usize,
}

impl Default for ImbalanceSection {
    fn default() -> Self {
        ImbalanceSection {
            h_mhz: vec![0.0, 1.0, 50.0],
            times_ns: Grid::Linear {
                start: 0.0,
                stop: 500.0,
                count: 101,
            },
            realizations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelStatsSection {
    pub h_over_g: Grid,
    pub realizations: usize,
}

impl Default for LevelStatsSection {
    fn default() -> Self {
        LevelStatsSection {
            h_over_g: Grid::Linear {
                start: 0.5,
                stop: 18.0,
                count: 20,
            },
            realizations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepDisorderSection {
    pub h_over_g: Grid,
    pub profiles_per_point: usize,
    /// Realizations for the companion gap-ratio curve; 0 skips it.
    pub level_stats_realizations: usize,
}

impl Default for SweepDisorderSection {
    fn default() -> Self {
        SweepDisorderSection {
            h_over_g: Grid::Linear {
                start: 0.46,
                stop: 18.3,
                count: 20,
            },
            profiles_per_point: 50,
            level_stats_realizations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepTimeSection {
    pub times_ns: Grid,
    pub samples_per_class: usize,
    pub retrain_t0_ns: Vec<f64>,
}

impl Default for SweepTimeSection {
    fn default() -> Self {
        SweepTimeSection {
            times_ns: Grid::Log {
                start: 6.0,
                stop: 501.0,
                count: 20,
            },
            samples_per_class: 25,
            retrain_t0_ns: vec![100.0, 200.0, 300.0, 400.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RampingSection {
    pub ramp_ns: Grid,
    pub hold_ns: f64,
    pub idle_offset_mhz: f64,
    pub idle_offsets_mhz: Option<Vec<f64>>,
    pub h_mhz: f64,
    pub realizations: usize,
}

impl Default for RampingSection {
    fn default() -> Self {
        let d = RampingConfig::default();
        RampingSection {
            ramp_ns: Grid::Linear {
                start: 0.0,
                stop: 100.0,
                count: 26,
            },
            hold_ns: d.hold_ns,
            idle_offset_mhz: d.idle_offset_mhz,
            idle_offsets_mhz: None,
            h_mhz: d.h_mhz,
            realizations: d.realizations,
        }
    }
}

/// Everything one `qns` invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: Option<ExperimentKind>,
    /// Master seed; every random stream of the run derives from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; unset uses `QNS_THREADS` or all cores.
    pub threads: Option<usize>,
    /// Lattice file to load instead of the inline `[lattice]` table.
    pub lattice_preset: Option<PathBuf>,
    /// Trained model consumed by `classify` and the sweeps; without one the
    /// sweeps train their own first.
    pub model: Option<PathBuf>,
    pub lattice: LatticeConfig,
    pub dataset: DatasetConfig,
    pub training: TrainingConfig,
    pub noise: Option<NoiseModel>,
    pub imbalance: ImbalanceSection,
    pub level_stats: LevelStatsSection,
    pub sweep_disorder: SweepDisorderSection,
    pub sweep_time: SweepTimeSection,
    pub ramping: RampingSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: None,
            seed: 2021,
            output_dir: PathBuf::from("qns-out"),
            threads: None,
            lattice_preset: None,
            model: None,
            lattice: LatticeConfig::default(),
            dataset: DatasetConfig::default(),
            training: TrainingConfig::default(),
            noise: None,
            imbalance: ImbalanceSection::default(),
            level_stats: LevelStatsSection::default(),
            sweep_disorder: SweepDisorderSection::default(),
            sweep_time: SweepTimeSection::default(),
            ramping: RampingSection::default(),
        }
    }
}

fn config_error(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl RunConfig {
    /// Parses TOML text. Errors name the offending key as a dotted path.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("<syntax>", e.message()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            config_error(key, e.into_inner().message())
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("<file>", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        // presets are resolved relative to the config file
        if let (Some(p), Some(dir)) = (&cfg.lattice_preset, path.parent()) {
            if p.is_relative() {
                cfg.lattice_preset = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_error("<emit>", e.to_string()))
    }

    /// Inlines the lattice preset so the config stands on its own.
    pub fn resolve_preset(&mut self) -> Result<()> {
        if let Some(p) = self.lattice_preset.take() {
            self.lattice = LatticeConfig::load(&p).map_err(|e| match e {
                Error::Config { key, message } => {
                    config_error(format!("lattice_preset:{key}"), message)
                }
                other => config_error("lattice_preset", format!("{}: {other}", p.display())),
            })?;
        }
        Ok(())
    }

    pub fn build_lattice(&self) -> Result<LatticeSpec> {
        self.lattice
            .build()
            .map_err(|e| config_error("lattice", e.to_string()))
    }

    /// Checks every constraint that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        self.build_lattice()?;
        self.classification().validate()?;
        if self.threads == Some(0) {
            return Err(config_error("threads", "must be >= 1"));
        }
        let positive = |key: &str, n: usize| {
            if n == 0 {
                Err(config_error(key, "must be >= 1"))
            } else {
                Ok(())
            }
        };
        positive("imbalance.realizations", self.imbalance.realizations)?;
        positive("level_stats.realizations", self.level_stats.realizations)?;
        positive("sweep_disorder.profiles_per_point", self.sweep_disorder.profiles_per_point)?;
        positive("sweep_time.samples_per_class", self.sweep_time.samples_per_class)?;
        positive("ramping.realizations", self.ramping.realizations)?;
        let sorted = |key: &str, v: &[f64]| {
            if v.iter().any(|t| !(*t >= 0.0)) || v.windows(2).any(|w| w[1] < w[0]) {
                Err(config_error(key, "must be non-negative and ascending"))
            } else {
                Ok(())
            }
        };
        sorted("imbalance.times_ns", &self.imbalance.times_ns.values())?;
        sorted("sweep_time.times_ns", &self.sweep_time.times_ns.values())?;
        sorted("ramping.ramp_ns", &self.ramping.ramp_ns.values())?;
        if self.imbalance.h_mhz.iter().any(|h| !(*h >= 0.0)) {
            return Err(config_error("imbalance.h_mhz", "must be non-negative"));
        }
        for (key, g) in [
            ("level_stats.h_over_g", &self.level_stats.h_over_g),
            ("sweep_disorder.h_over_g", &self.sweep_disorder.h_over_g),
        ] {
            if g.values().iter().any(|h| !(*h >= 0.0)) {
                return Err(config_error(key, "must be non-negative"));
            }
        }
        if !(self.ramping.hold_ns >= 0.0) {
            return Err(config_error("ramping.hold_ns", "must be non-negative"));
        }
        Ok(())
    }

    pub fn classification(&self) -> ClassificationConfig {
        ClassificationConfig {
            dataset: self.dataset.clone(),
            training: self.training.clone(),
            noise: self.noise,
        }
    }

    pub fn disorder_sweep(&self) -> DisorderSweepConfig {
        DisorderSweepConfig {
            h_over_g: self.sweep_disorder.h_over_g.values(),
            profiles_per_point: self.sweep_disorder.profiles_per_point,
            t_state_ns: self.dataset.t_state_ns,
            level_stats_realizations: self.sweep_disorder.level_stats_realizations,
        }
    }

    pub fn time_sweep(&self) -> TimeSweepConfig {
        TimeSweepConfig {
            t_grid_ns: self.sweep_time.times_ns.values(),
            samples_per_class: self.sweep_time.samples_per_class,
            h_erg_mhz: self.dataset.h_erg_mhz,
            h_loc_mhz: self.dataset.h_loc_mhz,
            retrain_t0_ns: self.sweep_time.retrain_t0_ns.clone(),
        }
    }

    pub fn ramping(&self) -> RampingConfig {
        RampingConfig {
            ramp_grid_ns: self.ramping.ramp_ns.values(),
            hold_ns: self.ramping.hold_ns,
            idle_offset_mhz: self.ramping.idle_offset_mhz,
            idle_offsets_mhz: self.ramping.idle_offsets_mhz.clone(),
            h_mhz: self.ramping.h_mhz,
            realizations: self.ramping.realizations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_defaults() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.lattice.rows, c.lattice.cols), (3, 3));
        assert_eq!(c.lattice.coupling_mhz, 2.185);
        assert_eq!((c.dataset.h_erg_mhz, c.dataset.h_loc_mhz), (1.0, 50.0));
        assert_eq!(c.dataset.t_state_ns, 200.0);
        assert_eq!(c.training.epochs, 25);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = RunConfig::from_toml_str("[training]\nepohcs = 3\n").unwrap_err();
        match e {
            Error::Config { key, .. } => assert_eq!(key, "training.epohcs"),
            other => panic!("{other}"),
        }
        let e = RunConfig::from_toml_str("sede = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { key, .. } if key == "sede"));
    }

    #[test]
    fn type_errors_are_named() {
        let e = RunConfig::from_toml_str("[dataset]\nh_loc_mhz = \"fifty\"\n").unwrap_err();
        assert!(matches!(e, Error::Config { key, .. } if key == "dataset.h_loc_mhz"));
    }

    #[test]
    fn constraint_errors_are_named() {
        let mut c = RunConfig::default();
        c.training.epochs = 0;
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key.contains("epochs")));
        let mut c = RunConfig::default();
        c.ramping.realizations = 0;
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "ramping.realizations"));
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.experiment = Some(ExperimentKind::SweepTime);
        c.seed = u64::MAX - 3;
        c.noise = Some(NoiseModel::default());
        c.imbalance.h_mhz = vec![0.0, 0.1 + 0.2];
        c.level_stats.h_over_g = Grid::List(vec![0.5, 1.0 / 3.0]);
        c.ramping.idle_offsets_mhz = Some(vec![1.0; 9]);
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(RunConfig::from_toml_str(&d.to_toml_string().unwrap()).unwrap(), d);
    }

    #[test]
    fn grid_syntax() {
        let g: Grid = "0.5:18:20".parse().unwrap();
        let v = g.values();
        assert_eq!((v.len(), v[0], v[19]), (20, 0.5, 18.0));
        let g: Grid = "log:6:501:20".parse().unwrap();
        let v = g.values();
        assert_eq!((v[0], v[19]), (6.0, 501.0));
        assert!((v[1] / v[0] - v[2] / v[1]).abs() < 1e-12);
        assert_eq!("1,2.5".parse::<Grid>().unwrap(), Grid::List(vec![1.0, 2.5]));
        assert!("1:2".parse::<Grid>().is_err());
        assert!("log:0:5:3".parse::<Grid>().is_err());
        assert_eq!("7:7:1".parse::<Grid>().unwrap().values(), vec![7.0]);
        for s in ["0.46:18.3:20", "log:6:501:20", "1,2.5"] {
            assert_eq!(s.parse::<Grid>().unwrap().to_string(), s);
        }
    }
}
