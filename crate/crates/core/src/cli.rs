//! The `qns` command line: flags over a TOML run configuration, one
//! subcommand per experiment, artifacts written to the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error. Failures
//! print a single JSON line on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentKind, Grid, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    dataset_table, disorder_sweep_record, generate_dataset, imbalance_record, level_stats_record,
    ramping_record, run_classification_experiment, run_probe_experiment, time_sweep_record,
    ExperimentRecord,
};
use crate::lattice::LatticeSpec;
use crate::output::Table;
use crate::qnn::{accuracy, classify, prepare_all, BatchMode, GradientMode, Label, TrainedModel};
use crate::seed::derive_seed;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "QNS_THREADS";
pub const CONFIG_FILE: &str = "config.toml";
pub const RECORD_FILE: &str = "record.json";
pub const MODEL_FILE: &str = "model.json";

#[derive(Debug, Parser)]
#[command(name = "qns", version, about = "Disordered XY lattice simulation and QNN phase classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Disorder-averaged imbalance after a Neel quench
    Imbalance(Overrides),
    /// Mean gap ratio of the Neel sector versus h/g
    LevelStats(Overrides),
    /// Train the classifier and evaluate it on a test set
    Train(Overrides),
    /// Apply a trained model (--model) to a fresh labelled dataset
    Classify(Overrides),
    /// P(localized) of a trained model versus h/g
    SweepDisorder(Overrides),
    /// Classifier outputs versus preparation time, plus retraining at several t0
    SweepTime(Overrides),
    /// Probe-qubit variant of training with a calibrated threshold
    Probe(Overrides),
    /// Fidelity of finite detuning ramps against instant ones
    Ramping(Overrides),
    /// Write the training and test recipes without running anything
    Dataset(Overrides),
}

impl Command {
    fn split(&self) -> (ExperimentKind, &Overrides) {
        use ExperimentKind as K;
        match self {
            Command::Imbalance(o) => (K::Imbalance, o),
            Command::LevelStats(o) => (K::LevelStats, o),
            Command::Train(o) => (K::Train, o),
            Command::Classify(o) => (K::Classify, o),
            Command::SweepDisorder(o) => (K::SweepDisorder, o),
            Command::SweepTime(o) => (K::SweepTime, o),
            Command::Probe(o) => (K::Probe, o),
            Command::Ramping(o) => (K::Ramping, o),
            Command::Dataset(o) => (K::Dataset, o),
        }
    }
}

/// Flags; each overrides the matching config-file value. Context-dependent
/// flags (`--realizations`, `--h-over-g`, `--times`, `--h-mhz`) apply to the
/// section of the running subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,

    /// Lattice TOML file (replaces the [lattice] table)
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub g_mhz: Option<f64>,
    /// Readout qubit (active-site index)
    #[arg(long)]
    pub readout: Option<usize>,

    /// Trained model JSON
    #[arg(long)]
    pub model: Option<PathBuf>,

    #[arg(long)]
    pub h_erg_mhz: Option<f64>,
    #[arg(long)]
    pub h_loc_mhz: Option<f64>,
    #[arg(long)]
    pub t_state_ns: Option<f64>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,

    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub t0_ns: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// paper-shift | chain-shift | finite-difference
    #[arg(long, value_parser = parse_kebab::<GradientMode>)]
    pub gradient_mode: Option<GradientMode>,
    /// full-batch | per-sample
    #[arg(long, value_parser = parse_kebab::<BatchMode>)]
    pub batch_mode: Option<BatchMode>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub calibrate_threshold: bool,
    #[arg(long)]
    pub init_candidates: Option<usize>,

    /// Enable readout noise with the default fidelities
    #[arg(long)]
    pub noise: bool,
    #[arg(long)]
    pub shots: Option<u64>,

    #[arg(long)]
    pub realizations: Option<usize>,
    /// start:stop:count, log:start:stop:count or a comma list
    #[arg(long)]
    pub h_over_g: Option<Grid>,
    /// start:stop:count, log:start:stop:count or a comma list
    #[arg(long)]
    pub times: Option<Grid>,
    /// Disorder strength(s) in MHz
    #[arg(long, value_delimiter = ',')]
    pub h_mhz: Option<Vec<f64>>,
    #[arg(long)]
    pub profiles: Option<usize>,
    #[arg(long)]
    pub samples_per_class: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub retrain_t0_ns: Option<Vec<f64>>,
    #[arg(long)]
    pub hold_ns: Option<f64>,
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

impl Overrides {
    /// Loads the config file (if any) and applies the flags on top.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        c.experiment = Some(kind);
        macro_rules! set {
            ($flag:expr => $($target:tt)+) => {
                if let Some(v) = $flag.clone() {
                    $($target)+ = v;
                }
            };
        }
        set!(self.output => c.output_dir);
        set!(self.seed => c.seed);
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        if self.lattice.is_some() {
            c.lattice_preset = self.lattice.clone();
        }
        c.resolve_preset()?;
        set!(self.rows => c.lattice.rows);
        set!(self.cols => c.lattice.cols);
        set!(self.g_mhz => c.lattice.coupling_mhz);
        if self.readout.is_some() {
            c.lattice.readout_index = self.readout;
        }
        if self.model.is_some() {
            c.model = self.model.clone();
        }
        set!(self.h_erg_mhz => c.dataset.h_erg_mhz);
        set!(self.h_loc_mhz => c.dataset.h_loc_mhz);
        set!(self.t_state_ns => c.dataset.t_state_ns);
        set!(self.n_train => c.dataset.n_train_per_class);
        set!(self.n_test => c.dataset.n_test_per_class);
        set!(self.epochs => c.training.epochs);
        set!(self.t0_ns => c.training.t0_ns);
        set!(self.layers => c.training.layers);
        set!(self.learning_rate => c.training.learning_rate);
        set!(self.gradient_mode => c.training.gradient_mode);
        set!(self.batch_mode => c.training.batch_mode);
        set!(self.threshold => c.training.threshold);
        set!(self.init_candidates => c.training.init_candidates);
        if self.calibrate_threshold {
            c.training.calibrate_threshold = true;
        }
        if self.noise || self.shots.is_some() {
            let mut n = c.noise.unwrap_or_default();
            set!(self.shots => n.shots);
            c.noise = Some(n);
        }

        use ExperimentKind as K;
        if let Some(r) = self.realizations {
            match kind {
                K::Imbalance => c.imbalance.realizations = r,
                K::LevelStats => c.level_stats.realizations = r,
                K::SweepDisorder => c.sweep_disorder.level_stats_realizations = r,
                K::Ramping => c.ramping.realizations = r,
                _ => return Err(flag_error("realizations", kind)),
            }
        }
        if let Some(g) = &self.h_over_g {
            match kind {
                K::LevelStats => c.level_stats.h_over_g = g.clone(),
                K::SweepDisorder => c.sweep_disorder.h_over_g = g.clone(),
                _ => return Err(flag_error("h-over-g", kind)),
            }
        }
        if let Some(g) = &self.times {
            match kind {
                K::Imbalance => c.imbalance.times_ns = g.clone(),
                K::SweepTime => c.sweep_time.times_ns = g.clone(),
                K::Ramping => c.ramping.ramp_ns = g.clone(),
                _ => return Err(flag_error("times", kind)),
            }
        }
        if let Some(h) = &self.h_mhz {
            match (kind, h.as_slice()) {
                (K::Imbalance, _) => c.imbalance.h_mhz = h.clone(),
                (K::Ramping, [x]) => c.ramping.h_mhz = *x,
                _ => return Err(flag_error("h-mhz", kind)),
            }
        }
        // single-section flags
        let only = |flag: &str, set: bool, for_kind: ExperimentKind| {
            if set && kind != for_kind {
                Err(flag_error(flag, kind))
            } else {
                Ok(())
            }
        };
        only("profiles", self.profiles.is_some(), K::SweepDisorder)?;
        only("samples-per-class", self.samples_per_class.is_some(), K::SweepTime)?;
        only("retrain-t0-ns", self.retrain_t0_ns.is_some(), K::SweepTime)?;
        only("hold-ns", self.hold_ns.is_some(), K::Ramping)?;
        set!(self.profiles => c.sweep_disorder.profiles_per_point);
        set!(self.samples_per_class => c.sweep_time.samples_per_class);
        set!(self.retrain_t0_ns => c.sweep_time.retrain_t0_ns);
        set!(self.hold_ns => c.ramping.hold_ns);
        c.validate()?;
        Ok(c)
    }
}

fn flag_error(flag: &str, kind: ExperimentKind) -> Error {
    Error::Config {
        key: flag.to_string(),
        message: format!("flag --{flag} does not apply to `{}`", kind.as_str()),
    }
}

/// Thread count: config/flag, then `QNS_THREADS`, then all cores.
pub fn thread_count(config: &RunConfig) -> Result<Option<usize>> {
    if config.threads.is_some() {
        return Ok(config.threads);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config {
                key: THREADS_ENV.into(),
                message: format!("expected a positive integer, got `{v}`"),
            }),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `config.experiment` inside a pool of the configured size and writes
/// the resolved config, the record and every table. Returns written paths.
pub fn dispatch(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let kind = config.experiment.ok_or_else(|| Error::Config {
        key: "experiment".into(),
        message: "no experiment selected".into(),
    })?;
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(config)? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let (mut record, model) = pool.install(|| execute(kind, config))?;
    record.config = serde_json::to_value(config)?;

    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, config.to_toml_string()?)?;
    written.push(path);
    for t in &record.tables {
        written.push(t.save(dir)?);
    }
    if let Some(m) = model {
        let path = dir.join(MODEL_FILE);
        fs::write(&path, m.to_json()?)?;
        written.push(path);
    }
    let path = dir.join(RECORD_FILE);
    fs::write(&path, record.to_json()?)?;
    written.push(path);
    Ok(written)
}

fn load_model(path: &Path, lattice: &LatticeSpec) -> Result<TrainedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        key: "model".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    let model = TrainedModel::from_json(&text)?;
    if model.params.num_qubits != lattice.num_qubits() {
        return Err(Error::Config {
            key: "model".into(),
            message: format!(
                "model has {} qubits, lattice has {}",
                model.params.num_qubits,
                lattice.num_qubits()
            ),
        });
    }
    Ok(model)
}

/// The model a sweep uses: `--model` when given, otherwise one trained here
/// (and written alongside the results).
fn sweep_model(config: &RunConfig, lattice: &LatticeSpec) -> Result<(TrainedModel, bool)> {
    match &config.model {
        Some(p) => Ok((load_model(p, lattice)?, false)),
        None => {
            let out = run_classification_experiment(lattice, &config.classification(), config.seed)?;
            Ok((out.model, true))
        }
    }
}

fn execute(kind: ExperimentKind, c: &RunConfig) -> Result<(ExperimentRecord, Option<TrainedModel>)> {
    use ExperimentKind as K;
    let lattice = c.build_lattice()?;
    let seed = c.seed;
    Ok(match kind {
        K::Imbalance => (
            imbalance_record(
                &lattice,
                &c.imbalance.h_mhz,
                &c.imbalance.times_ns.values(),
                c.imbalance.realizations,
                seed,
            )?,
            None,
        ),
        K::LevelStats => (
            level_stats_record(
                &lattice,
                &c.level_stats.h_over_g.values(),
                c.level_stats.realizations,
                seed,
            )?,
            None,
        ),
        K::Train => {
            let out = run_classification_experiment(&lattice, &c.classification(), seed)?;
            (out.record, Some(out.model))
        }
        K::Probe => {
            let out = run_probe_experiment(&lattice, &c.classification(), seed)?;
            (out.record, Some(out.model))
        }
        K::Classify => {
            let path = c.model.as_ref().ok_or_else(|| Error::Config {
                key: "model".into(),
                message: "`classify` needs a trained model (--model)".into(),
            })?;
            let model = load_model(path, &lattice)?;
            (classify_record(&model, &lattice, c)?, None)
        }
        K::SweepDisorder => {
            let (model, fresh) = sweep_model(c, &lattice)?;
            let rec = disorder_sweep_record(&model, &lattice, &c.disorder_sweep(), seed)?;
            (rec, fresh.then_some(model))
        }
        K::SweepTime => {
            let (model, fresh) = sweep_model(c, &lattice)?;
            let rec = time_sweep_record(&model, &lattice, &c.time_sweep(), &c.classification(), seed)?;
            (rec, fresh.then_some(model))
        }
        K::Ramping => (ramping_record(&lattice, &c.ramping(), seed)?, None),
        K::Dataset => {
            let started = std::time::Instant::now();
            let d = &c.dataset;
            let mut rec = ExperimentRecord::new("dataset", seed, d)?;
            let mut make = |n: usize, stream: &str| -> Result<()> {
                if n > 0 {
                    let set = generate_dataset(
                        &lattice,
                        n,
                        d.h_erg_mhz,
                        d.h_loc_mhz,
                        d.t_state_ns,
                        derive_seed(seed, stream, 0),
                    )?;
                    rec.tables.push(dataset_table(&stream.replace('-', "_"), &set));
                }
                Ok(())
            };
            make(d.n_train_per_class, "train-set")?;
            make(d.n_test_per_class, "test-set")?;
            rec.set("n_train", d.n_train_per_class * 2);
            rec.set("n_test", d.n_test_per_class * 2);
            (rec.finish(started), None)
        }
    })
}

fn classify_record(model: &TrainedModel, lattice: &LatticeSpec, c: &RunConfig) -> Result<ExperimentRecord> {
    let started = std::time::Instant::now();
    let d = &c.dataset;
    let mut rec = ExperimentRecord::new("classify", c.seed, d)?;
    let set = generate_dataset(
        lattice,
        d.n_test_per_class.max(1),
        d.h_erg_mhz,
        d.h_loc_mhz,
        d.t_state_ns,
        derive_seed(c.seed, "classify-set", 0),
    )?;
    let states = prepare_all(lattice, &set)?;
    let probs = model.probabilities(lattice, &states)?;
    let observed = match &c.noise {
        Some(n) => n.observe_all(&probs)?,
        None => probs.clone(),
    };
    let labels: Vec<Label> = set.iter().map(|s| s.label).collect();
    let mut t = Table::new("classify", &["index", "label", "h_mhz", "p", "p_observed", "predicted"]);
    for (i, s) in set.iter().enumerate() {
        t.push(vec![
            i.into(),
            s.label.as_str().into(),
            s.h_mhz.into(),
            probs[i].into(),
            observed[i].into(),
            classify(observed[i], model.threshold).as_str().into(),
        ]);
    }
    rec.set("accuracy", accuracy(&observed, &labels, model.threshold));
    rec.set("threshold", model.threshold);
    rec.tables.push(t);
    Ok(rec.finish(started))
}

fn report(e: &Error) -> ExitCode {
    let (kind, code, key) = match e {
        Error::Config { key, .. } => ("config", 2, Some(key.clone())),
        _ => ("runtime", 3, None),
    };
    let line = serde_json::json!({ "error": kind, "key": key, "message": e.to_string() });
    eprintln!("{line}");
    ExitCode::from(code)
}

/// Entry point used by the `qns` binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, overrides) = cli.command.split();
    let config = match overrides.resolve(kind) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    match dispatch(&config) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => report(&e),
    }
}
