//! The `qns` binary: exit codes, error lines, output layout, determinism.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qns::config::RunConfig;

fn qns(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qns"))
        .args(args)
        .env_remove("QNS_THREADS")
        .output()
        .expect("spawn qns")
}

fn files(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect()
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    files(dir)
        .into_iter()
        .filter(|f| f.ends_with(".csv"))
        .map(|f| {
            let bytes = fs::read(dir.join(&f)).unwrap();
            (f, bytes)
        })
        .collect()
}

fn error_line(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    serde_json::from_str(lines[0]).unwrap()
}

#[test]
fn level_stats_writes_exactly_its_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ls");
    let o = qns(&[
        "level-stats", "--rows", "2", "--cols", "3", "--h-over-g", "1,10", "--realizations", "5",
        "-o", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let want: BTreeSet<String> = ["config.toml", "level_stats.csv", "record.json"]
        .map(String::from)
        .into();
    assert_eq!(files(&out), want);
    let csv = fs::read_to_string(out.join("level_stats.csv")).unwrap();
    assert!(csv.starts_with("h_over_g,r_mean,r_stderr,realizations,degenerate\n"));
    assert_eq!(csv.lines().count(), 3);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("record.json")).unwrap()).unwrap();
    assert_eq!(record["kind"], "level-stats");
    assert_eq!(record["config"]["lattice"]["cols"], 3);
}

#[test]
fn train_writes_model() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("train");
    let o = qns(&[
        "train", "--rows", "2", "--cols", "2", "--epochs", "3", "--n-train", "3", "--n-test", "3",
        "--init-candidates", "2", "-o", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = files(&out);
    for name in ["config.toml", "record.json", "model.json", "history.csv", "test_outputs.csv"] {
        assert!(f.contains(name), "{name} missing from {f:?}");
    }
    // the model feeds `classify`
    let model = out.join("model.json");
    let out2 = tmp.path().join("classify");
    let o = qns(&[
        "classify", "--rows", "2", "--cols", "2", "--model", model.to_str().unwrap(),
        "--n-test", "4", "-o", out2.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out2.join("classify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn misspelled_config_key_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[training]\nepohcs = 3\n").unwrap();
    let o = qns(&["train", "-c", cfg.to_str().unwrap(), "-o", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_line(&o);
    assert_eq!(e["error"], "config");
    assert_eq!(e["key"], "training.epohcs");
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn invalid_values_are_config_errors() {
    let o = qns(&["imbalance", "--rows", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "config");

    let o = qns(&["train", "--epochs", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o)["key"].as_str().unwrap().contains("epochs"));

    // flag that does not apply to the subcommand
    let o = qns(&["ramping", "--profiles", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2_help_exits_0() {
    assert_eq!(qns(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(qns(&["train", "--epochs", "many"]).status.code(), Some(2));
    assert_eq!(qns(&["--help"]).status.code(), Some(0));
}

#[test]
fn corrupt_model_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.json");
    fs::write(&model, "{not json").unwrap();
    let o = qns(&[
        "classify", "--model", model.to_str().unwrap(), "-o", tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_line(&o)["error"], "runtime");
}

#[test]
fn bad_thread_env_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_qns"))
        .args(["dataset", "-o"])
        .arg(tempfile::tempdir().unwrap().path().join("d"))
        .env("QNS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["key"], "QNS_THREADS");
}

#[test]
fn csvs_identical_across_thread_counts_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["imbalance", "--rows", "3", "--cols", "3", "--times", "0:300:7", "--realizations", "4"],
        &["train", "--rows", "2", "--cols", "3", "--epochs", "4", "--n-train", "4", "--n-test", "4",
          "--init-candidates", "3"],
        &["ramping", "--rows", "2", "--cols", "2", "--times", "0,4,20", "--realizations", "2",
          "--hold-ns", "50"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let dir = |tag: &str| tmp.path().join(format!("{k}-{tag}"));
        let run = |tag: &str, threads: &str| {
            let mut a = args.to_vec();
            let d = dir(tag);
            let d = d.to_str().unwrap().to_string();
            a.extend(["--seed", "77", "--threads", threads, "-o"]);
            let mut a: Vec<String> = a.into_iter().map(String::from).collect();
            a.push(d);
            let refs: Vec<&str> = a.iter().map(String::as_str).collect();
            let o = qns(&refs);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        };
        run("t1", "1");
        run("t2", "2");
        let first = csvs(&dir("t1"));
        assert!(!first.is_empty());
        assert_eq!(first, csvs(&dir("t2")), "{args:?}");

        // re-run from the emitted config alone
        let cfg = dir("t1").join("config.toml");
        let rerun = dir("rerun");
        let o = qns(&[args[0], "-c", cfg.to_str().unwrap(), "-o", rerun.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(first, csvs(&rerun), "{args:?}");

        let emitted = RunConfig::load(&cfg).unwrap();
        let again = RunConfig::load(rerun.join("config.toml")).unwrap();
        assert_eq!(emitted.seed, 77);
        assert_eq!(
            RunConfig { output_dir: again.output_dir.clone(), ..emitted },
            again
        );
    }
}
