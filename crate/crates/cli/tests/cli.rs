use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use considerate_core::analysis::{PosteriorSummary, TrialMetrics};
use considerate_core::sim::log::read_manifest;
use considerate_core::sim::TrajectoryLog;

fn considerate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_considerate"))
        .args(args)
        .env_remove("CONSIDERATE_OUT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn only_log(dir: &Path) -> TrajectoryLog {
    let name = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.unwrap().file_name().into_string().ok())
        .find_map(|n| n.strip_suffix(".meta.json").map(str::to_string))
        .expect("a log");
    TrajectoryLog::read(dir, &name).unwrap()
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_orders_rejection_by_robot_consideration() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a_void = Vec::new();
    for psi in ["0.001", "0.01"] {
        let out = tmp.path().join(psi);
        let o = considerate(&[
            "simulate",
            "--scenario",
            "rejection",
            "--psi-robot",
            psi,
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let log = only_log(&out);
        assert!(out.join(format!("{}.trajectory.csv", log.meta.name)).exists());
        assert!(out.join("run_config.toml").exists());
        a_void.push(TrialMetrics::from_log(&log, 0).mean_a_void().unwrap());
    }
    assert!(a_void[0] > a_void[1], "{a_void:?}");
}

#[test]
fn experiment_then_analyze_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    let runs_s = runs.to_str().unwrap();
    let o = considerate(&["experiment", "--trials", "20", "--base-seed", "100", "--out", runs_s]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = read_manifest(&runs).unwrap();
    assert_eq!(manifest.len(), 80);
    for e in &manifest {
        assert!(runs.join(format!("{}.jsonl", e.log)).exists());
    }

    // Same inputs, same bytes.
    let again = tmp.path().join("again");
    let o = considerate(&[
        "experiment",
        "--trials",
        "20",
        "--base-seed",
        "100",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let strip = |files: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        files.into_iter().filter(|(n, _)| n != "run_config.toml").collect()
    };
    assert_eq!(strip(dir_files(&runs)), strip(dir_files(&again)));

    let analyze = |out: &Path| {
        considerate(&[
            "analyze",
            "--in",
            runs_s,
            "--out",
            out.to_str().unwrap(),
            "--metric",
            "avoid",
            "--mcmc-chains",
            "4",
            "--mcmc-length",
            "10000",
            "--burn-in",
            "5000",
        ])
    };
    let first = tmp.path().join("analysis1");
    let second = tmp.path().join("analysis2");
    let o = analyze(&first);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&analyze(&second)), 0);
    let strip_cfg = |files: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        files.into_iter().filter(|(n, _)| n != "analysis_config.toml").collect()
    };
    assert_eq!(strip_cfg(dir_files(&first)), strip_cfg(dir_files(&second)));

    let post: PosteriorSummary =
        serde_json::from_str(&fs::read_to_string(first.join("posterior.json")).unwrap()).unwrap();
    assert_eq!(post.retained_draws, 20_000);
    assert_eq!(post.conditions.len(), 4);

    let csv = fs::read_to_string(first.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("trial,condition,task,metric,value\n"));
    assert_eq!(csv.lines().filter(|l| l.contains(",path_length,")).count(), 800);
    let anova: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.join("anova.json")).unwrap()).unwrap();
    assert_eq!(anova["df_between"], 3);
    assert_eq!(anova["df_within"], 76);

    // Report reads logs plus analysis outputs from one directory.
    for f in ["anova.json", "pairwise.json", "posterior.json"] {
        fs::copy(first.join(f), runs.join(f)).unwrap();
    }
    let report_file = tmp.path().join("report.md");
    let o = considerate(&["report", "--in", runs_s, "--out", report_file.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(fs::read_to_string(&report_file).unwrap(), text);
    assert_eq!(text.matches("| random_walk | 20 |").count(), 1, "{text}");
    for needle in ["psi_0.001", "One-way ANOVA", "Holm", "P(beta1 > 0)"] {
        assert!(text.contains(needle), "report lacks {needle}:\n{text}");
    }
}

#[test]
fn analyze_path_metric_skips_the_trend_model() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    let runs_s = runs.to_str().unwrap();
    let o = considerate(&["experiment", "--scenario", "approach", "--trials", "3", "--out", runs_s]);
    assert_eq!(code(&o), 0);
    let o = considerate(&["analyze", "--in", runs_s, "--metric", "path", "--permutations", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(runs.join("anova.json").exists());
    assert!(!runs.join("posterior.json").exists());
}

#[test]
fn config_file_and_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "scenario = \"approach\"\ncondition = \"random_walk\"\nseed = 4\nout = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = considerate(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let log = only_log(&out);
    assert_eq!(log.meta.name, "approaching_random_walk_s9");
    let resolved = fs::read_to_string(out.join("run_config.toml")).unwrap();
    assert!(resolved.contains("seed = 9"), "{resolved}");
}

#[test]
fn output_directory_defaults_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_considerate"))
        .args(["simulate", "--seed", "2"])
        .env("CONSIDERATE_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("rejecting_psi_0.001_s2.meta.json").exists());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    assert_eq!(code(&considerate(&["--help"])), 0);
    assert_eq!(code(&considerate(&["frobnicate"])), 1);
    assert_eq!(code(&considerate(&["simulate", "--sed", "3"])), 1);
    let out = t.join("x");
    let out_s = out.to_str().unwrap();
    assert_eq!(code(&considerate(&["simulate", "--psi-robot", "0.02", "--out", out_s])), 1);
    assert_eq!(code(&considerate(&["experiment", "--trials", "0", "--out", out_s])), 1);

    let bad_cfg = t.join("bad.toml");
    fs::write(&bad_cfg, "sead = 3\n").unwrap();
    let o = considerate(&["simulate", "--config", bad_cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sead"));
    assert_eq!(code(&considerate(&["simulate", "--config", t.join("missing.toml").to_str().unwrap()])), 2);

    let missing = t.join("missing");
    assert_eq!(code(&considerate(&["analyze", "--in", missing.to_str().unwrap()])), 2);
    assert_eq!(code(&considerate(&["report", "--in", missing.to_str().unwrap()])), 2);

    // A single log cannot support an ANOVA: a warning normally, a failure with --strict.
    let one = t.join("one");
    let one_s = one.to_str().unwrap();
    assert_eq!(code(&considerate(&["simulate", "--out", one_s])), 0);
    let args = ["analyze", "--in", one_s, "--mcmc-length", "400", "--burn-in", "200"];
    assert_eq!(code(&considerate(&args)), 0);
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&considerate(&strict)), 3);
}
