//! Batch subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use considerate_core::analysis::{
    anova_raw, avoidance_trend_table, fit_hierarchical, metrics_csv, pairwise_comparisons,
    AnovaResult, GroupSummary, McmcConfig, PairwiseResult, PosteriorSummary, TrialMetrics,
};
use considerate_core::sim::log::{read_manifest, write_manifest, MANIFEST_FILE};
use considerate_core::sim::{run_experiment, run_trial, Condition, Target, TrajectoryLog};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{AnalyzeArgs, CliError, ExperimentArgs, Metric, ReportArgs, RunArgs, SimulateArgs};

pub const METRICS_FILE: &str = "metrics.csv";
pub const ANOVA_FILE: &str = "anova.json";
pub const PAIRWISE_FILE: &str = "pairwise.json";
pub const POSTERIOR_FILE: &str = "posterior.json";
pub const ANALYSIS_CONFIG_FILE: &str = "analysis_config.toml";
const META_SUFFIX: &str = ".meta.json";

fn resolve(run: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(run.config.as_deref())?;
    if let Some(s) = run.scenario {
        cfg.scenario = s;
    }
    if run.participant.is_some() {
        cfg.participant = run.participant;
    }
    if run.participant_psi.is_some() {
        cfg.participant_psi = run.participant_psi;
    }
    if run.out.is_some() {
        cfg.out = run.out.clone();
    }
    Ok(cfg)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("result serializes");
    write_file(path, &(text + "\n"))
}

fn target_label(target: Target) -> String {
    match target {
        Target::Pole { index } => format!("pole_{index}"),
        Target::Object => "object".into(),
    }
}

/// Plot data: one row per agent per tick.
pub fn trajectory_csv(log: &TrajectoryLog) -> String {
    let mut out = String::from("tick,t,task,target,agent,x,y,heading\n");
    for s in &log.samples {
        let t = s.tick as f64 * log.meta.tick_seconds;
        let target = target_label(s.target);
        for a in &s.agents {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.tick, t, s.task, target, a.id, a.x, a.y, a.heading
            );
        }
    }
    out
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.run)?;
    if let Some(c) = args.condition {
        cfg.condition = c;
    }
    if let Some(psi) = args.psi_robot {
        cfg.condition = Condition::from_psi(psi).ok_or_else(|| {
            CliError::Usage(format!(
                "--psi-robot {psi} is not a robot condition; use 0.001, 0.005 or 0.01"
            ))
        })?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let trial = cfg.trial_config()?;
    let out = cfg.out_dir();
    let log = run_trial(&trial, cfg.seed);
    log.write(&out)?;
    let csv = out.join(format!("{}.trajectory.csv", log.meta.name));
    write_file(&csv, &trajectory_csv(&log))?;
    cfg.write_resolved(&out)?;

    let m = TrialMetrics::from_log(&log, 0);
    println!("log: {}", out.join(&log.meta.name).display());
    println!("trajectory: {}", csv.display());
    match m.mean_a_void() {
        Some(v) => println!("mean a_void: {v:.4}"),
        None => println!("mean a_void: n/a"),
    }
    if let Some(p) = m.mean_object_path() {
        println!("mean object path: {p:.3} m");
    }
    Ok(())
}

pub fn experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&args.run)?;
    if let Some(n) = args.trials {
        cfg.trials = n;
    }
    if let Some(s) = args.base_seed {
        cfg.base_seed = s;
    }
    if cfg.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let trial = cfg.trial_config()?;
    let out = cfg.out_dir();
    let runs = run_experiment(&trial, cfg.trials, cfg.base_seed);
    for (_, log) in &runs {
        log.write(&out)?;
    }
    let entries: Vec<_> = runs.into_iter().map(|(e, _)| e).collect();
    write_manifest(&out, &entries)?;
    cfg.write_resolved(&out)?;
    println!(
        "{} logs ({} conditions x {} trials) in {}",
        entries.len(),
        Condition::ALL.len(),
        cfg.trials,
        out.display()
    );
    Ok(())
}

/// A log with its trial number inside its condition.
pub struct LoadedLog {
    pub trial: usize,
    pub log: TrajectoryLog,
}

/// Loads the logs listed in the manifest, or every log in the directory
/// (sorted by name) when there is no manifest.
pub fn load_logs(dir: &Path) -> Result<Vec<LoadedLog>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    if dir.join(MANIFEST_FILE).exists() {
        return read_manifest(dir)?
            .into_iter()
            .map(|e| {
                Ok(LoadedLog {
                    trial: e.trial,
                    log: TrajectoryLog::read(dir, &e.log)?,
                })
            })
            .collect();
    }
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().into_string().ok()?;
            name.strip_suffix(META_SUFFIX).map(str::to_string)
        })
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::Data(format!("no trajectory logs in {}", dir.display())));
    }
    names
        .iter()
        .enumerate()
        .map(|(trial, name)| {
            Ok(LoadedLog {
                trial,
                log: TrajectoryLog::read(dir, name)?,
            })
        })
        .collect()
}

fn condition_label(c: Option<Condition>) -> &'static str {
    c.map(Condition::label).unwrap_or("session")
}

/// Per-trial values of `metric`, grouped by condition in canonical order.
fn metric_groups(metrics: &[TrialMetrics], metric: Metric) -> Vec<(String, Vec<f64>)> {
    let mut labels: Vec<&str> = Condition::ALL.iter().map(|c| c.label()).collect();
    labels.push(condition_label(None));
    labels
        .into_iter()
        .map(|label| {
            let values: Vec<f64> = metrics
                .iter()
                .filter(|m| condition_label(m.condition) == label)
                .filter_map(|m| match metric {
                    Metric::Avoid => m.mean_a_void(),
                    Metric::Path => m.mean_object_path(),
                })
                .collect();
            (label.to_string(), values)
        })
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

#[derive(Serialize)]
struct AnalysisConfig<'a> {
    input: &'a Path,
    metric: &'static str,
    permutations: usize,
    permutation_seed: u64,
    mcmc: McmcConfig,
    strict: bool,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let mcmc = McmcConfig {
        chains: args.mcmc_chains,
        length: args.mcmc_length,
        burn_in: args.burn_in,
        seed: args.mcmc_seed,
        prior_only: args.prior_only,
    };
    if mcmc.chains == 0 || mcmc.burn_in >= mcmc.length {
        return Err(CliError::Usage(
            "need --mcmc-chains >= 1 and --burn-in < --mcmc-length".into(),
        ));
    }
    let out: PathBuf = args.out.clone().unwrap_or_else(|| args.input.clone());
    let logs = load_logs(&args.input)?;
    let metrics: Vec<TrialMetrics> = logs
        .iter()
        .map(|l| TrialMetrics::from_log(&l.log, l.trial))
        .collect();
    write_file(&out.join(METRICS_FILE), &metrics_csv(&metrics))?;

    let metric_name = match args.metric {
        Metric::Avoid => "a_void",
        Metric::Path => "path_length",
    };
    let mut problems = Vec::new();
    let groups = metric_groups(&metrics, args.metric);
    for (label, values) in &groups {
        let g = GroupSummary::from_values(label.as_str(), values);
        println!("{label:<12} n={:<3} {metric_name} mean={:.4} sd={:.4}", g.n, g.mean, g.sd);
    }

    match anova_raw(&groups) {
        Ok(anova) => {
            println!(
                "ANOVA F({}, {}) = {:.3}, p = {:.3e}, Cohen's f = {:.3}",
                anova.df_between, anova.df_within, anova.f, anova.p, anova.cohens_f
            );
            write_json(&out.join(ANOVA_FILE), &anova)?;
        }
        Err(e) => problems.push(format!("ANOVA skipped: {e}")),
    }

    let pairs = pairwise_comparisons(&groups, args.permutations, args.permutation_seed);
    for p in &pairs {
        if let Some(ph) = p.p_holm {
            println!("{} vs {}: diff={:+.4} p_holm={:.4}", p.a, p.b, p.mean_diff, ph);
        }
    }
    write_json(&out.join(PAIRWISE_FILE), &pairs)?;

    if args.metric == Metric::Avoid {
        // Trial ids repeat across conditions in a manifest, so key by position.
        let (data, missing) =
            avoidance_trend_table(logs.iter().enumerate().map(|(i, l)| (i, &l.log)));
        if missing > 0 {
            eprintln!("note: {missing} pole movements had no measurable a_void");
        }
        match fit_hierarchical(&data, &mcmc) {
            Ok(post) => {
                for c in &post.conditions {
                    println!(
                        "{:<12} mu1={:+.5} 95% [{:+.5}, {:+.5}] P(beta1>0)={:.3}",
                        c.condition, c.mu1.mean, c.mu1.ci95[0], c.mu1.ci95[1], c.p_beta1_positive
                    );
                }
                println!(
                    "posterior: {} retained draws, max R-hat {:.3}",
                    post.retained_draws, post.max_rhat
                );
                if post.rhat_flagged {
                    problems.push(format!("R-hat {:.3} exceeds 1.1", post.max_rhat));
                }
                write_json(&out.join(POSTERIOR_FILE), &post)?;
            }
            Err(e) => problems.push(format!("trend regression skipped: {e}")),
        }
    }

    let resolved = AnalysisConfig {
        input: &args.input,
        metric: metric_name,
        permutations: args.permutations,
        permutation_seed: args.permutation_seed,
        mcmc,
        strict: args.strict,
    };
    write_file(
        &out.join(ANALYSIS_CONFIG_FILE),
        &toml::to_string_pretty(&resolved).expect("config serializes"),
    )?;

    for p in &problems {
        eprintln!("warning: {p}");
    }
    if args.strict && !problems.is_empty() {
        return Err(CliError::Diagnostics(problems.join("; ")));
    }
    Ok(())
}

fn read_optional<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, CliError> {
    match fs::read_to_string(path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::io(path, e)),
    }
}

fn fmt_summary(values: &[f64], digits: usize) -> String {
    if values.is_empty() {
        return "n/a".into();
    }
    let g = GroupSummary::from_values("", values);
    format!("{:.*} ± {:.*}", digits, g.mean, digits, g.sd)
}

/// Markdown tables comparing conditions.
pub fn render_report(dir: &Path) -> Result<String, CliError> {
    let logs = load_logs(dir)?;
    let metrics: Vec<TrialMetrics> = logs
        .iter()
        .map(|l| TrialMetrics::from_log(&l.log, l.trial))
        .collect();
    let avoid = metric_groups(&metrics, Metric::Avoid);
    let path = metric_groups(&metrics, Metric::Path);
    let mut labels: Vec<String> = Vec::new();
    for (label, _) in avoid.iter().chain(&path) {
        if !labels.contains(label) {
            labels.push(label.clone());
        }
    }
    let lookup = |groups: &[(String, Vec<f64>)], label: &str| {
        groups
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    };

    let mut out = String::new();
    let _ = writeln!(out, "# Condition summary\n");
    let _ = writeln!(out, "| condition | trials | a_void (mean ± sd) | object path, m (mean ± sd) |");
    let _ = writeln!(out, "|---|---|---|---|");
    for label in &labels {
        let n = metrics
            .iter()
            .filter(|m| condition_label(m.condition) == label)
            .count();
        let _ = writeln!(
            out,
            "| {label} | {n} | {} | {} |",
            fmt_summary(&lookup(&avoid, label), 4),
            fmt_summary(&lookup(&path, label), 2)
        );
    }

    if let Some(a) = read_optional::<AnovaResult>(&dir.join(ANOVA_FILE))? {
        let _ = writeln!(out, "\n# One-way ANOVA\n");
        let _ = writeln!(
            out,
            "F({}, {}) = {:.3}, p = {:.3e}, Cohen's f = {:.3}",
            a.df_between, a.df_within, a.f, a.p, a.cohens_f
        );
    }
    if let Some(pairs) = read_optional::<Vec<PairwiseResult>>(&dir.join(PAIRWISE_FILE))? {
        let _ = writeln!(out, "\n# Pairwise permutation tests (Holm-adjusted)\n");
        let _ = writeln!(out, "| a | b | mean difference | p | p (Holm) |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for p in pairs {
            let fmt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or("n/a".into());
            let _ = writeln!(
                out,
                "| {} | {} | {:+.4} | {} | {} |",
                p.a,
                p.b,
                p.mean_diff,
                fmt(p.p),
                fmt(p.p_holm)
            );
        }
    }
    if let Some(post) = read_optional::<PosteriorSummary>(&dir.join(POSTERIOR_FILE))? {
        let _ = writeln!(out, "\n# Avoidance trend over pole movements\n");
        let _ = writeln!(out, "| condition | mu1 mean | 95% interval | P(beta1 > 0) |");
        let _ = writeln!(out, "|---|---|---|---|");
        for c in &post.conditions {
            let _ = writeln!(
                out,
                "| {} | {:+.5} | [{:+.5}, {:+.5}] | {:.3} |",
                c.condition, c.mu1.mean, c.mu1.ci95[0], c.mu1.ci95[1], c.p_beta1_positive
            );
        }
        let _ = writeln!(
            out,
            "\n{} retained draws from {} chains; max R-hat {:.3}{}",
            post.retained_draws,
            post.chains,
            post.max_rhat,
            if post.rhat_flagged { " (flagged)" } else { "" }
        );
    }
    Ok(out)
}

pub fn report(args: &ReportArgs) -> Result<(), CliError> {
    let text = render_report(&args.input)?;
    print!("{text}");
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    Ok(())
}
