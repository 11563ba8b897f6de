//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use xplain_rl::analysis::{analyze_state, Correlation, MethodTraces, StateAnalysis};
use xplain_rl::{
    mean_estimate_sets, run_experiment_with_threads, ActionId, EnvKind, ExperimentConfig, ExplanationQuery, Method,
    Narrator, QueryKind, SuccessEstimate,
};

use crate::artifacts::{self, RunManifest, RunSummary, MANIFEST};
use crate::config;
use crate::error::{CliError, Result};
use crate::svg::{line_chart, Series};

pub const THREADS_VAR: &str = "XPLAIN_RL_THREADS";

/// Thread cap from [`THREADS_VAR`]; unset or empty means no cap.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, found `{v}`"))),
        Err(_) => Ok(None),
    }
}

pub fn train(config_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let config = config::load(config_path)?;
    let threads = thread_cap()?;
    let start = Instant::now();
    let result = run_experiment_with_threads(&config, threads)?;
    let artifacts = artifacts::write_run(out_dir, &result)?;
    let manifest = RunManifest {
        version: artifacts::VERSION.to_string(),
        config,
        artifacts,
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    artifacts::write_json(&out_dir.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

/// One run directory loaded for analysis.
struct LoadedRun {
    dir: PathBuf,
    summary: RunSummary,
    rows: Vec<artifacts::TraceRow>,
}

fn load_run(dir: &Path) -> Result<LoadedRun> {
    Ok(LoadedRun { dir: dir.to_path_buf(), summary: artifacts::read_summary(dir)?, rows: artifacts::read_traces(dir)? })
}

fn check_compatible(runs: &[LoadedRun]) -> Result<()> {
    let first = &runs[0];
    let base = &first.summary.config;
    for run in &runs[1..] {
        let cfg = &run.summary.config;
        let differs = |what: &str, a: String, b: String| {
            CliError::Mismatch(format!(
                "{} has {what} {b} but {} has {a}; runs cannot be aligned",
                run.dir.display(),
                first.dir.display()
            ))
        };
        if cfg.env != base.env {
            return Err(differs("env", base.env.name().into(), cfg.env.name().into()));
        }
        if cfg.episodes != base.episodes {
            return Err(differs("episodes", base.episodes.to_string(), cfg.episodes.to_string()));
        }
        if cfg.enabled_methods() != base.enabled_methods() {
            return Err(differs("methods", format!("{:?}", base.enabled_methods()), format!("{:?}", cfg.enabled_methods())));
        }
    }
    Ok(())
}

/// Values by episode keyed by `(run, agent)`.
type AgentTraces = BTreeMap<(usize, usize), Vec<Option<f64>>>;

/// Cross-agent mean trace per `(method, action)` at `state`, pooling every run.
fn pooled_means(runs: &[LoadedRun], env: EnvKind, state: usize, episodes: usize) -> Result<Vec<MethodTraces>> {
    let state_name = env.state_label(state)?;
    let actions = env.action_count();
    let mut grouped: BTreeMap<(Method, usize), AgentTraces> = BTreeMap::new();
    for (r, run) in runs.iter().enumerate() {
        let path = run.dir.join(artifacts::TRACES);
        for row in run.rows.iter().filter(|row| row.state == state_name && row.method != "q") {
            let method = Method::parse(&row.method).map_err(|e| CliError::format(&path, e))?;
            let action = env.parse_action(&row.action).map_err(|e| CliError::format(&path, e))?;
            if row.episode >= episodes {
                return Err(CliError::Mismatch(format!(
                    "{}: episode {} outside the configured {episodes}",
                    path.display(),
                    row.episode
                )));
            }
            let slot = grouped
                .entry((method, action.0))
                .or_default()
                .entry((r, row.agent))
                .or_insert_with(|| vec![None; episodes]);
            slot[row.episode] = Some(row.value);
        }
    }
    if grouped.is_empty() {
        return Err(CliError::Mismatch(format!("no traces recorded for state {state_name}")));
    }

    let methods: Vec<Method> = Method::ALL.into_iter().filter(|m| grouped.keys().any(|(gm, _)| gm == m)).collect();
    methods
        .into_iter()
        .map(|method| {
            let per_action = (0..actions)
                .map(|a| {
                    let agents = grouped.get(&(method, a)).ok_or_else(|| {
                        CliError::Mismatch(format!("{} trace missing for {state_name} action {a}", method.name()))
                    })?;
                    let mut mean = vec![0.0; episodes];
                    for ((r, agent), values) in agents {
                        for (m, v) in mean.iter_mut().zip(values) {
                            *m += v.ok_or_else(|| {
                                CliError::Mismatch(format!(
                                    "{}: agent {agent} {} trace has missing episodes",
                                    runs[*r].dir.display(),
                                    method.name()
                                ))
                            })?;
                        }
                    }
                    let n = agents.len() as f64;
                    Ok(mean.into_iter().map(|v| v / n).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MethodTraces { method, per_action })
        })
        .collect()
}

fn correlation_csv(analysis: &StateAnalysis) -> String {
    let m = &analysis.correlations;
    let mut out = format!("label,{}\n", m.labels.join(","));
    for (i, label) in m.labels.iter().enumerate() {
        let cells: Vec<String> = (0..m.labels.len())
            .map(|j| match m.get(i, j) {
                Correlation::Defined(v) => format!("{v}"),
                Correlation::NotDefined => "NA".to_string(),
            })
            .collect();
        let _ = writeln!(out, "{label},{}", cells.join(","));
    }
    out
}

fn mse_csv(analysis: &StateAnalysis) -> String {
    match &analysis.mse {
        Some(table) => {
            let mut out = format!("method,{}\n", table.actions.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.values.iter().map(|v| format!("{v}")).collect();
                let _ = writeln!(out, "{},{}", row.label, cells.join(","));
            }
            out
        }
        None => "method\n".to_string(),
    }
}

pub struct AnalyzeOutput {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub report: String,
}

pub fn analyze(run_dirs: &[PathBuf], out_dir: Option<&Path>, state: Option<&str>) -> Result<AnalyzeOutput> {
    if run_dirs.is_empty() {
        return Err(CliError::Config("at least one run directory is required".into()));
    }
    let runs = run_dirs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
    check_compatible(&runs)?;
    let config: &ExperimentConfig = &runs[0].summary.config;
    let env = config.env;
    let state = match state {
        Some(name) => env.parse_state(name)?,
        None => env.initial_state(),
    };
    let traces = pooled_means(&runs, env, state, config.episodes)?;
    let actions: Vec<ActionId> = (0..env.action_count()).map(ActionId).collect();
    let labels = actions.iter().map(|&a| env.action_label(a).map(String::from)).collect::<Result<Vec<_>, _>>()?;
    let letters = actions.iter().map(|&a| env.action_letter(a)).collect::<Result<Vec<_>, _>>()?;
    let analysis = analyze_state(state, &labels, &letters, &traces, config.seed)?;

    let out_dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| run_dirs[0].clone());
    artifacts::create_dir(&out_dir)?;
    let mut files = Vec::new();
    artifacts::write_text(&out_dir.join("mse_table.csv"), &mse_csv(&analysis))?;
    files.push("mse_table.csv".to_string());
    artifacts::write_text(&out_dir.join("correlation_matrix.csv"), &correlation_csv(&analysis))?;
    files.push("correlation_matrix.csv".to_string());

    let state_name = env.state_label(state)?;
    for t in &traces {
        let series: Vec<Series> = labels
            .iter()
            .zip(&t.per_action)
            .map(|(label, values)| Series { name: label.clone(), values: values.clone() })
            .collect();
        let title = format!("{} estimate at {state_name}", t.method.name());
        let name = format!("chart_{}.svg", t.method.name());
        artifacts::write_text(&out_dir.join(&name), &line_chart(&title, "episode", "P(success)", &series, 0.0, 1.0))?;
        files.push(name);
    }

    let agents: usize = runs.iter().map(|r| r.summary.agents.len()).sum();
    let mut report = String::new();
    let _ = writeln!(report, "task: {}", env.name());
    let _ = writeln!(report, "runs pooled: {} ({agents} agents, {} episodes each)", runs.len(), config.episodes);
    let _ = writeln!(report, "state: {state_name}");
    report.push('\n');
    match &analysis.mse {
        Some(table) => report.push_str(&table.to_text("MSE vs memory")),
        None => report.push_str("MSE vs memory: not available (needs memory plus another method)\n"),
    }
    report.push('\n');
    let _ = writeln!(report, "Pearson correlation");
    let m = &analysis.correlations;
    let _ = writeln!(report, "{:>6}{}", "", m.labels.iter().map(|l| format!("{l:>8}")).collect::<String>());
    for (i, label) in m.labels.iter().enumerate() {
        let cells: String = (0..m.labels.len()).map(|j| format!("{:>8}", m.get(i, j).to_string())).collect();
        let _ = writeln!(report, "{label:>6}{cells}");
    }
    report.push('\n');
    let _ = writeln!(report, "final mean estimate");
    for t in &traces {
        let cells: Vec<String> = labels
            .iter()
            .zip(&t.per_action)
            .map(|(l, v)| format!("{l} {:.4}", v.last().copied().unwrap_or(0.0)))
            .collect();
        let _ = writeln!(report, "  {:<14}{}", t.method.name(), cells.join("  "));
    }
    artifacts::write_text(&out_dir.join("report.txt"), &report)?;
    files.push("report.txt".to_string());
    Ok(AnalyzeOutput { out_dir, files, report })
}

pub struct ExplainRequest<'a> {
    pub run_dir: &'a Path,
    pub kind: &'a str,
    pub state: &'a str,
    pub action: Option<&'a str>,
    pub agent: Option<usize>,
    pub methods: Option<&'a str>,
}

pub fn explain(req: &ExplainRequest) -> Result<xplain_rl::Explanation> {
    let summary = artifacts::read_summary(req.run_dir)?;
    let env = summary.config.env;
    let kind = QueryKind::parse(req.kind)?;
    let state = env.parse_state(req.state)?;
    let action = req.action.map(|a| env.parse_action(a)).transpose()?;
    if kind != QueryKind::Compare && action.is_none() {
        return Err(CliError::Config(format!("`{}` needs an action", req.kind)));
    }
    let methods = match req.methods {
        Some(list) => list.split(',').map(|m| Method::parse(m.trim())).collect::<Result<Vec<_>, _>>()?,
        None => summary.config.enabled_methods(),
    };
    let estimates: Vec<SuccessEstimate> = match req.agent {
        Some(agent) => summary
            .agents
            .iter()
            .find(|a| a.agent == agent)
            .map(|a| a.final_estimates.clone())
            .ok_or_else(|| CliError::Config(format!("agent {agent} not in run ({} agents)", summary.agents.len())))?,
        None => {
            let sets: Vec<&[SuccessEstimate]> = summary.agents.iter().map(|a| a.final_estimates.as_slice()).collect();
            mean_estimate_sets(&sets)?
        }
    };
    let narrator = Narrator::new(env, &estimates);
    Ok(narrator.explain(&ExplanationQuery { kind, state, action, methods })?)
}

pub fn report(run_dir: &Path) -> Result<String> {
    let summary = artifacts::read_summary(run_dir)?;
    let manifest: Option<RunManifest> = match run_dir.join(MANIFEST).exists() {
        true => Some(artifacts::read_json(&run_dir.join(MANIFEST))?),
        false => None,
    };
    let cfg = &summary.config;
    let agents = summary.agents.len().max(1) as f64;
    let mean = |f: &dyn Fn(&artifacts::AgentSummary) -> f64| summary.agents.iter().map(f).sum::<f64>() / agents;

    let mut out = String::new();
    let _ = writeln!(out, "run: {}", run_dir.display());
    let _ = writeln!(out, "produced by: {}", summary.version);
    let _ = writeln!(out, "\nconfiguration");
    for line in config::render(cfg).lines() {
        let _ = writeln!(out, "  {line}");
    }
    let _ = writeln!(out, "\noutcomes (mean over {} agents)", summary.agents.len());
    let _ = writeln!(out, "  success rate        {:.4}", mean(&|a| a.successes as f64) / cfg.episodes as f64);
    let _ = writeln!(out, "  return, last 50     {:.4}", mean(&|a| a.mean_return_last_50));
    let _ = writeln!(out, "\nstorage after training (mean cells)");
    let _ = writeln!(out, "  cumulative steps    {:.1}", mean(&|a| a.memory.cumulative_steps as f64));
    let _ = writeln!(out, "  memory-based        {:.1}", mean(&|a| a.memory.memory as f64));
    let _ = writeln!(out, "  learning-based      {:.1}", mean(&|a| a.memory.learning as f64));
    let _ = writeln!(out, "  introspection-based {:.1}", mean(&|a| a.memory.introspection as f64));
    if let Some(m) = manifest {
        let _ = writeln!(out, "\nartifacts ({:.2}s wall clock)", m.duration_seconds);
        for a in &m.artifacts {
            let _ = writeln!(out, "  {a}");
        }
    }
    Ok(out)
}
