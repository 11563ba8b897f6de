//! On-disk run artifacts: trace CSV, final tables, summary and manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xplain_rl::{ActionId, EnvKind, ExperimentConfig, ExperimentResult, MemoryUsage, Method, SuccessEstimate};

use crate::error::{CliError, Result};

pub const TRACES: &str = "traces.csv";
pub const QTABLE: &str = "qtable.csv";
pub const PTABLE: &str = "ptable.csv";
pub const SUMMARY: &str = "summary.json";
pub const MANIFEST: &str = "manifest.json";

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// One line of `traces.csv`. `method` is an estimator name or `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub agent: usize,
    pub episode: usize,
    pub state: String,
    pub action: String,
    pub method: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TableRow {
    agent: usize,
    state: String,
    action: String,
    value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: usize,
    pub successes: usize,
    pub mean_return_last_50: f64,
    pub memory: MemoryUsage,
    pub final_q: Vec<Vec<f64>>,
    pub final_estimates: Vec<SuccessEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub config: ExperimentConfig,
    pub agents: Vec<AgentSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub artifacts: Vec<String>,
    pub duration_seconds: f64,
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file)))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

fn action_name(env: EnvKind, action: ActionId) -> Result<String> {
    Ok(env.action_label(action)?.to_string())
}

fn write_traces(path: &Path, result: &ExperimentResult) -> Result<()> {
    let env = result.config.env;
    let mut w = csv_writer(path)?;
    for run in &result.runs {
        let traces: Vec<_> = run.q_trace.iter().chain(&run.prob_traces).collect();
        let names = traces
            .iter()
            .map(|t| Ok((env.state_label(t.state)?, action_name(env, t.action)?, t.label.name())))
            .collect::<Result<Vec<_>>>()?;
        for episode in 0..result.config.episodes {
            for (t, (state, action, method)) in traces.iter().zip(&names) {
                let row = TraceRow {
                    agent: run.agent,
                    episode,
                    state: state.clone(),
                    action: action.clone(),
                    method: method.to_string(),
                    value: t.values[episode],
                };
                w.serialize(row).map_err(|e| csv_error(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_table(path: &Path, env: EnvKind, tables: &[(usize, &[f64])]) -> Result<()> {
    let actions = env.action_count();
    let mut w = csv_writer(path)?;
    for &(agent, values) in tables {
        for (cell, &value) in values.iter().enumerate() {
            let row = TableRow {
                agent,
                state: env.state_label(cell / actions)?,
                action: action_name(env, ActionId(cell % actions))?,
                value,
            };
            w.serialize(row).map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn summarize(result: &ExperimentResult) -> RunSummary {
    let agents = result
        .runs
        .iter()
        .map(|run| {
            let tail = &run.episode_log[run.episode_log.len().saturating_sub(50)..];
            AgentSummary {
                agent: run.agent,
                successes: run.episode_log.iter().filter(|e| e.end == xplain_rl::EpisodeEnd::Goal).count(),
                mean_return_last_50: tail.iter().map(|e| e.total_reward).sum::<f64>() / tail.len().max(1) as f64,
                memory: run.memory_usage.last().copied().unwrap_or_default(),
                final_q: (0..run.final_q.state_count()).map(|s| run.final_q.row(s).to_vec()).collect(),
                final_estimates: run.final_estimates.clone(),
            }
        })
        .collect();
    RunSummary { version: VERSION.to_string(), config: result.config.clone(), agents }
}

/// Writes every artifact of a finished run into `dir`; returns the file names.
pub fn write_run(dir: &Path, result: &ExperimentResult) -> Result<Vec<String>> {
    create_dir(dir)?;
    let env = result.config.env;
    let mut written = Vec::new();

    write_traces(&dir.join(TRACES), result)?;
    written.push(TRACES.to_string());

    let q: Vec<(usize, &[f64])> = result.runs.iter().map(|r| (r.agent, r.final_q.values())).collect();
    write_table(&dir.join(QTABLE), env, &q)?;
    written.push(QTABLE.to_string());

    if result.config.has(Method::Learning) {
        let p: Vec<(usize, &[f64])> = result
            .runs
            .iter()
            .filter_map(|r| r.final_estimate(Method::Learning).map(|e| (r.agent, e.values.as_slice())))
            .collect();
        write_table(&dir.join(PTABLE), env, &p)?;
        written.push(PTABLE.to_string());
    }

    write_json(&dir.join(SUMMARY), &summarize(result))?;
    written.push(SUMMARY.to_string());
    Ok(written)
}

pub fn read_summary(dir: &Path) -> Result<RunSummary> {
    read_json(&dir.join(SUMMARY))
}

pub fn read_traces(dir: &Path) -> Result<Vec<TraceRow>> {
    let path: PathBuf = dir.join(TRACES);
    let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
    csv::Reader::from_reader(std::io::BufReader::new(file))
        .deserialize()
        .map(|row| row.map_err(|e| csv_error(&path, e)))
        .collect()
}

/// Writes `text` with a trailing newline.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?);
    file.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))?;
    if !text.ends_with('\n') {
        file.write_all(b"\n").map_err(|e| CliError::io(path, e))?;
    }
    file.flush().map_err(|e| CliError::io(path, e))
}
