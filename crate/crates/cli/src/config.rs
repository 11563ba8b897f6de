//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. `env` selects the preset that
//! supplies every key not given in the file.

use std::path::Path;

use xplain_rl::{EnvKind, ExperimentConfig, Method, SelectionKind, TrackScope};

use crate::error::{CliError, Result};

pub const KEYS: [&str; 15] = [
    "env",
    "sigma",
    "alpha",
    "gamma",
    "tau",
    "epsilon",
    "epsilon_decay",
    "episodes",
    "agents",
    "seed",
    "selection",
    "methods",
    "step_cap",
    "terminal_reward",
    "track",
];

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let at = |line: usize, message: String| CliError::ConfigLine { path: path.to_path_buf(), line, message };
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected `key = value`, found `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(at(line, format!("unknown key `{key}`")));
        }
        if let Some((first, ..)) = entries.iter().find(|(_, k, _)| *k == key) {
            return Err(at(line, format!("duplicate key `{key}` (first set on line {first})")));
        }
        entries.push((line, key, value));
    }

    let env = match entries.iter().find(|(_, k, _)| *k == "env") {
        Some(&(line, _, value)) => EnvKind::parse(value).map_err(|_| at(line, format!("env: unknown task `{value}`")))?,
        None => EnvKind::Navigation,
    };
    let mut config = ExperimentConfig::preset(env);
    for &(line, key, value) in &entries {
        let bad = |what: &str| at(line, format!("{key}: expected {what}, found `{value}`"));
        let float = || value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| bad("a number"));
        let count = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));
        match key {
            "env" => {}
            "sigma" => config.sigma = float()?,
            "alpha" => config.alpha = float()?,
            "gamma" => config.gamma = float()?,
            "tau" => config.tau = float()?,
            "epsilon" => config.epsilon_start = float()?,
            "epsilon_decay" => config.epsilon_decay = float()?,
            "terminal_reward" => config.terminal_reward = float()?,
            "episodes" => config.episodes = count()?,
            "agents" => config.agents = count()?,
            "step_cap" => config.step_cap = count()?,
            "seed" => config.seed = value.parse().map_err(|_| bad("a non-negative integer"))?,
            "selection" => {
                config.selection = match value {
                    "softmax" => SelectionKind::Softmax,
                    "epsilon_greedy" => SelectionKind::EpsilonGreedy,
                    _ => return Err(bad("`softmax` or `epsilon_greedy`")),
                }
            }
            "track" => {
                config.track = match value {
                    "all" => TrackScope::All,
                    "initial" => TrackScope::Initial,
                    _ => return Err(bad("`all` or `initial`")),
                }
            }
            "methods" => {
                config.methods = value
                    .split(',')
                    .map(|m| Method::parse(m.trim()))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("a comma list of memory, learning, introspection"))?;
            }
            _ => unreachable!("keys are checked above"),
        }
    }
    config.validate().map_err(|e| {
        let field = match &e {
            xplain_rl::CoreError::InvalidConfig { field, .. } => Some(*field),
            _ => None,
        };
        let line = field.and_then(|f| entries.iter().find(|(_, k, _)| *k == f).map(|(l, ..)| *l));
        match line {
            Some(line) => at(line, e.to_string()),
            None => CliError::Config(e.to_string()),
        }
    })?;
    Ok(config)
}

/// Renders `config` in the file format accepted by [`parse`].
pub fn render(config: &ExperimentConfig) -> String {
    let methods: Vec<&str> = config.methods.iter().map(|m| m.name()).collect();
    let selection = match config.selection {
        SelectionKind::Softmax => "softmax",
        SelectionKind::EpsilonGreedy => "epsilon_greedy",
    };
    let track = match config.track {
        TrackScope::All => "all",
        TrackScope::Initial => "initial",
    };
    format!(
        "env = {}\nsigma = {}\nalpha = {}\ngamma = {}\ntau = {}\nepsilon = {}\nepsilon_decay = {}\n\
         episodes = {}\nagents = {}\nseed = {}\nselection = {selection}\nmethods = {}\nstep_cap = {}\n\
         terminal_reward = {}\ntrack = {track}\n",
        config.env.name(),
        config.sigma,
        config.alpha,
        config.gamma,
        config.tau,
        config.epsilon_start,
        config.epsilon_decay,
        config.episodes,
        config.agents,
        config.seed,
        methods.join(","),
        config.step_cap,
        config.terminal_reward,
    )
}
