//! Multi-agent training runs and the artifacts they produce.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_state, MethodTraces, StateAnalysis};
use crate::env::{AnyEnv, EnvKind};
use crate::error::{CoreError, Result};
use crate::explainers::{introspect, EpisodicMemory, IntrospectionParams, LearningEstimator, Method, SuccessEstimate};
use crate::learner::{QTable, SarsaAgent, SelectionPolicy};
use crate::mdp::{run_episode, ActionId, EpisodeEnd, EpisodeHook, Environment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    Softmax,
    EpsilonGreedy,
}

/// Which `(state, action)` pairs get a per-episode trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackScope {
    All,
    Initial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub sigma: f64,
    pub episodes: usize,
    pub agents: usize,
    pub seed: u64,
    pub selection: SelectionKind,
    pub step_cap: usize,
    pub methods: Vec<Method>,
    pub track: TrackScope,
    /// `R^T` used by the introspection estimator.
    pub terminal_reward: f64,
}

impl ExperimentConfig {
    /// Navigation defaults: SARSA with softmax, 300 episodes, 20 agents.
    pub fn navigation() -> Self {
        ExperimentConfig {
            env: EnvKind::Navigation,
            alpha: 0.3,
            gamma: 0.9,
            tau: 0.25,
            epsilon_start: 1.0,
            epsilon_decay: 0.9995,
            sigma: 0.0,
            episodes: 300,
            agents: 20,
            seed: 42,
            selection: SelectionKind::Softmax,
            step_cap: 500,
            methods: Method::ALL.to_vec(),
            track: TrackScope::All,
            terminal_reward: 1.0,
        }
    }

    /// Sorting defaults: SARSA with decaying epsilon-greedy, initial state traced.
    pub fn sorting() -> Self {
        ExperimentConfig {
            env: EnvKind::Sorting,
            alpha: 0.3,
            gamma: 0.9,
            tau: 0.25,
            epsilon_start: 1.0,
            epsilon_decay: 0.995,
            sigma: 0.0,
            episodes: 2000,
            agents: 20,
            seed: 42,
            selection: SelectionKind::EpsilonGreedy,
            step_cap: 100,
            methods: Method::ALL.to_vec(),
            track: TrackScope::Initial,
            terminal_reward: 3.0,
        }
    }

    pub fn preset(env: EnvKind) -> Self {
        match env {
            EnvKind::Navigation => Self::navigation(),
            EnvKind::Sorting => Self::sorting(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Err(CoreError::InvalidConfig { field, reason });
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("{} not in (0, 1]", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", format!("{} not in (0, 1]", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return bad("sigma", format!("{} not in [0, 1]", self.sigma));
        }
        if self.env == EnvKind::Sorting && self.sigma != 0.0 {
            return bad("sigma", "the sorting task has no transition noise; use 0".into());
        }
        if self.episodes == 0 {
            return bad("episodes", "must be positive".into());
        }
        if self.agents == 0 {
            return bad("agents", "must be positive".into());
        }
        if self.step_cap == 0 {
            return bad("step_cap", "must be positive".into());
        }
        if !(self.epsilon_start > 0.0 && self.epsilon_start <= 1.0) {
            return bad("epsilon", format!("{} not in (0, 1]", self.epsilon_start));
        }
        if self.methods.is_empty() {
            return bad("methods", "at least one method is required".into());
        }
        self.selection_policy().validate()?;
        IntrospectionParams::new(self.terminal_reward, self.sigma, self.gamma)?;
        Ok(())
    }

    pub fn selection_policy(&self) -> SelectionPolicy {
        match self.selection {
            SelectionKind::Softmax => SelectionPolicy::Softmax { tau: self.tau },
            SelectionKind::EpsilonGreedy => {
                SelectionPolicy::EpsilonGreedy { epsilon: self.epsilon_start, decay: self.epsilon_decay }
            }
        }
    }

    pub fn introspection_params(&self) -> Result<IntrospectionParams> {
        IntrospectionParams::new(self.terminal_reward, self.sigma, self.gamma)
    }

    pub fn has(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }

    /// Methods in canonical order, deduplicated.
    pub fn enabled_methods(&self) -> Vec<Method> {
        Method::ALL.into_iter().filter(|m| self.has(*m)).collect()
    }

    pub fn tracked_pairs(&self) -> Vec<(usize, ActionId)> {
        let actions = self.env.action_count();
        let states: Vec<usize> = match self.track {
            TrackScope::All => (0..self.env.state_count()).collect(),
            TrackScope::Initial => vec![self.env.initial_state()],
        };
        states.into_iter().flat_map(|s| (0..actions).map(move |a| (s, ActionId(a)))).collect()
    }

    /// Seed of the RNG stream owned by `agent`.
    pub fn agent_seed(&self, agent: usize) -> u64 {
        self.seed.wrapping_add(agent as u64)
    }
}

/// What a trace measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLabel {
    Q,
    Estimator(Method),
    Noisy,
}

impl TraceLabel {
    pub fn name(self) -> &'static str {
        match self {
            TraceLabel::Q => "q",
            TraceLabel::Estimator(m) => m.name(),
            TraceLabel::Noisy => "noisy",
        }
    }

    pub fn letter(self) -> char {
        match self {
            TraceLabel::Q => 'q',
            TraceLabel::Estimator(m) => m.letter(),
            TraceLabel::Noisy => 'n',
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "q" => Ok(TraceLabel::Q),
            "noisy" => Ok(TraceLabel::Noisy),
            other => Method::parse(other).map(TraceLabel::Estimator),
        }
    }
}

/// Per-episode series for one `(label, state, action)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbTrace {
    pub label: TraceLabel,
    pub state: usize,
    pub action: ActionId,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub end: EpisodeEnd,
    pub length: usize,
    pub total_reward: f64,
}

/// Persistent cells held by each estimator after an episode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryUsage {
    pub cumulative_steps: usize,
    pub memory: usize,
    pub learning: usize,
    pub introspection: usize,
}

/// Everything one agent produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub agent: usize,
    pub q_trace: Vec<ProbTrace>,
    pub prob_traces: Vec<ProbTrace>,
    pub episode_log: Vec<EpisodeRecord>,
    pub memory_usage: Vec<MemoryUsage>,
    pub final_q: QTable,
    pub final_estimates: Vec<SuccessEstimate>,
}

impl RunArtifacts {
    pub fn trace(&self, label: TraceLabel, state: usize, action: ActionId) -> Option<&ProbTrace> {
        let pool = match label {
            TraceLabel::Q => &self.q_trace,
            _ => &self.prob_traces,
        };
        pool.iter().find(|t| t.label == label && t.state == state && t.action == action)
    }

    pub fn final_estimate(&self, method: Method) -> Option<&SuccessEstimate> {
        self.final_estimates.iter().find(|e| e.method == method)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub runs: Vec<RunArtifacts>,
}

impl ExperimentResult {
    /// Per-episode arithmetic mean over agents.
    pub fn mean_trace(&self, label: TraceLabel, state: usize, action: ActionId) -> Result<Vec<f64>> {
        let traces: Vec<&[f64]> = self
            .runs
            .iter()
            .map(|r| r.trace(label, state, action).map(|t| t.values.as_slice()))
            .collect::<Option<_>>()
            .ok_or(CoreError::InvalidState { index: state, count: self.config.env.state_count() })?;
        crate::analysis::mean_trace(&traces)
    }

    /// Mean over agents of each method's final estimate.
    pub fn mean_final_estimates(&self) -> Result<Vec<SuccessEstimate>> {
        mean_estimates(&self.runs)
    }

    /// Estimator comparison at `state` on cross-agent mean traces. The noisy
    /// control is seeded from the run seed.
    pub fn analyze_state(&self, state: usize) -> Result<StateAnalysis> {
        let env = self.config.env;
        let actions: Vec<ActionId> = (0..env.action_count()).map(ActionId).collect();
        let labels = actions.iter().map(|&a| env.action_label(a).map(String::from)).collect::<Result<Vec<_>>>()?;
        let letters = actions.iter().map(|&a| env.action_letter(a)).collect::<Result<Vec<_>>>()?;
        let traces = self
            .config
            .enabled_methods()
            .into_iter()
            .map(|method| {
                let per_action = actions
                    .iter()
                    .map(|&a| self.mean_trace(TraceLabel::Estimator(method), state, a))
                    .collect::<Result<Vec<_>>>()?;
                Ok(MethodTraces { method, per_action })
            })
            .collect::<Result<Vec<_>>>()?;
        analyze_state(state, &labels, &letters, &traces, self.config.seed)
    }
}

/// Mean over agents of each method's final estimate.
pub fn mean_estimates(runs: &[RunArtifacts]) -> Result<Vec<SuccessEstimate>> {
    let sets: Vec<&[SuccessEstimate]> = runs.iter().map(|r| r.final_estimates.as_slice()).collect();
    mean_estimate_sets(&sets)
}

/// Cellwise mean of estimate sets that all cover the same methods.
pub fn mean_estimate_sets(sets: &[&[SuccessEstimate]]) -> Result<Vec<SuccessEstimate>> {
    let first = sets.first().ok_or(CoreError::EmptyInput)?;
    first
        .iter()
        .map(|proto| {
            let mut acc = vec![0.0; proto.values.len()];
            for set in sets {
                let est = set.iter().find(|e| e.method == proto.method).ok_or(CoreError::EmptyInput)?;
                if est.values.len() != acc.len() {
                    return Err(CoreError::LengthMismatch { left: est.values.len(), right: acc.len() });
                }
                for (a, v) in acc.iter_mut().zip(&est.values) {
                    *a += v;
                }
            }
            let n = sets.len() as f64;
            let mean = acc.into_iter().map(|v| (v / n).clamp(0.0, 1.0)).collect();
            SuccessEstimate::new(proto.method, proto.state_count, proto.action_count, mean)
        })
        .collect()
}

/// Trains one agent with its own environment and RNG stream.
pub fn train_agent(config: &ExperimentConfig, agent: usize) -> Result<RunArtifacts> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.agent_seed(agent));
    let mut env = AnyEnv::new(config.env, config.sigma)?;
    let (states, actions) = (env.state_count(), env.action_count());
    let mut learner = SarsaAgent::new(states, actions, config.selection_policy(), config.alpha, config.gamma);
    let mut memory = config.has(Method::Memory).then(|| EpisodicMemory::new(states, actions));
    let mut learning = config.has(Method::Learning).then(|| LearningEstimator::new(states, actions, config.alpha));
    let introspection = config.has(Method::Introspection).then(|| config.introspection_params()).transpose()?;

    let tracked = config.tracked_pairs();
    let methods = config.enabled_methods();
    let new_trace = |label, (state, action): (usize, ActionId)| ProbTrace {
        label,
        state,
        action,
        values: Vec::with_capacity(config.episodes),
    };
    let mut q_trace: Vec<ProbTrace> = tracked.iter().map(|&p| new_trace(TraceLabel::Q, p)).collect();
    let mut prob_traces: Vec<ProbTrace> = methods
        .iter()
        .flat_map(|&m| tracked.iter().map(move |&p| (m, p)))
        .map(|(m, p)| new_trace(TraceLabel::Estimator(m), p))
        .collect();

    let mut episode_log = Vec::with_capacity(config.episodes);
    let mut memory_usage = Vec::with_capacity(config.episodes);
    let mut cumulative_steps = 0;
    for episode in 0..config.episodes {
        let mut hooks: Vec<&mut dyn EpisodeHook> = Vec::with_capacity(2);
        if let Some(m) = memory.as_mut() {
            hooks.push(m);
        }
        if let Some(l) = learning.as_mut() {
            hooks.push(l);
        }
        let ep = run_episode(&mut env, &mut learner, &mut hooks, config.step_cap, &mut rng)?;
        cumulative_steps += ep.len();
        episode_log.push(EpisodeRecord { episode, end: ep.end, length: ep.len(), total_reward: ep.total_reward() });
        memory_usage.push(MemoryUsage {
            cumulative_steps,
            memory: memory.as_ref().map_or(0, EpisodicMemory::cells),
            learning: learning.as_ref().map_or(0, |l| l.table.cells()),
            introspection: 0,
        });

        for (k, &(s, a)) in tracked.iter().enumerate() {
            q_trace[k].values.push(learner.q.get(s, a));
        }
        for (mi, method) in methods.iter().enumerate() {
            let base = mi * tracked.len();
            for (k, &(s, a)) in tracked.iter().enumerate() {
                let value = match method {
                    Method::Memory => memory.as_ref().map_or(0.0, |m| m.prob(s, a)),
                    Method::Learning => learning.as_ref().map_or(0.0, |l| l.table.get(s, a)),
                    Method::Introspection => introspection.as_ref().map_or(0.0, |p| introspect(learner.q.get(s, a), p)),
                };
                prob_traces[base + k].values.push(value);
            }
        }
    }

    let final_estimates = methods
        .iter()
        .map(|&method| {
            let values = match method {
                Method::Memory => memory.as_ref().map(EpisodicMemory::probabilities).unwrap_or_default(),
                Method::Learning => learning
                    .as_ref()
                    .map(|l| l.table.values().iter().map(|v| v.clamp(0.0, 1.0)).collect())
                    .unwrap_or_default(),
                Method::Introspection => {
                    let p = introspection.as_ref().expect("introspection enabled");
                    learner.q.values().iter().map(|&q| introspect(q, p)).collect()
                }
            };
            SuccessEstimate::new(method, states, actions, values)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RunArtifacts {
        agent,
        q_trace,
        prob_traces,
        episode_log,
        memory_usage,
        final_q: learner.q,
        final_estimates,
    })
}

/// Trains `config.agents` independent agents; deterministic in `config.seed`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_threads(config, None)
}

/// As [`run_experiment`], with at most `threads` agents training at once.
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    config.validate()?;
    let train_all = || (0..config.agents).into_par_iter().map(|a| train_agent(config, a)).collect::<Result<Vec<_>>>();
    let runs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CoreError::InvalidConfig { field: "threads", reason: e.to_string() })?
            .install(train_all)?,
        None => train_all()?,
    };
    Ok(ExperimentResult { config: config.clone(), runs })
}
