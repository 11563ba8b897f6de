//! Goal-driven explanations for tabular reinforcement-learning agents.
//!
//! A SARSA agent is trained on an episodic task while three estimators track
//! the probability that each `(state, action)` leads to task completion:
//!
//! * memory-based, counting successful visits in an episodic memory;
//! * learning-based, a second TD table trained on a success flag;
//! * introspection-based, a log transform of the agent's own Q-values.
//!
//! The [`analysis`] module compares the estimators (Pearson correlation, MSE
//! against the memory-based baseline, a noisy control, Savitzky-Golay
//! smoothing) and [`narrate`] turns them into "why" / "why not" sentences.

pub mod absorption;
pub mod analysis;
pub mod env;
pub mod error;
pub mod experiment;
pub mod explainers;
pub mod learner;
pub mod mdp;
pub mod narrate;

pub use env::{AnyEnv, EnvKind, NavAction, NavEnv, SortAction, SortEnv, SortState};
pub use error::{CoreError, Result};
pub use experiment::{
    mean_estimate_sets, run_experiment, run_experiment_with_threads, train_agent, ExperimentConfig, ExperimentResult, MemoryUsage,
    ProbTrace, RunArtifacts, SelectionKind, TraceLabel, TrackScope,
};
pub use explainers::{EpisodicMemory, IntrospectionParams, Method, PTable, SuccessEstimate};
pub use learner::{QTable, SarsaAgent, SelectionPolicy};
pub use mdp::{ActionId, Episode, EpisodeEnd, Environment, Outcome, StateId, StepOutcome, Transition};
pub use narrate::{Explanation, ExplanationQuery, Narrator, QueryKind};
