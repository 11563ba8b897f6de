//! Episodic MDP abstraction and the training loop shared by every estimator.
//!
//! An [`Environment`] exposes dense state and action indices. Leaving the
//! dense index space is signalled with the [`StateId::TerminalGoal`] and
//! [`StateId::TerminalAversive`] markers, which never act as the source of an
//! action. [`run_episode`] drives an [`Agent`] through one episode and fans
//! every transition out to a list of [`EpisodeHook`]s.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A discrete state, or one of the two absorbing terminal markers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateId {
    Index(usize),
    TerminalGoal,
    TerminalAversive,
}

impl StateId {
    pub fn index(self) -> Option<usize> {
        match self {
            StateId::Index(i) => Some(i),
            _ => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        !matches!(self, StateId::Index(_))
    }

    pub fn terminal_kind(self) -> TerminalKind {
        match self {
            StateId::Index(_) => TerminalKind::None,
            StateId::TerminalGoal => TerminalKind::Goal,
            StateId::TerminalAversive => TerminalKind::Aversive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalKind {
    None,
    Goal,
    Aversive,
}

/// Result of executing one action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub next_state: StateId,
    pub reward: f64,
    pub terminal_kind: TerminalKind,
}

impl StepOutcome {
    pub fn new(next_state: StateId, reward: f64) -> Self {
        StepOutcome {
            next_state,
            reward,
            terminal_kind: next_state.terminal_kind(),
        }
    }

    pub fn reached_goal(&self) -> bool {
        self.terminal_kind == TerminalKind::Goal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

/// How an episode stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeEnd {
    Goal,
    Aversive,
    StepCap,
}

impl EpisodeEnd {
    pub fn outcome(self) -> Outcome {
        match self {
            EpisodeEnd::Goal => Outcome::Success,
            _ => Outcome::Failure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeStep {
    pub state: StateId,
    pub action: ActionId,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub transitions: Vec<EpisodeStep>,
    pub outcome: Outcome,
    pub end: EpisodeEnd,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}

/// One SARSA-style transition `(s, a, r, s', a')`.
///
/// `next_action` is `None` exactly when `next_state` is terminal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: ActionId,
    pub reward: f64,
    pub next_state: StateId,
    pub next_action: Option<ActionId>,
}

impl Transition {
    pub fn reached_goal(&self) -> bool {
        self.next_state == StateId::TerminalGoal
    }
}

pub trait Environment {
    fn state_count(&self) -> usize;
    fn action_count(&self) -> usize;
    /// Reward paid on successful task completion.
    fn terminal_reward(&self) -> f64;
    /// Starts a new episode and returns the initial state index.
    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize;
    /// Executes `action` from the current state.
    fn step<R: Rng + ?Sized>(&mut self, action: ActionId, rng: &mut R) -> Result<StepOutcome>;
}

/// Action selection plus whatever value learning drives it.
pub trait Agent {
    fn choose<R: Rng + ?Sized>(&mut self, state: usize, rng: &mut R) -> ActionId;
    fn learn(&mut self, transition: &Transition) -> Result<()>;
    fn end_episode(&mut self, _outcome: Outcome) {}
}

/// Observer of the training loop. Hooks never influence action selection.
pub trait EpisodeHook {
    fn on_episode_start(&mut self) {}
    fn on_step(&mut self, transition: &Transition) -> Result<()>;
    fn on_episode_end(&mut self, _outcome: Outcome) {}
}

/// Runs one episode.
///
/// Per step: take `a`, observe `(r, s')`, choose `a'`, let the agent learn,
/// then notify hooks. The episode is cut at `step_cap` steps with a failure
/// outcome. Out-of-range indices abort with an error.
pub fn run_episode<E, A, R>(
    env: &mut E,
    agent: &mut A,
    hooks: &mut [&mut dyn EpisodeHook],
    step_cap: usize,
    rng: &mut R,
) -> Result<Episode>
where
    E: Environment,
    A: Agent,
    R: Rng + ?Sized,
{
    let state_count = env.state_count();
    let action_count = env.action_count();
    let check_action = |a: ActionId| {
        if a.0 < action_count {
            Ok(a)
        } else {
            Err(CoreError::InvalidAction { index: a.0, count: action_count })
        }
    };

    for hook in hooks.iter_mut() {
        hook.on_episode_start();
    }

    let mut state = env.reset(rng);
    let mut action = check_action(agent.choose(state, rng))?;
    let mut transitions = Vec::new();
    let end = loop {
        let outcome = env.step(action, rng)?;
        if !outcome.reward.is_finite() {
            return Err(CoreError::NonFinite("reward"));
        }
        transitions.push(EpisodeStep {
            state: StateId::Index(state),
            action,
            reward: outcome.reward,
        });

        let next_action = match outcome.next_state {
            StateId::Index(next) if next >= state_count => {
                return Err(CoreError::InvalidState { index: next, count: state_count });
            }
            StateId::Index(next) => Some(check_action(agent.choose(next, rng))?),
            _ => None,
        };
        let transition = Transition {
            state,
            action,
            reward: outcome.reward,
            next_state: outcome.next_state,
            next_action,
        };
        agent.learn(&transition)?;
        for hook in hooks.iter_mut() {
            hook.on_step(&transition)?;
        }

        match (outcome.next_state, next_action) {
            (StateId::TerminalGoal, _) => break EpisodeEnd::Goal,
            (StateId::TerminalAversive, _) => break EpisodeEnd::Aversive,
            (StateId::Index(next), Some(a)) => {
                if transitions.len() >= step_cap {
                    break EpisodeEnd::StepCap;
                }
                state = next;
                action = a;
            }
            (StateId::Index(_), None) => unreachable!("non-terminal state always has a next action"),
        }
    };

    let outcome = end.outcome();
    agent.end_episode(outcome);
    for hook in hooks.iter_mut() {
        hook.on_episode_end(outcome);
    }
    Ok(Episode { transitions, outcome, end })
}
