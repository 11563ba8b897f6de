//! Task environments.

pub mod nav;
pub mod sort;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mdp::{ActionId, Environment, StepOutcome};

pub use nav::{NavAction, NavEnv};
pub use sort::{SortAction, SortEnv, SortState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Navigation,
    Sorting,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Navigation => "navigation",
            EnvKind::Sorting => "sorting",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "navigation" | "nav" => Ok(EnvKind::Navigation),
            "sorting" | "sort" => Ok(EnvKind::Sorting),
            other => Err(CoreError::UnknownName(other.to_string())),
        }
    }

    pub fn state_count(self) -> usize {
        match self {
            EnvKind::Navigation => nav::ROOM_COUNT,
            EnvKind::Sorting => sort::STATE_COUNT,
        }
    }

    pub fn action_count(self) -> usize {
        match self {
            EnvKind::Navigation => nav::ACTION_COUNT,
            EnvKind::Sorting => sort::ACTION_COUNT,
        }
    }

    pub fn initial_state(self) -> usize {
        match self {
            EnvKind::Navigation => nav::INITIAL_ROOM,
            EnvKind::Sorting => SortState::initial().index(),
        }
    }

    /// Short machine-readable action name (`a_L`, `grab`, ...).
    pub fn action_label(self, action: ActionId) -> Result<&'static str> {
        Ok(match self {
            EnvKind::Navigation => NavAction::from_id(action)?.label(),
            EnvKind::Sorting => SortAction::from_id(action)?.label(),
        })
    }

    /// One uppercase letter per action, used in correlation labels.
    pub fn action_letter(self, action: ActionId) -> Result<char> {
        Ok(match self {
            EnvKind::Navigation => NavAction::from_id(action)?.letter(),
            EnvKind::Sorting => SortAction::from_id(action)?.letter(),
        })
    }

    /// Verb phrase for explanation text.
    pub fn action_phrase(self, action: ActionId) -> Result<&'static str> {
        Ok(match self {
            EnvKind::Navigation => NavAction::from_id(action)?.phrase(),
            EnvKind::Sorting => SortAction::from_id(action)?.phrase(),
        })
    }

    pub fn state_label(self, state: usize) -> Result<String> {
        if state >= self.state_count() {
            return Err(CoreError::InvalidState { index: state, count: self.state_count() });
        }
        Ok(format!("s{state}"))
    }

    /// Accepts `a_L`/`a_R`/`a_S` (also `L`, `left`, ...) for navigation and
    /// `grab`/`drop`/`move_left`/`move_right` for sorting, or a bare index.
    pub fn parse_action(self, name: &str) -> Result<ActionId> {
        let lowered = name.trim().to_ascii_lowercase();
        let found = match self {
            EnvKind::Navigation => match lowered.as_str() {
                "a_l" | "l" | "left" => Some(NavAction::Left.id()),
                "a_r" | "r" | "right" => Some(NavAction::Right.id()),
                "a_s" | "s" | "stay" => Some(NavAction::Stay.id()),
                _ => None,
            },
            EnvKind::Sorting => match lowered.as_str() {
                "grab" => Some(SortAction::Grab.id()),
                "drop" => Some(SortAction::Drop.id()),
                "move_right" | "right" => Some(SortAction::MoveRight.id()),
                "move_left" | "left" => Some(SortAction::MoveLeft.id()),
                _ => None,
            },
        };
        found
            .or_else(|| lowered.parse::<usize>().ok().filter(|&i| i < self.action_count()).map(ActionId))
            .ok_or_else(|| CoreError::UnknownName(name.to_string()))
    }

    /// Accepts `s<index>` or a bare index.
    pub fn parse_state(self, name: &str) -> Result<usize> {
        let trimmed = name.trim();
        let digits = trimmed.strip_prefix('s').unwrap_or(trimmed);
        digits
            .parse::<usize>()
            .ok()
            .filter(|&i| i < self.state_count())
            .ok_or_else(|| CoreError::UnknownName(name.to_string()))
    }
}

/// Either task behind one [`Environment`] implementation.
#[derive(Clone, Debug)]
pub enum AnyEnv {
    Nav(NavEnv),
    Sort(SortEnv),
}

impl AnyEnv {
    pub fn new(kind: EnvKind, sigma: f64) -> Result<Self> {
        Ok(match kind {
            EnvKind::Navigation => AnyEnv::Nav(NavEnv::new(sigma)?),
            EnvKind::Sorting => AnyEnv::Sort(SortEnv::new()),
        })
    }
}

impl Environment for AnyEnv {
    fn state_count(&self) -> usize {
        match self {
            AnyEnv::Nav(e) => e.state_count(),
            AnyEnv::Sort(e) => e.state_count(),
        }
    }

    fn action_count(&self) -> usize {
        match self {
            AnyEnv::Nav(e) => e.action_count(),
            AnyEnv::Sort(e) => e.action_count(),
        }
    }

    fn terminal_reward(&self) -> f64 {
        match self {
            AnyEnv::Nav(e) => e.terminal_reward(),
            AnyEnv::Sort(e) => e.terminal_reward(),
        }
    }

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        match self {
            AnyEnv::Nav(e) => e.reset(rng),
            AnyEnv::Sort(e) => e.reset(rng),
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, action: ActionId, rng: &mut R) -> Result<StepOutcome> {
        match self {
            AnyEnv::Nav(e) => e.step(action, rng),
            AnyEnv::Sort(e) => e.step(action, rng),
        }
    }
}
