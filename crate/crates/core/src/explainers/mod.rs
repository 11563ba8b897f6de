//! Success-probability estimators.
//!
//! * [`memory`]: empirical success ratio from episodic transition counts.
//! * [`learning`]: a second TD table trained on a success flag with no discounting.
//! * [`introspection`]: a closed-form transform of the agent's own Q-values.

pub mod introspection;
pub mod learning;
pub mod memory;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub use introspection::{estimated_distance, introspect, introspect_via_distance, IntrospectionParams};
pub use learning::{p_update, success_flag, LearningEstimator, PTable};
pub use memory::EpisodicMemory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Memory,
    Learning,
    Introspection,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Memory, Method::Learning, Method::Introspection];

    pub fn name(self) -> &'static str {
        match self {
            Method::Memory => "memory",
            Method::Learning => "learning",
            Method::Introspection => "introspection",
        }
    }

    /// Lowercase letter used in correlation labels.
    pub fn letter(self) -> char {
        match self {
            Method::Memory => 'm',
            Method::Learning => 'l',
            Method::Introspection => 'p',
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "memory" | "m" => Ok(Method::Memory),
            "learning" | "l" => Ok(Method::Learning),
            "introspection" | "p" => Ok(Method::Introspection),
            other => Err(CoreError::UnknownName(other.to_string())),
        }
    }
}

/// One method's success probability for every `(state, action)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub method: Method,
    pub state_count: usize,
    pub action_count: usize,
    pub values: Vec<f64>,
}

impl SuccessEstimate {
    pub fn new(method: Method, state_count: usize, action_count: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != state_count * action_count {
            return Err(CoreError::LengthMismatch { left: values.len(), right: state_count * action_count });
        }
        if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CoreError::InvalidConfig { field: "values", reason: "probabilities must lie in [0, 1]".into() });
        }
        Ok(SuccessEstimate { method, state_count, action_count, values })
    }

    pub fn row(&self, state: usize) -> Result<&[f64]> {
        if state >= self.state_count {
            return Err(CoreError::InvalidState { index: state, count: self.state_count });
        }
        Ok(&self.values[state * self.action_count..(state + 1) * self.action_count])
    }
}
