//! Learned success probabilities (the P-table).
//!
//! Trained alongside Q with the same learning rate, but on a binary success
//! flag instead of the reward and with no discounting, so each entry tracks
//! the probability of eventually completing the task.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mdp::{ActionId, EpisodeHook, StateId, StepOutcome, Transition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PTable {
    state_count: usize,
    action_count: usize,
    values: Vec<f64>,
}

impl PTable {
    pub fn new(state_count: usize, action_count: usize) -> Self {
        PTable { state_count, action_count, values: vec![0.0; state_count * action_count] }
    }

    pub fn get(&self, state: usize, action: ActionId) -> f64 {
        self.values[state * self.action_count + action.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }
}

/// 1 when the step completed the task, else 0.
pub fn success_flag(outcome: &StepOutcome) -> f64 {
    if outcome.reached_goal() {
        1.0
    } else {
        0.0
    }
}

/// `P(s,a) <- P(s,a) + alpha [phi + P(s',a') - P(s,a)]`, terminals read as 0.
pub fn p_update(
    p: &mut PTable,
    state: usize,
    action: ActionId,
    phi: f64,
    next_state: StateId,
    next_action: Option<ActionId>,
    alpha: f64,
) -> Result<f64> {
    if !(phi.is_finite() && alpha.is_finite()) {
        return Err(CoreError::NonFinite("p update"));
    }
    if state >= p.state_count {
        return Err(CoreError::InvalidState { index: state, count: p.state_count });
    }
    if action.0 >= p.action_count {
        return Err(CoreError::InvalidAction { index: action.0, count: p.action_count });
    }
    let next = match (next_state, next_action) {
        (StateId::Index(s), Some(a)) if s < p.state_count && a.0 < p.action_count => p.get(s, a),
        (StateId::Index(s), Some(_)) if s >= p.state_count => {
            return Err(CoreError::InvalidState { index: s, count: p.state_count })
        }
        (StateId::Index(_), Some(a)) => {
            return Err(CoreError::InvalidAction { index: a.0, count: p.action_count })
        }
        _ => 0.0,
    };
    let cell = state * p.action_count + action.0;
    let current = p.values[cell];
    let updated = current + alpha * (phi + next - current);
    p.values[cell] = updated;
    Ok(updated)
}

/// Runs [`p_update`] on every transition of the training loop.
#[derive(Clone, Debug)]
pub struct LearningEstimator {
    pub table: PTable,
    pub alpha: f64,
}

impl LearningEstimator {
    pub fn new(state_count: usize, action_count: usize, alpha: f64) -> Self {
        LearningEstimator { table: PTable::new(state_count, action_count), alpha }
    }
}

impl EpisodeHook for LearningEstimator {
    fn on_step(&mut self, t: &Transition) -> Result<()> {
        let phi = if t.reached_goal() { 1.0 } else { 0.0 };
        p_update(&mut self.table, t.state, t.action, phi, t.next_state, t.next_action, self.alpha).map(|_| ())
    }
}
