//! Success probability read straight off the Q-values.
//!
//! A converged Q-value behaves like `R^T * gamma^n`, where `n` is the number
//! of actions left before the terminal reward. The estimate maps that onto a
//! base-10 log scale, shifts it into `[0, 1]`, scales by `1 - sigma` and
//! clamps. No state is kept besides the Q-table itself.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntrospectionParams {
    /// Reward for completing the task, `R^T > 0`.
    pub terminal_reward: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl IntrospectionParams {
    pub fn new(terminal_reward: f64, sigma: f64, gamma: f64) -> Result<Self> {
        if !(terminal_reward > 0.0 && terminal_reward.is_finite()) {
            return Err(CoreError::InvalidConfig {
                field: "terminal_reward",
                reason: format!("{terminal_reward} must be > 0"),
            });
        }
        if !(0.0..=1.0).contains(&sigma) {
            return Err(CoreError::InvalidConfig { field: "sigma", reason: format!("{sigma} not in [0, 1]") });
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(CoreError::InvalidConfig { field: "gamma", reason: format!("{gamma} not in (0, 1]") });
        }
        Ok(IntrospectionParams { terminal_reward, sigma, gamma })
    }
}

/// `n = log_gamma(q / R^T)`; `None` when `q <= 0` or the log base is degenerate.
pub fn estimated_distance(q: f64, terminal_reward: f64, gamma: f64) -> Option<f64> {
    if !(q > 0.0 && terminal_reward > 0.0 && gamma > 0.0 && gamma < 1.0) {
        return None;
    }
    Some((q / terminal_reward).ln() / gamma.ln())
}

/// `clamp01((1 - sigma) * (log10(q / R^T) / 2 + 1))`, and 0 for `q <= 0`.
pub fn introspect(q: f64, params: &IntrospectionParams) -> f64 {
    if q.is_nan() || q <= 0.0 {
        return 0.0;
    }
    let raw = (1.0 - params.sigma) * (0.5 * (q / params.terminal_reward).log10() + 1.0);
    raw.clamp(0.0, 1.0)
}

/// The unclamped estimate computed through the distance `n`:
/// `(1 - sigma) * (n / (2 log_gamma 10) + 1)`.
pub fn introspect_via_distance(q: f64, params: &IntrospectionParams) -> Option<f64> {
    let n = estimated_distance(q, params.terminal_reward, params.gamma)?;
    let log_gamma_ten = 10f64.ln() / params.gamma.ln();
    Some((1.0 - params.sigma) * (n / (2.0 * log_gamma_ten) + 1.0))
}
