//! Absorption probabilities of a fixed-policy Markov chain with goal and
//! aversive terminals, solved as a dense linear system.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::mdp::{ActionId, StateId};

const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Environment with fully known transition probabilities.
pub trait TabularModel {
    fn state_count(&self) -> usize;
    fn action_count(&self) -> usize;
    fn outcomes(&self, state: usize, action: ActionId) -> Result<Vec<(StateId, f64)>>;
}

fn check_policy<M: TabularModel>(model: &M, policy: &[Vec<f64>]) -> Result<()> {
    if policy.len() != model.state_count() {
        return Err(CoreError::LengthMismatch { left: policy.len(), right: model.state_count() });
    }
    for row in policy {
        if row.len() != model.action_count() {
            return Err(CoreError::LengthMismatch { left: row.len(), right: model.action_count() });
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidConfig {
                field: "policy",
                reason: "each row must be a probability distribution".into(),
            });
        }
    }
    Ok(())
}

/// Goal-absorption probability per state when following `policy`.
pub fn state_success_probabilities<M: TabularModel>(model: &M, policy: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_policy(model, policy)?;
    let n = model.state_count();
    let mut system = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (s, row) in policy.iter().enumerate() {
        for (a, &pa) in row.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (next, p) in model.outcomes(s, ActionId(a))? {
                match next {
                    StateId::Index(j) => system[(s, j)] -= pa * p,
                    StateId::TerminalGoal => rhs[s] += pa * p,
                    StateId::TerminalAversive => {}
                }
            }
        }
    }
    let solution = system.clone().lu().solve(&rhs).ok_or(CoreError::SingularSystem)?;
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::SingularSystem);
    }
    let residual = (&system * &solution - &rhs).amax();
    if residual > RESIDUAL_TOLERANCE {
        return Err(CoreError::SingularSystem);
    }
    Ok(solution.iter().copied().collect())
}

/// Goal-absorption probability of executing each `(state, action)` once and
/// then following `policy`. Indexed `[state * action_count + action]`.
pub fn success_probabilities<M: TabularModel>(model: &M, policy: &[Vec<f64>]) -> Result<Vec<f64>> {
    let values = state_success_probabilities(model, policy)?;
    let mut out = Vec::with_capacity(model.state_count() * model.action_count());
    for s in 0..model.state_count() {
        for a in 0..model.action_count() {
            let p: f64 = model
                .outcomes(s, ActionId(a))?
                .into_iter()
                .map(|(next, p)| match next {
                    StateId::Index(j) => p * values[j],
                    StateId::TerminalGoal => p,
                    StateId::TerminalAversive => 0.0,
                })
                .sum();
            out.push(p.clamp(0.0, 1.0));
        }
    }
    Ok(out)
}
