//! Tabular SARSA with softmax or epsilon-greedy action selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mdp::{ActionId, Agent, Outcome, StateId, Transition};

/// Lower bound for a decaying epsilon.
pub const EPSILON_FLOOR: f64 = 0.01;

/// Dense `state x action` table of action values, zero-initialised.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    state_count: usize,
    action_count: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(state_count: usize, action_count: usize) -> Self {
        QTable { state_count, action_count, values: vec![0.0; state_count * action_count] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let action_count = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * action_count);
        for row in rows {
            if row.len() != action_count {
                return Err(CoreError::LengthMismatch { left: row.len(), right: action_count });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::NonFinite("q table"));
            }
            values.extend_from_slice(row);
        }
        Ok(QTable { state_count: rows.len(), action_count, values })
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn get(&self, state: usize, action: ActionId) -> f64 {
        self.values[state * self.action_count + action.0]
    }

    pub fn set(&mut self, state: usize, action: ActionId, value: f64) {
        self.values[state * self.action_count + action.0] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.action_count..(state + 1) * self.action_count]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bootstrap value of `(next, next_action)`; terminals read as 0.
    pub fn bootstrap(&self, next: StateId, next_action: Option<ActionId>) -> f64 {
        match (next, next_action) {
            (StateId::Index(s), Some(a)) => self.get(s, a),
            _ => 0.0,
        }
    }

    /// Greedy action, lowest index on ties.
    pub fn argmax(&self, state: usize) -> ActionId {
        ActionId(argmax(self.row(state)))
    }

    fn check(&self, state: usize, action: ActionId) -> Result<()> {
        if state >= self.state_count {
            return Err(CoreError::InvalidState { index: state, count: self.state_count });
        }
        if action.0 >= self.action_count {
            return Err(CoreError::InvalidAction { index: action.0, count: self.action_count });
        }
        Ok(())
    }
}

/// Index of the first maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `Q(s,a) <- Q(s,a) + alpha [r + gamma Q(s',a') - Q(s,a)]`. Returns the new value.
#[allow(clippy::too_many_arguments)]
pub fn sarsa_update(
    q: &mut QTable,
    state: usize,
    action: ActionId,
    reward: f64,
    next_state: StateId,
    next_action: Option<ActionId>,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    if !(reward.is_finite() && alpha.is_finite() && gamma.is_finite()) {
        return Err(CoreError::NonFinite("sarsa update"));
    }
    q.check(state, action)?;
    if let (StateId::Index(s), Some(a)) = (next_state, next_action) {
        q.check(s, a)?;
    }
    let current = q.get(state, action);
    let target = reward + gamma * q.bootstrap(next_state, next_action);
    let updated = current + alpha * (target - current);
    if !updated.is_finite() {
        return Err(CoreError::NonFinite("q value"));
    }
    q.set(state, action, updated);
    Ok(updated)
}

/// Boltzmann distribution `exp(Q/tau) / sum exp(Q/tau)`, max-shifted.
pub fn softmax_probabilities(row: &[f64], tau: f64) -> Vec<f64> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = row.iter().map(|&v| ((v - max) / tau).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

pub fn softmax_select<R: Rng + ?Sized>(q: &QTable, state: usize, tau: f64, rng: &mut R) -> ActionId {
    ActionId(sample_index(&softmax_probabilities(q.row(state), tau), rng))
}

pub fn epsilon_greedy_select<R: Rng + ?Sized>(q: &QTable, state: usize, epsilon: f64, rng: &mut R) -> ActionId {
    if rng.random::<f64>() < epsilon {
        ActionId(rng.random_range(0..q.action_count()))
    } else {
        q.argmax(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SelectionPolicy {
    Softmax { tau: f64 },
    /// Epsilon decays multiplicatively after every episode, floored at [`EPSILON_FLOOR`].
    EpsilonGreedy { epsilon: f64, decay: f64 },
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionPolicy::Softmax { tau } if !(tau > 0.0 && tau.is_finite()) => {
                Err(CoreError::InvalidConfig { field: "tau", reason: format!("{tau} must be > 0") })
            }
            SelectionPolicy::EpsilonGreedy { epsilon, .. } if !(0.0..=1.0).contains(&epsilon) => {
                Err(CoreError::InvalidConfig { field: "epsilon", reason: format!("{epsilon} not in [0, 1]") })
            }
            SelectionPolicy::EpsilonGreedy { decay, .. } if !(decay > 0.0 && decay <= 1.0) => {
                Err(CoreError::InvalidConfig { field: "epsilon_decay", reason: format!("{decay} not in (0, 1]") })
            }
            _ => Ok(()),
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, q: &QTable, state: usize, rng: &mut R) -> ActionId {
        match *self {
            SelectionPolicy::Softmax { tau } => softmax_select(q, state, tau, rng),
            SelectionPolicy::EpsilonGreedy { epsilon, .. } => epsilon_greedy_select(q, state, epsilon, rng),
        }
    }

    /// Action distribution at `state`, as used by [`SelectionPolicy::select`].
    pub fn probabilities(&self, q: &QTable, state: usize) -> Vec<f64> {
        match *self {
            SelectionPolicy::Softmax { tau } => softmax_probabilities(q.row(state), tau),
            SelectionPolicy::EpsilonGreedy { epsilon, .. } => {
                let n = q.action_count();
                let mut p = vec![epsilon / n as f64; n];
                p[q.argmax(state).0] += 1.0 - epsilon;
                p
            }
        }
    }

    pub fn decay(&mut self) {
        if let SelectionPolicy::EpsilonGreedy { epsilon, decay } = self {
            *epsilon = (*epsilon * *decay).max(EPSILON_FLOOR.min(*epsilon));
        }
    }
}

/// On-policy SARSA learner.
#[derive(Clone, Debug)]
pub struct SarsaAgent {
    pub q: QTable,
    pub policy: SelectionPolicy,
    pub alpha: f64,
    pub gamma: f64,
}

impl SarsaAgent {
    pub fn new(state_count: usize, action_count: usize, policy: SelectionPolicy, alpha: f64, gamma: f64) -> Self {
        SarsaAgent { q: QTable::new(state_count, action_count), policy, alpha, gamma }
    }
}

impl Agent for SarsaAgent {
    fn choose<R: Rng + ?Sized>(&mut self, state: usize, rng: &mut R) -> ActionId {
        self.policy.select(&self.q, state, rng)
    }

    fn learn(&mut self, t: &Transition) -> Result<()> {
        sarsa_update(&mut self.q, t.state, t.action, t.reward, t.next_state, t.next_action, self.alpha, self.gamma)
            .map(|_| ())
    }

    fn end_episode(&mut self, _outcome: Outcome) {
        self.policy.decay();
    }
}

/// Samples from a fixed per-state action distribution and never learns.
#[derive(Clone, Debug)]
pub struct FrozenPolicy {
    pub rows: Vec<Vec<f64>>,
}

impl FrozenPolicy {
    pub fn softmax(q: &QTable, tau: f64) -> Self {
        FrozenPolicy { rows: (0..q.state_count()).map(|s| softmax_probabilities(q.row(s), tau)).collect() }
    }
}

impl Agent for FrozenPolicy {
    fn choose<R: Rng + ?Sized>(&mut self, state: usize, rng: &mut R) -> ActionId {
        ActionId(sample_index(&self.rows[state], rng))
    }

    fn learn(&mut self, _t: &Transition) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_row(values: &[f64]) -> QTable {
        QTable::from_rows(&[values.to_vec()]).unwrap()
    }

    #[test]
    fn sarsa_update_examples() {
        let mut q = QTable::new(2, 1);
        let v = sarsa_update(&mut q, 0, ActionId(0), 1.0, StateId::TerminalGoal, None, 0.3, 0.9).unwrap();
        assert!((v - 0.3).abs() < 1e-15);

        let mut q = QTable::from_rows(&[vec![0.5], vec![0.6]]).unwrap();
        let v = sarsa_update(&mut q, 0, ActionId(0), 0.0, StateId::Index(1), Some(ActionId(0)), 0.3, 0.9).unwrap();
        // 0.5 + 0.3 * (0.9 * 0.6 - 0.5)
        assert!((v - 0.512).abs() < 1e-12);
        assert_eq!(q.get(1, ActionId(0)), 0.6);

        let v = sarsa_update(&mut q, 0, ActionId(0), 5.0, StateId::Index(1), Some(ActionId(0)), 0.0, 0.9).unwrap();
        assert_eq!(v, 0.512);
    }

    #[test]
    fn sarsa_rejects_non_finite_and_bad_indices() {
        let mut q = QTable::new(2, 2);
        assert!(sarsa_update(&mut q, 0, ActionId(0), f64::NAN, StateId::TerminalGoal, None, 0.3, 0.9).is_err());
        assert!(sarsa_update(&mut q, 0, ActionId(0), f64::INFINITY, StateId::TerminalGoal, None, 0.3, 0.9).is_err());
        assert!(sarsa_update(&mut q, 2, ActionId(0), 0.0, StateId::TerminalGoal, None, 0.3, 0.9).is_err());
        assert!(sarsa_update(&mut q, 0, ActionId(2), 0.0, StateId::TerminalGoal, None, 0.3, 0.9).is_err());
    }

    #[test]
    fn softmax_reference_value() {
        let p = softmax_probabilities(&[1.0, 0.0, 0.0], 0.25);
        let e4 = 4f64.exp();
        assert!((p[0] - e4 / (e4 + 2.0)).abs() < 1e-12);
        assert!((p[0] - 0.9647).abs() < 1e-4);
    }

    #[test]
    fn softmax_uniform_on_equal_row() {
        let p = softmax_probabilities(&[0.3, 0.3, 0.3, 0.3], 0.25);
        for v in p {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_cold_limit_is_greedy() {
        let q = single_row(&[0.1, 0.2, 0.15]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let hits = (0..10_000).filter(|_| softmax_select(&q, 0, 1e-6, &mut rng) == ActionId(1)).count();
        assert!(hits as f64 / 10_000.0 > 0.999);
    }

    #[test]
    fn epsilon_greedy_mixture() {
        let q = single_row(&[0.0, 1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let hits = (0..n).filter(|_| epsilon_greedy_select(&q, 0, 0.5, &mut rng) == ActionId(1)).count();
        assert!((hits as f64 / n as f64 - 0.625).abs() < 0.005);
        assert!((0..1000).all(|_| epsilon_greedy_select(&q, 0, 0.0, &mut rng) == ActionId(1)));

        let counts = (0..n).fold([0usize; 4], |mut c, _| {
            c[epsilon_greedy_select(&q, 0, 1.0, &mut rng).0] += 1;
            c
        });
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.5, 0.7, 0.7]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn epsilon_decays_to_floor() {
        let mut p = SelectionPolicy::EpsilonGreedy { epsilon: 1.0, decay: 0.5 };
        for _ in 0..20 {
            p.decay();
        }
        assert_eq!(p, SelectionPolicy::EpsilonGreedy { epsilon: EPSILON_FLOOR, decay: 0.5 });
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one(row in prop::collection::vec(-50.0f64..50.0, 1..8), tau in 0.01f64..10.0) {
            let total: f64 = softmax_probabilities(&row, tau).iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn softmax_shift_invariant(row in prop::collection::vec(-5.0f64..5.0, 2..6), shift in -100.0f64..100.0) {
            let shifted: Vec<f64> = row.iter().map(|v| v + shift).collect();
            let a = softmax_probabilities(&row, 0.25);
            let b = softmax_probabilities(&shifted, 0.25);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
