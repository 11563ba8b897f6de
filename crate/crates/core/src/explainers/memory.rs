//! Episodic-memory estimator.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::{ActionId, EpisodeHook, Outcome, Transition};

/// Every `(state, action)` the agent has executed, with per-pair visit and
/// success counters.
///
/// The current episode's list is the tail of `history` starting at
/// `episode_start`; finishing an episode empties that view.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodicMemory {
    action_count: usize,
    history: Vec<(usize, ActionId)>,
    episode_start: usize,
    t_total: Vec<u64>,
    t_success: Vec<u64>,
}

impl EpisodicMemory {
    pub fn new(state_count: usize, action_count: usize) -> Self {
        EpisodicMemory {
            action_count,
            history: Vec::new(),
            episode_start: 0,
            t_total: vec![0; state_count * action_count],
            t_success: vec![0; state_count * action_count],
        }
    }

    fn cell(&self, state: usize, action: ActionId) -> usize {
        state * self.action_count + action.0
    }

    /// Appends to the episode list and bumps the visit counter.
    pub fn record(&mut self, state: usize, action: ActionId) {
        let c = self.cell(state, action);
        self.history.push((state, action));
        self.t_total[c] += 1;
    }

    /// Credits every occurrence in the episode list on success, then clears
    /// the list.
    pub fn finalize(&mut self, outcome: Outcome) {
        if outcome == Outcome::Success {
            for i in self.episode_start..self.history.len() {
                let (s, a) = self.history[i];
                let c = self.cell(s, a);
                self.t_success[c] += 1;
            }
        }
        self.episode_start = self.history.len();
    }

    /// `T_s / T_t`, or 0 for a pair never executed.
    pub fn prob(&self, state: usize, action: ActionId) -> f64 {
        let c = self.cell(state, action);
        match self.t_total[c] {
            0 => 0.0,
            total => self.t_success[c] as f64 / total as f64,
        }
    }

    pub fn t_total(&self, state: usize, action: ActionId) -> u64 {
        self.t_total[self.cell(state, action)]
    }

    pub fn t_success(&self, state: usize, action: ActionId) -> u64 {
        self.t_success[self.cell(state, action)]
    }

    /// Pairs recorded in the episode in progress.
    pub fn episode_list(&self) -> &[(usize, ActionId)] {
        &self.history[self.episode_start..]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.t_total.len() / self.action_count.max(1);
        (0..n)
            .flat_map(|s| (0..self.action_count).map(move |a| (s, ActionId(a))))
            .map(|(s, a)| self.prob(s, a))
            .collect()
    }

    /// Stored cells: the transition log plus both counter tables.
    pub fn cells(&self) -> usize {
        self.history.len() + self.t_total.len() + self.t_success.len()
    }
}

impl EpisodeHook for EpisodicMemory {
    fn on_episode_start(&mut self) {
        self.episode_start = self.history.len();
    }

    fn on_step(&mut self, t: &Transition) -> Result<()> {
        self.record(t.state, t.action);
        Ok(())
    }

    fn on_episode_end(&mut self, outcome: Outcome) {
        self.finalize(outcome);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: ActionId = ActionId(1);
    const S: ActionId = ActionId(2);

    #[test]
    fn record_counts_and_lists() {
        let mut m = EpisodicMemory::new(6, 3);
        m.record(0, R);
        assert_eq!(m.t_total(0, R), 1);
        assert_eq!(m.episode_list().len(), 1);
        m.record(0, R);
        assert_eq!(m.t_total(0, R), 2);
        assert_eq!(m.episode_list().len(), 2);
        m.record(1, S);
        assert_eq!(m.t_total(1, S), 1);
        assert_eq!(m.t_total(0, S), 0);
    }

    #[test]
    fn finalize_credits_each_occurrence_on_success() {
        let mut m = EpisodicMemory::new(6, 3);
        m.record(0, S);
        m.record(0, S);
        m.record(0, R);
        m.finalize(Outcome::Success);
        assert_eq!(m.t_success(0, S), 2);
        assert_eq!(m.t_success(0, R), 1);
        assert!(m.episode_list().is_empty());

        m.record(0, R);
        m.finalize(Outcome::Failure);
        assert_eq!(m.t_success(0, R), 1);
        assert_eq!(m.t_total(0, R), 2);
        assert!(m.episode_list().is_empty());
    }

    #[test]
    fn prob_cases() {
        let mut m = EpisodicMemory::new(1, 1);
        assert_eq!(m.prob(0, ActionId(0)), 0.0);
        m.record(0, ActionId(0));
        m.finalize(Outcome::Success);
        assert_eq!(m.prob(0, ActionId(0)), 1.0);
        for i in 0..9 {
            m.record(0, ActionId(0));
            m.finalize(if i < 6 { Outcome::Success } else { Outcome::Failure });
        }
        assert!((m.prob(0, ActionId(0)) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn cells_grow_with_transitions() {
        let mut m = EpisodicMemory::new(2, 2);
        assert_eq!(m.cells(), 8);
        m.record(0, ActionId(0));
        m.record(1, ActionId(1));
        m.finalize(Outcome::Failure);
        assert_eq!(m.cells(), 10);
    }
}
