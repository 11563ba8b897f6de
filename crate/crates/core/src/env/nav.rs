//! Six-room navigation task.
//!
//! The robot starts in room 0 and reaches the goal through one of two
//! symmetric corridors (0-1-3 or 0-2-4). Rooms 1 to 4 each have one exit that
//! leaves the level. Entering room 5 completes the task, so the `a_R` move
//! from room 3 and the `a_L` move from room 4 lead straight to the goal.
//!
//! With stochasticity `sigma`, the intended outcome happens with probability
//! `1 - sigma`; otherwise the outcome of one of the two other actions from the
//! same room is taken, uniformly.

use rand::Rng;
use serde::Serialize;

use crate::absorption::{self, TabularModel};
use crate::error::{CoreError, Result};
use crate::mdp::{ActionId, Environment, StateId, StepOutcome};

pub const ROOM_COUNT: usize = 6;
pub const ACTION_COUNT: usize = 3;
pub const INITIAL_ROOM: usize = 0;
pub const GOAL_REWARD: f64 = 1.0;
pub const AVERSIVE_REWARD: f64 = -1.0;

const GOAL: StateId = StateId::TerminalGoal;
const AVERSIVE: StateId = StateId::TerminalAversive;

/// Intended outcome per room, indexed by `[a_L, a_R, a_S]`.
const TRANSITIONS: [[StateId; ACTION_COUNT]; ROOM_COUNT] = [
    [StateId::Index(1), StateId::Index(2), StateId::Index(0)],
    [AVERSIVE, StateId::Index(3), StateId::Index(1)],
    [StateId::Index(4), AVERSIVE, StateId::Index(2)],
    [AVERSIVE, GOAL, StateId::Index(3)],
    [GOAL, AVERSIVE, StateId::Index(4)],
    [GOAL, GOAL, GOAL],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NavAction {
    Left,
    Right,
    Stay,
}

impl NavAction {
    pub const ALL: [NavAction; ACTION_COUNT] = [NavAction::Left, NavAction::Right, NavAction::Stay];

    pub fn id(self) -> ActionId {
        ActionId(self as usize)
    }

    pub fn from_id(id: ActionId) -> Result<Self> {
        Self::ALL
            .get(id.0)
            .copied()
            .ok_or(CoreError::InvalidAction { index: id.0, count: ACTION_COUNT })
    }

    pub fn label(self) -> &'static str {
        match self {
            NavAction::Left => "a_L",
            NavAction::Right => "a_R",
            NavAction::Stay => "a_S",
        }
    }

    pub fn letter(self) -> char {
        match self {
            NavAction::Left => 'L',
            NavAction::Right => 'R',
            NavAction::Stay => 'S',
        }
    }

    pub fn phrase(self) -> &'static str {
        match self {
            NavAction::Left => "move to the left",
            NavAction::Right => "move to the right",
            NavAction::Stay => "stay in the same room",
        }
    }
}

/// Intended outcome of `action` from `room` under deterministic transitions.
pub fn intended_outcome(room: usize, action: NavAction) -> Result<StateId> {
    TRANSITIONS
        .get(room)
        .map(|row| row[action as usize])
        .ok_or(CoreError::InvalidState { index: room, count: ROOM_COUNT })
}

/// +1 on the goal, -1 on the aversive region, 0 for interior moves.
pub fn nav_reward(reached: StateId) -> f64 {
    match reached {
        StateId::TerminalGoal => GOAL_REWARD,
        StateId::TerminalAversive => AVERSIVE_REWARD,
        StateId::Index(_) => 0.0,
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&sigma) {
        Ok(())
    } else {
        Err(CoreError::InvalidConfig { field: "sigma", reason: format!("{sigma} not in [0, 1]") })
    }
}

fn source_room(state: StateId) -> Result<usize> {
    match state {
        StateId::Index(room) if room < ROOM_COUNT => Ok(room),
        StateId::Index(room) => Err(CoreError::InvalidState { index: room, count: ROOM_COUNT }),
        _ => Err(CoreError::TerminalSource),
    }
}

/// Samples the outcome of `action` from `state`.
///
/// With `sigma == 0` no randomness is consumed.
pub fn nav_transition<R: Rng + ?Sized>(
    state: StateId,
    action: NavAction,
    sigma: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    check_sigma(sigma)?;
    let room = source_room(state)?;
    let mut taken = action;
    if sigma > 0.0 && rng.random::<f64>() < sigma {
        let others: Vec<NavAction> = NavAction::ALL.into_iter().filter(|&a| a != action).collect();
        taken = others[rng.random_range(0..others.len())];
    }
    let next = TRANSITIONS[room][taken as usize];
    Ok(StepOutcome::new(next, nav_reward(next)))
}

/// Outcome distribution of `action` from `room`; duplicate outcomes are merged.
pub fn outcome_distribution(room: usize, action: NavAction, sigma: f64) -> Result<Vec<(StateId, f64)>> {
    check_sigma(sigma)?;
    source_room(StateId::Index(room))?;
    let mut dist: Vec<(StateId, f64)> = Vec::with_capacity(ACTION_COUNT);
    let mut add = |s: StateId, p: f64| {
        if p == 0.0 {
            return;
        }
        match dist.iter_mut().find(|(t, _)| *t == s) {
            Some(entry) => entry.1 += p,
            None => dist.push((s, p)),
        }
    };
    for a in NavAction::ALL {
        let p = if a == action { 1.0 - sigma } else { sigma / 2.0 };
        add(TRANSITIONS[room][a as usize], p);
    }
    Ok(dist)
}

/// The navigation task as a stateful [`Environment`].
#[derive(Clone, Debug)]
pub struct NavEnv {
    sigma: f64,
    room: Option<usize>,
}

impl NavEnv {
    pub fn new(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(NavEnv { sigma, room: None })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Environment for NavEnv {
    fn state_count(&self) -> usize {
        ROOM_COUNT
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn terminal_reward(&self) -> f64 {
        GOAL_REWARD
    }

    fn reset<R: Rng + ?Sized>(&mut self, _rng: &mut R) -> usize {
        self.room = Some(INITIAL_ROOM);
        INITIAL_ROOM
    }

    fn step<R: Rng + ?Sized>(&mut self, action: ActionId, rng: &mut R) -> Result<StepOutcome> {
        let room = self.room.ok_or(CoreError::TerminalSource)?;
        let outcome = nav_transition(StateId::Index(room), NavAction::from_id(action)?, self.sigma, rng)?;
        self.room = outcome.next_state.index();
        Ok(outcome)
    }
}

impl TabularModel for NavEnv {
    fn state_count(&self) -> usize {
        ROOM_COUNT
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn outcomes(&self, state: usize, action: ActionId) -> Result<Vec<(StateId, f64)>> {
        outcome_distribution(state, NavAction::from_id(action)?, self.sigma)
    }
}

/// Probability of reaching the goal after executing each `(room, action)`
/// and then following `policy`, indexed `[room * ACTION_COUNT + action]`.
///
/// `policy` holds one action distribution per room.
pub fn exact_success_probability(policy: &[Vec<f64>], sigma: f64) -> Result<Vec<f64>> {
    let env = NavEnv::new(sigma)?;
    absorption::success_probabilities(&env, policy)
}

#[derive(Serialize)]
struct TableEntry {
    room: usize,
    action: &'static str,
    outcome: String,
    reward: f64,
}

/// The intended-outcome table as JSON.
pub fn transition_table_json() -> String {
    let entries: Vec<TableEntry> = (0..ROOM_COUNT)
        .flat_map(|room| {
            NavAction::ALL.into_iter().map(move |a| {
                let next = TRANSITIONS[room][a as usize];
                TableEntry {
                    room,
                    action: a.label(),
                    outcome: match next {
                        StateId::Index(r) => format!("s{r}"),
                        StateId::TerminalGoal => "goal".to_string(),
                        StateId::TerminalAversive => "aversive".to_string(),
                    },
                    reward: nav_reward(next),
                }
            })
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("table serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn deterministic_moves_anchor_points() {
        let mut r = rng();
        let out = nav_transition(StateId::Index(0), NavAction::Left, 0.0, &mut r).unwrap();
        assert_eq!(out.next_state, StateId::Index(1));
        let out = nav_transition(StateId::Index(1), NavAction::Right, 0.0, &mut r).unwrap();
        assert_eq!(out.next_state, StateId::Index(3));
        let out = nav_transition(StateId::Index(1), NavAction::Left, 0.0, &mut r).unwrap();
        assert_eq!(out.next_state, StateId::TerminalAversive);
        assert_eq!(out.reward, -1.0);
    }

    #[test]
    fn sigma_one_splits_between_other_actions() {
        let mut r = rng();
        let n = 200_000;
        let (mut s0, mut s2) = (0usize, 0usize);
        for _ in 0..n {
            match nav_transition(StateId::Index(0), NavAction::Left, 1.0, &mut r).unwrap().next_state {
                StateId::Index(0) => s0 += 1,
                StateId::Index(2) => s2 += 1,
                other => panic!("unexpected outcome {other:?}"),
            }
        }
        assert!((s0 as f64 / n as f64 - 0.5).abs() < 0.005);
        assert!((s2 as f64 / n as f64 - 0.5).abs() < 0.005);
    }

    #[test]
    fn rewards_follow_terminal_kind() {
        assert_eq!(nav_reward(StateId::TerminalGoal), 1.0);
        assert_eq!(nav_reward(StateId::TerminalAversive), -1.0);
        assert_eq!(nav_reward(StateId::Index(1)), 0.0);
    }

    #[test]
    fn intermediate_rooms_have_one_aversive_exit() {
        for room in 1..=4 {
            let exits = NavAction::ALL
                .iter()
                .filter(|&&a| intended_outcome(room, a).unwrap() == StateId::TerminalAversive)
                .count();
            assert_eq!(exits, 1, "room {room}");
        }
    }

    #[test]
    fn terminal_source_is_rejected() {
        let mut r = rng();
        assert_eq!(
            nav_transition(StateId::TerminalGoal, NavAction::Left, 0.0, &mut r),
            Err(CoreError::TerminalSource)
        );
        assert!(nav_transition(StateId::Index(6), NavAction::Left, 0.0, &mut r).is_err());
        assert!(nav_transition(StateId::Index(0), NavAction::Left, 1.5, &mut r).is_err());
    }

    #[test]
    fn mixture_sums_to_one_with_expected_support() {
        for sigma in [0.0, 0.1, 0.5, 1.0] {
            for room in 0..ROOM_COUNT {
                for a in NavAction::ALL {
                    let dist = outcome_distribution(room, a, sigma).unwrap();
                    let total: f64 = dist.iter().map(|(_, p)| p).sum();
                    assert!((total - 1.0).abs() < 1e-12);
                    for (s, _) in &dist {
                        assert!(NavAction::ALL.iter().any(|&b| TRANSITIONS[room][b as usize] == *s));
                    }
                }
            }
        }
    }

    #[test]
    fn table_json_lists_every_pair() {
        let v: serde_json::Value = serde_json::from_str(&transition_table_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), ROOM_COUNT * ACTION_COUNT);
    }

    fn greedy_shortest() -> Vec<Vec<f64>> {
        let pick = |a: NavAction| {
            let mut row = vec![0.0; ACTION_COUNT];
            row[a.id().0] = 1.0;
            row
        };
        use NavAction::*;
        vec![pick(Left), pick(Right), pick(Left), pick(Right), pick(Left), pick(Left)]
    }

    #[test]
    fn exact_probability_deterministic() {
        let p = exact_success_probability(&greedy_shortest(), 0.0).unwrap();
        assert_eq!(p[0], 1.0);
        assert_eq!(p[ACTION_COUNT + NavAction::Left.id().0], 0.0);
        assert_eq!(p[ACTION_COUNT + NavAction::Right.id().0], 1.0);
    }

    #[test]
    fn greedy_values_non_increasing_in_sigma() {
        let policy = greedy_shortest();
        let on_path = |p: &[f64]| -> Vec<f64> {
            (0..ROOM_COUNT)
                .map(|s| p[s * ACTION_COUNT + policy[s].iter().position(|w| *w == 1.0).unwrap()])
                .collect()
        };
        let mut prev = on_path(&exact_success_probability(&policy, 0.0).unwrap());
        for k in 1..=10 {
            let all = exact_success_probability(&policy, k as f64 / 10.0).unwrap();
            assert!(all.iter().all(|v| (0.0..=1.0).contains(v)));
            let next = on_path(&all);
            for (a, b) in prev.iter().zip(&next) {
                assert!(*b <= a + 1e-12);
            }
            prev = next;
        }
    }

    #[test]
    fn exact_probability_matches_simulation() {
        let sigma = 0.1;
        let policy = greedy_shortest();
        let exact = exact_success_probability(&policy, sigma).unwrap()[0];
        let mut env = NavEnv::new(sigma).unwrap();
        let mut rng = rng();
        let n = 200_000;
        let mut wins = 0;
        for _ in 0..n {
            env.reset(&mut rng);
            let mut action = NavAction::Left.id();
            loop {
                let out = env.step(action, &mut rng).unwrap();
                match out.next_state {
                    StateId::Index(next) => {
                        action = ActionId(policy[next].iter().position(|p| *p == 1.0).unwrap());
                    }
                    StateId::TerminalGoal => {
                        wins += 1;
                        break;
                    }
                    StateId::TerminalAversive => break,
                }
            }
        }
        assert!((wins as f64 / n as f64 - exact).abs() < 0.005);
    }
}
