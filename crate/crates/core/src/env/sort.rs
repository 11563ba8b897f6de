//! Symbolic object-sorting task.
//!
//! A robot arm moves six objects (three of class A, three of class B) from a
//! central table to two side tables: class A belongs on the left, class B on
//! the right. The arm is always at one of three slots. A successful drop on a
//! side table returns the arm to the centre, so each object costs exactly
//! one grab, one move and one drop, and the shortest successful episode is
//! 18 steps long.
//!
//! Rewards: +0.4 per correctly sorted object, +1 for the sixth (which ends the
//! episode), -1 for a wrong-side drop (which also ends it), and an extra
//! -0.01 on every step after the eighteenth.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mdp::{ActionId, Environment, StateId, StepOutcome};

pub const OBJECTS_PER_CLASS: u8 = 3;
pub const TOTAL_OBJECTS: u8 = 2 * OBJECTS_PER_CLASS;
pub const ACTION_COUNT: usize = 4;
pub const MIN_STEPS: u32 = 18;
pub const SORTED_REWARD: f64 = 0.4;
pub const COMPLETION_REWARD: f64 = 1.0;
pub const WRONG_REWARD: f64 = -1.0;
pub const LATE_PENALTY: f64 = -0.01;
/// Number of dense state indices (`3 arm slots * 3 pad states * 4 * 4`).
pub const STATE_COUNT: usize = 3 * 3 * 4 * 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArmPosition {
    Center,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Held {
    Nothing,
    ClassA,
    ClassB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SortAction {
    Grab,
    Drop,
    MoveRight,
    MoveLeft,
}

impl SortAction {
    pub const ALL: [SortAction; ACTION_COUNT] =
        [SortAction::Grab, SortAction::Drop, SortAction::MoveRight, SortAction::MoveLeft];

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
            SortAction::Grab => "grab",
            SortAction::Drop => "drop",
            SortAction::MoveRight => "move_right",
            SortAction::MoveLeft => "move_left",
        }
    }

    pub fn letter(self) -> char {
        match self {
            SortAction::Grab => 'G',
            SortAction::Drop => 'D',
            SortAction::MoveRight => 'R',
            SortAction::MoveLeft => 'L',
        }
    }

    pub fn phrase(self) -> &'static str {
        match self {
            SortAction::Grab => "grab an object",
            SortAction::Drop => "drop the object",
            SortAction::MoveRight => "move right",
            SortAction::MoveLeft => "move left",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SortState {
    pub arm: ArmPosition,
    pub holding: Held,
    /// Objects still on the central table, `[class A, class B]`.
    pub remaining: [u8; 2],
    pub sorted_ok: u8,
    pub step: u32,
}

impl SortState {
    pub fn initial() -> Self {
        SortState {
            arm: ArmPosition::Center,
            holding: Held::Nothing,
            remaining: [OBJECTS_PER_CLASS; 2],
            sorted_ok: 0,
            step: 0,
        }
    }

    /// Dense index of the task-relevant factors; the step counter is ignored.
    ///
    /// Layout: `((arm * 3 + holding) * 4 + taken_a) * 4 + taken_b`, where
    /// `taken_x` counts class-x objects no longer on the central table and
    /// arm/holding use declaration order. The initial state is index 0.
    pub fn index(&self) -> usize {
        let arm = self.arm as usize;
        let held = self.holding as usize;
        let taken_a = (OBJECTS_PER_CLASS - self.remaining[0]) as usize;
        let taken_b = (OBJECTS_PER_CLASS - self.remaining[1]) as usize;
        ((arm * 3 + held) * 4 + taken_a) * 4 + taken_b
    }

    /// Inverse of [`SortState::index`] with the step counter set to 0.
    /// Returns `None` for indices that do not encode a live state.
    pub fn from_index(index: usize) -> Option<Self> {
        if index >= STATE_COUNT {
            return None;
        }
        let taken_b = (index % 4) as u8;
        let taken_a = ((index / 4) % 4) as u8;
        let held = (index / 16) % 3;
        let arm = index / 48;
        let sorted_ok = (taken_a + taken_b).checked_sub(u8::from(held != 0))?;
        let state = SortState {
            arm: [ArmPosition::Center, ArmPosition::Left, ArmPosition::Right][arm],
            holding: [Held::Nothing, Held::ClassA, Held::ClassB][held],
            remaining: [OBJECTS_PER_CLASS - taken_a, OBJECTS_PER_CLASS - taken_b],
            sorted_ok,
            step: 0,
        };
        state.is_live().then_some(state)
    }

    /// Consistent and non-terminal: the held object came off the table and
    /// at least one object is not yet sorted.
    pub fn is_live(&self) -> bool {
        let held_ok = match self.holding {
            Held::Nothing => true,
            Held::ClassA => self.remaining[0] < OBJECTS_PER_CLASS,
            Held::ClassB => self.remaining[1] < OBJECTS_PER_CLASS,
        };
        held_ok
            && self.remaining.iter().all(|&r| r <= OBJECTS_PER_CLASS)
            && self.sorted_ok < TOTAL_OBJECTS
            && self.accounted() == TOTAL_OBJECTS
    }

    /// Objects on the table, on the pad and sorted.
    pub fn accounted(&self) -> u8 {
        self.remaining[0] + self.remaining[1] + u8::from(self.holding != Held::Nothing) + self.sorted_ok
    }

    pub fn describe(&self) -> String {
        let arm = match self.arm {
            ArmPosition::Center => "center",
            ArmPosition::Left => "left",
            ArmPosition::Right => "right",
        };
        let held = match self.holding {
            Held::Nothing => "empty",
            Held::ClassA => "A",
            Held::ClassB => "B",
        };
        format!("arm {arm}, pad {held}, remaining A{} B{}", self.remaining[0], self.remaining[1])
    }
}

/// Every live state, enumerated from the index constraints.
pub fn live_states() -> Vec<SortState> {
    (0..STATE_COUNT).filter_map(SortState::from_index).collect()
}

/// Applies `action`. Returns the successor (meaningless when the outcome is
/// terminal) and the step outcome with its reward.
pub fn sort_transition<R: Rng + ?Sized>(
    state: &SortState,
    action: SortAction,
    rng: &mut R,
) -> Result<(SortState, StepOutcome)> {
    if !state.is_live() {
        return Err(CoreError::TerminalSource);
    }
    let mut next = *state;
    next.step += 1;
    let late = if next.step > MIN_STEPS { LATE_PENALTY } else { 0.0 };

    let mut reward = 0.0;
    let mut terminal = None;
    match action {
        SortAction::Grab => {
            if state.arm == ArmPosition::Center && state.holding == Held::Nothing {
                let available: Vec<usize> = (0..2).filter(|&c| state.remaining[c] > 0).collect();
                let class = available[rng.random_range(0..available.len())];
                next.remaining[class] -= 1;
                next.holding = if class == 0 { Held::ClassA } else { Held::ClassB };
            }
        }
        SortAction::Drop => {
            let target = match state.holding {
                Held::ClassA => Some(ArmPosition::Left),
                Held::ClassB => Some(ArmPosition::Right),
                Held::Nothing => None,
            };
            if let Some(target) = target {
                if state.arm == target {
                    next.holding = Held::Nothing;
                    next.sorted_ok += 1;
                    next.arm = ArmPosition::Center;
                    if next.sorted_ok == TOTAL_OBJECTS {
                        reward = COMPLETION_REWARD;
                        terminal = Some(StateId::TerminalGoal);
                    } else {
                        reward = SORTED_REWARD;
                    }
                } else if state.arm != ArmPosition::Center {
                    next.holding = Held::Nothing;
                    reward = WRONG_REWARD;
                    terminal = Some(StateId::TerminalAversive);
                }
            }
        }
        SortAction::MoveRight => {
            next.arm = match state.arm {
                ArmPosition::Left => ArmPosition::Center,
                _ => ArmPosition::Right,
            };
        }
        SortAction::MoveLeft => {
            next.arm = match state.arm {
                ArmPosition::Right => ArmPosition::Center,
                _ => ArmPosition::Left,
            };
        }
    }
    let reached = terminal.unwrap_or(StateId::Index(next.index()));
    Ok((next, StepOutcome::new(reached, reward + late)))
}

/// The sorting task as a stateful [`Environment`].
#[derive(Clone, Debug, Default)]
pub struct SortEnv {
    state: Option<SortState>,
}

impl SortEnv {
    pub fn new() -> Self {
        SortEnv::default()
    }

    pub fn state(&self) -> Option<&SortState> {
        self.state.as_ref()
    }
}

impl Environment for SortEnv {
    fn state_count(&self) -> usize {
        STATE_COUNT
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn terminal_reward(&self) -> f64 {
        COMPLETION_REWARD
    }

    fn reset<R: Rng + ?Sized>(&mut self, _rng: &mut R) -> usize {
        let s = SortState::initial();
        self.state = Some(s);
        s.index()
    }

    fn step<R: Rng + ?Sized>(&mut self, action: ActionId, rng: &mut R) -> Result<StepOutcome> {
        let state = self.state.ok_or(CoreError::TerminalSource)?;
        let (next, outcome) = sort_transition(&state, SortAction::from_id(action)?, rng)?;
        self.state = (!outcome.next_state.is_terminal()).then_some(next);
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashSet, VecDeque};

    fn play_optimal(rng: &mut ChaCha8Rng) -> (f64, u32, StateId) {
        let mut s = SortState::initial();
        let mut total = 0.0;
        loop {
            let action = match (s.holding, s.arm) {
                (Held::Nothing, _) => SortAction::Grab,
                (Held::ClassA, ArmPosition::Center) => SortAction::MoveLeft,
                (Held::ClassB, ArmPosition::Center) => SortAction::MoveRight,
                _ => SortAction::Drop,
            };
            let (next, out) = sort_transition(&s, action, rng).unwrap();
            total += out.reward;
            if out.next_state.is_terminal() {
                return (total, next.step, out.next_state);
            }
            s = next;
        }
    }

    #[test]
    fn scripted_optimal_episode_returns_three_in_eighteen_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (total, steps, end) = play_optimal(&mut rng);
            assert_eq!(end, StateId::TerminalGoal);
            assert_eq!(steps, MIN_STEPS);
            assert!((total - 3.0).abs() < 1e-12, "{total}");
        }
    }

    #[test]
    fn first_correct_drop_pays_point_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SortState { arm: ArmPosition::Left, holding: Held::ClassA, remaining: [2, 3], sorted_ok: 0, step: 2 };
        let (next, out) = sort_transition(&s, SortAction::Drop, &mut rng).unwrap();
        assert_eq!(out.reward, SORTED_REWARD);
        assert_eq!(next.arm, ArmPosition::Center);
        assert_eq!(next.sorted_ok, 1);
    }

    #[test]
    fn wrong_side_drop_ends_episode() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SortState { arm: ArmPosition::Right, holding: Held::ClassA, remaining: [2, 3], sorted_ok: 0, step: 2 };
        let (_, out) = sort_transition(&s, SortAction::Drop, &mut rng).unwrap();
        assert_eq!(out.reward, WRONG_REWARD);
        assert_eq!(out.next_state, StateId::TerminalAversive);
    }

    #[test]
    fn late_steps_pay_penalty_on_top() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = SortState { arm: ArmPosition::Left, holding: Held::ClassA, remaining: [0, 0], sorted_ok: 5, step: 30 };
        let (_, out) = sort_transition(&s, SortAction::Drop, &mut rng).unwrap();
        assert!((out.reward - (COMPLETION_REWARD + LATE_PENALTY)).abs() < 1e-15);
        assert_eq!(out.next_state, StateId::TerminalGoal);

        let s = SortState { step: 18, ..SortState::initial() };
        let (_, out) = sort_transition(&s, SortAction::MoveLeft, &mut rng).unwrap();
        assert_eq!(out.reward, LATE_PENALTY);
    }

    #[test]
    fn no_ops_only_advance_the_counter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let holding = SortState { holding: Held::ClassB, remaining: [3, 2], ..SortState::initial() };
        for (s, a) in [
            (holding, SortAction::Grab),
            (holding, SortAction::Drop),
            (SortState::initial(), SortAction::Drop),
            (SortState { arm: ArmPosition::Left, ..SortState::initial() }, SortAction::Grab),
        ] {
            let (next, out) = sort_transition(&s, a, &mut rng).unwrap();
            assert_eq!(next, SortState { step: s.step + 1, ..s });
            assert_eq!(out.reward, 0.0);
        }
    }

    #[test]
    fn moves_saturate_at_the_ends() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let right = SortState { arm: ArmPosition::Right, ..SortState::initial() };
        let (next, _) = sort_transition(&right, SortAction::MoveRight, &mut rng).unwrap();
        assert_eq!(next.arm, ArmPosition::Right);
        let (next, _) = sort_transition(&right, SortAction::MoveLeft, &mut rng).unwrap();
        assert_eq!(next.arm, ArmPosition::Center);
    }

    #[test]
    fn index_ignores_step_and_starts_at_zero() {
        assert_eq!(SortState::initial().index(), 0);
        let later = SortState { step: 42, ..SortState::initial() };
        assert_eq!(later.index(), 0);
    }

    #[test]
    fn index_round_trips_for_live_states() {
        for s in live_states() {
            assert_eq!(SortState::from_index(s.index()), Some(s));
        }
    }

    /// Breadth-first search over every outcome `sort_transition` can produce.
    fn bfs_reachable() -> HashSet<usize> {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([SortState::initial()]);
        seen.insert(SortState::initial().index());
        while let Some(s) = queue.pop_front() {
            for a in SortAction::ALL {
                for seed in 0..8 {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let (next, out) = sort_transition(&s, a, &mut rng).unwrap();
                    if let StateId::Index(i) = out.next_state {
                        if seen.insert(i) {
                            queue.push_back(SortState { step: 0, ..next });
                        }
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn enumeration_matches_bfs_reachability() {
        let reachable = bfs_reachable();
        let live: HashSet<usize> = live_states().iter().map(SortState::index).collect();
        assert_eq!(live, reachable);
        assert_eq!(live.len(), 117);
    }

    #[test]
    fn objects_are_conserved_under_random_play() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut s = SortState::initial();
            for _ in 0..100 {
                let a = SortAction::ALL[rng.random_range(0..ACTION_COUNT)];
                let (next, out) = sort_transition(&s, a, &mut rng).unwrap();
                if out.next_state.is_terminal() {
                    break;
                }
                assert_eq!(next.accounted(), TOTAL_OBJECTS);
                s = next;
            }
        }
    }
}
