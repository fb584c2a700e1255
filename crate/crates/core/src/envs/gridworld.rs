use crate::envs::{Environment, Step, EPISODE_CAP};
use crate::error::{Error, Result};
use crate::rng::LabRng;

/// Move index: 0 up, 1 down, 2 left, 3 right.
pub type GridAction = usize;

/// A 4-row by 5-column grid, cells numbered row-major from 0 to 19.
///
/// The agent starts in cell 0 (top-left). Entering cell 19 (bottom-right)
/// pays 10 and ends the episode; every other transition pays 0. Moving into
/// a wall leaves the agent in place.
#[derive(Debug, Clone)]
pub struct GridWorld {
    state: usize,
    step_count: usize,
    done: bool,
}

impl GridWorld {
    pub const WIDTH: usize = 5;
    pub const HEIGHT: usize = 4;
    pub const N_STATES: usize = 20;
    pub const N_ACTIONS: usize = 4;
    pub const START: usize = 0;
    pub const TERMINAL: usize = 19;
    /// Adjacent to the terminal cell.
    pub const S1: usize = 18;
    /// Two steps from the terminal cell, adjacent to `S1`.
    pub const S2: usize = 17;
    pub const GOAL_REWARD: f64 = 10.0;
    /// Length of the shortest start-to-terminal path.
    pub const OPTIMAL_STEPS: usize = 7;

    pub fn new() -> Self {
        GridWorld {
            state: Self::START,
            step_count: 0,
            done: true,
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// One-hot encoding of a cell.
    pub fn one_hot(cell: usize) -> Vec<f64> {
        let mut v = vec![0.0; Self::N_STATES];
        v[cell] = 1.0;
        v
    }

    /// Start a fresh episode in the given cell (used by tests and probes).
    pub fn reset_to(&mut self, cell: usize) -> Result<Vec<f64>> {
        if cell >= Self::N_STATES {
            return Err(Error::Domain(format!("cell {cell} outside [0, 19]")));
        }
        self.state = cell;
        self.step_count = 0;
        self.done = false;
        Ok(Self::one_hot(cell))
    }

    /// Cell reached by applying `action` in `cell`; walls are no-ops.
    pub fn next_cell(cell: usize, action: GridAction) -> Result<usize> {
        let (row, col) = (cell / Self::WIDTH, cell % Self::WIDTH);
        let next = match action {
            0 if row > 0 => cell - Self::WIDTH,
            1 if row + 1 < Self::HEIGHT => cell + Self::WIDTH,
            2 if col > 0 => cell - 1,
            3 if col + 1 < Self::WIDTH => cell + 1,
            0..=3 => cell,
            _ => return Err(Error::Domain(format!("action {action} outside [0, 3]"))),
        };
        Ok(next)
    }

    pub fn reset_start(&mut self) -> Vec<f64> {
        self.reset_to(Self::START).expect("start cell is valid")
    }
}

impl Default for GridWorld {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for GridWorld {
    type Action = GridAction;

    fn observation_width(&self) -> usize {
        Self::N_STATES
    }

    /// The start cell is fixed; the rng is not consumed.
    fn reset(&mut self, _rng: &mut LabRng) -> Vec<f64> {
        self.reset_start()
    }

    fn step(&mut self, action: &GridAction) -> Result<Step> {
        if self.done {
            return Err(Error::Protocol("step called on a finished episode".into()));
        }
        let next = Self::next_cell(self.state, *action)?;
        self.state = next;
        self.step_count += 1;
        let reached = next == Self::TERMINAL;
        let capped = !reached && self.step_count >= EPISODE_CAP;
        self.done = reached || capped;
        Ok(Step {
            observation: Self::one_hot(next),
            reward: if reached { Self::GOAL_REWARD } else { 0.0 },
            done: self.done,
            truncated: capped,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::collections::VecDeque;

    fn rng() -> LabRng {
        LabRng::seed_from_u64(0)
    }

    #[test]
    fn reset_is_one_hot_start() {
        let mut env = GridWorld::new();
        let obs = env.reset(&mut rng());
        assert_eq!(obs, GridWorld::one_hot(0));
        env.reset_to(18).unwrap();
        env.step(&3).unwrap();
        assert_eq!(env.reset(&mut LabRng::seed_from_u64(99)), obs);
    }

    #[test]
    fn entering_terminal_pays_ten() {
        let mut env = GridWorld::new();
        env.reset_to(18).unwrap();
        let s = env.step(&3).unwrap();
        assert_eq!(s.observation, GridWorld::one_hot(19));
        assert_eq!(s.reward, 10.0);
        assert!(s.done && s.terminal());
        assert!(matches!(env.step(&0), Err(Error::Protocol(_))));
    }

    #[test]
    fn moves_and_walls() {
        let mut env = GridWorld::new();
        env.reset(&mut rng());
        let s = env.step(&0).unwrap();
        assert_eq!(s.observation, GridWorld::one_hot(0));
        assert_eq!(s.reward, 0.0);
        assert!(!s.done);
        assert_eq!(GridWorld::next_cell(7, 1).unwrap(), 12);
        assert_eq!(GridWorld::next_cell(4, 3).unwrap(), 4);
        assert_eq!(GridWorld::next_cell(5, 2).unwrap(), 5);
        assert_eq!(GridWorld::next_cell(17, 1).unwrap(), 17);
        assert!(matches!(env.step(&4), Err(Error::Domain(_))));
    }

    #[test]
    fn episode_cap_truncates() {
        let mut env = GridWorld::new();
        env.reset(&mut rng());
        for i in 0..EPISODE_CAP {
            let s = env.step(&0).unwrap();
            assert_eq!(s.done, i + 1 == EPISODE_CAP);
            if s.done {
                assert!(s.truncated && !s.terminal());
                assert_eq!(s.reward, 0.0);
            }
        }
    }

    #[test]
    fn shortest_path_is_seven() {
        let mut dist = [usize::MAX; GridWorld::N_STATES];
        dist[GridWorld::START] = 0;
        let mut queue = VecDeque::from([GridWorld::START]);
        while let Some(c) = queue.pop_front() {
            for a in 0..4 {
                let n = GridWorld::next_cell(c, a).unwrap();
                if dist[n] == usize::MAX {
                    dist[n] = dist[c] + 1;
                    queue.push_back(n);
                }
            }
        }
        assert_eq!(dist[GridWorld::TERMINAL], GridWorld::OPTIMAL_STEPS);
        assert_eq!(dist[GridWorld::S1], 6);
        assert_eq!(dist[GridWorld::S2], 5);
        assert_eq!(
            GridWorld::next_cell(GridWorld::S2, 3).unwrap(),
            GridWorld::S1
        );
    }
}
