//! Desk-scale environments.

mod gridworld;
mod pendulum;

pub use gridworld::{GridAction, GridWorld};
pub use pendulum::{Pendulum, PendulumState};

use crate::error::Result;
use crate::rng::LabRng;

/// Episode length cap shared by both environments.
pub const EPISODE_CAP: usize = 200;

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// The episode is over (terminal state reached or step cap hit).
    pub done: bool,
    /// The episode ended only because of the step cap.
    pub truncated: bool,
}

impl Step {
    /// Whether the next state is absorbing, i.e. bootstrapping must stop.
    pub fn terminal(&self) -> bool {
        self.done && !self.truncated
    }
}

/// A resettable episodic environment.
pub trait Environment {
    type Action;

    fn observation_width(&self) -> usize;

    fn reset(&mut self, rng: &mut LabRng) -> Vec<f64>;

    fn step(&mut self, action: &Self::Action) -> Result<Step>;
}
