use std::f64::consts::PI;

use rand::Rng;

use crate::envs::{Environment, Step, EPISODE_CAP};
use crate::error::{Error, Result};
use crate::rng::LabRng;

const GRAVITY: f64 = 10.0;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const DT: f64 = 0.05;

/// Angle (0 = upright) and angular velocity of the pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
}

/// Torque-limited pendulum swing-up. Observation is `[cos θ, sin θ, θ̇]`.
#[derive(Debug, Clone)]
pub struct Pendulum {
    state: PendulumState,
    step_count: usize,
    done: bool,
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut w = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

impl Pendulum {
    pub const MAX_SPEED: f64 = 8.0;
    pub const MAX_TORQUE: f64 = 2.0;

    pub fn new() -> Self {
        Pendulum {
            state: PendulumState {
                theta: 0.0,
                theta_dot: 0.0,
            },
            step_count: 0,
            done: true,
        }
    }

    pub fn state(&self) -> PendulumState {
        self.state
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// Start an episode from an explicit state.
    pub fn reset_to(&mut self, state: PendulumState) -> Vec<f64> {
        self.state = PendulumState {
            theta: state.theta,
            theta_dot: state.theta_dot.clamp(-Self::MAX_SPEED, Self::MAX_SPEED),
        };
        self.step_count = 0;
        self.done = false;
        self.observation()
    }

    pub fn observation(&self) -> Vec<f64> {
        vec![
            self.state.theta.cos(),
            self.state.theta.sin(),
            self.state.theta_dot,
        ]
    }
}

impl Default for Pendulum {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Pendulum {
    type Action = f64;

    fn observation_width(&self) -> usize {
        3
    }

    fn reset(&mut self, rng: &mut LabRng) -> Vec<f64> {
        let theta = rng.random_range(-PI..PI);
        let theta_dot = rng.random_range(-1.0..1.0);
        self.reset_to(PendulumState { theta, theta_dot })
    }

    fn step(&mut self, torque: &f64) -> Result<Step> {
        if self.done {
            return Err(Error::Protocol("step called on a finished episode".into()));
        }
        if !torque.is_finite() {
            return Err(Error::Numeric(format!("non-finite torque {torque}")));
        }
        let u = torque.clamp(-Self::MAX_TORQUE, Self::MAX_TORQUE);
        let PendulumState { theta, theta_dot } = self.state;
        let th = wrap_angle(theta);
        let reward = -(th * th + 0.1 * theta_dot * theta_dot + 0.001 * u * u);

        let accel =
            3.0 * GRAVITY / (2.0 * LENGTH) * theta.sin() + 3.0 / (MASS * LENGTH * LENGTH) * u;
        let new_dot = (theta_dot + accel * DT).clamp(-Self::MAX_SPEED, Self::MAX_SPEED);
        self.state = PendulumState {
            theta: theta + new_dot * DT,
            theta_dot: new_dot,
        };
        self.step_count += 1;
        self.done = self.step_count >= EPISODE_CAP;
        Ok(Step {
            observation: self.observation(),
            reward,
            done: self.done,
            truncated: self.done,
        })
    }
}
