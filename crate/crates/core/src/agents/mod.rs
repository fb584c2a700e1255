//! Learning agents: DQN for the grid world and TD3 for continuous control,
//! both with an optional PEER term on their value networks.

mod dqn;
mod td3;

pub use dqn::DqnAgent;
pub use td3::Td3Agent;

pub use crate::nn::soft_update;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::metrics::{cosine_similarity, DrdReport};
use crate::rng::LabRng;

/// Hyperparameters shared by both agents.
///
/// The two constructors hold the grid-world and continuous-control defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub gamma: f64,
    /// Target-network mixing coefficient.
    pub eta: f64,
    /// PEER coefficient.
    pub beta: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// DQN only.
    pub epsilon: f64,
    pub warmup_steps: usize,
    /// TD3 only; the three noise scales are fractions of the action half-range.
    pub exploration_noise_std: f64,
    pub target_noise_std: f64,
    pub noise_clip: f64,
    pub policy_delay: usize,
    pub hidden: Vec<usize>,
    pub peer_enabled: bool,
}

impl AgentConfig {
    pub fn grid_world() -> Self {
        AgentConfig {
            gamma: 0.99,
            eta: 0.005,
            beta: 5e-4,
            lr: 1e-4,
            batch_size: 64,
            buffer_capacity: 100_000,
            epsilon: 0.1,
            warmup_steps: 1_000,
            exploration_noise_std: 0.2,
            target_noise_std: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            hidden: vec![32, 32],
            peer_enabled: true,
        }
    }

    pub fn continuous() -> Self {
        AgentConfig {
            lr: 3e-4,
            batch_size: 256,
            buffer_capacity: 1_000_000,
            warmup_steps: 25_000,
            hidden: vec![256, 256],
            ..Self::grid_world()
        }
    }

    /// The coefficient actually applied: `beta`, or 0 with PEER disabled.
    pub fn effective_beta(&self) -> f64 {
        if self.peer_enabled {
            self.beta
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(key, msg))
            }
        };
        check(
            self.gamma > 0.0 && self.gamma <= 1.0,
            "gamma",
            "must lie in (0, 1]",
        )?;
        check(
            self.eta > 0.0 && self.eta <= 1.0,
            "eta",
            "must lie in (0, 1]",
        )?;
        check(
            self.beta >= 0.0 && self.beta.is_finite(),
            "beta",
            "must be finite and >= 0",
        )?;
        check(
            self.lr > 0.0 && self.lr.is_finite(),
            "lr",
            "must be positive",
        )?;
        check(self.batch_size >= 1, "batch_size", "must be positive")?;
        check(
            self.buffer_capacity >= 1,
            "buffer_capacity",
            "must be positive",
        )?;
        check(
            (0.0..=1.0).contains(&self.epsilon),
            "epsilon",
            "must lie in [0, 1]",
        )?;
        check(
            self.exploration_noise_std >= 0.0,
            "exploration_noise_std",
            "must be >= 0",
        )?;
        check(
            self.target_noise_std >= 0.0,
            "target_noise_std",
            "must be >= 0",
        )?;
        check(self.noise_clip >= 0.0, "noise_clip", "must be >= 0")?;
        check(self.policy_delay >= 1, "policy_delay", "must be >= 1")?;
        check(
            !self.hidden.is_empty() && self.hidden.iter().all(|&w| w > 0),
            "hidden",
            "needs at least one positive width",
        )?;
        Ok(())
    }
}

/// Losses and diagnostics from one training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    pub pe_loss: f64,
    pub peer_loss: f64,
    pub drd: DrdReport,
    /// Cosine similarity between the batch-mean online and target representations.
    pub rep_cosine: f64,
}

/// Anything that maps an observation to an action.
pub trait Policy<A> {
    fn act(&mut self, obs: &[f64], rng: &mut LabRng) -> Result<A>;
}

/// Noise-free policy of an agent, as used during evaluation.
pub struct Greedy<'a, T>(pub &'a T);

impl Policy<usize> for Greedy<'_, DqnAgent> {
    fn act(&mut self, obs: &[f64], _rng: &mut LabRng) -> Result<usize> {
        self.0.greedy_action(obs)
    }
}

impl Policy<f64> for Greedy<'_, Td3Agent> {
    fn act(&mut self, obs: &[f64], _rng: &mut LabRng) -> Result<f64> {
        Ok(self.0.deterministic_action(obs)?[0])
    }
}

/// Wraps a closure as a [`Policy`].
pub struct FnPolicy<F>(pub F);

impl<A, F: FnMut(&[f64]) -> A> Policy<A> for FnPolicy<F> {
    fn act(&mut self, obs: &[f64], _rng: &mut LabRng) -> Result<A> {
        Ok((self.0)(obs))
    }
}

/// Uniformly random torque in `[low, high]`.
pub struct UniformTorque {
    pub low: f64,
    pub high: f64,
}

impl Policy<f64> for UniformTorque {
    fn act(&mut self, _obs: &[f64], rng: &mut LabRng) -> Result<f64> {
        Ok(rng.random_range(self.low..=self.high))
    }
}

/// Undiscounted return of one full episode.
pub fn rollout<E, P>(policy: &mut P, env: &mut E, rng: &mut LabRng) -> Result<(f64, usize)>
where
    E: Environment,
    P: Policy<E::Action>,
{
    let mut obs = env.reset(rng);
    let mut total = 0.0;
    let mut steps = 0;
    loop {
        let action = policy.act(&obs, rng)?;
        let step = env.step(&action)?;
        total += step.reward;
        steps += 1;
        if step.done {
            return Ok((total, steps));
        }
        obs = step.observation;
    }
}

/// Mean undiscounted return over `episodes` episodes.
pub fn evaluate<E, P>(policy: &mut P, env: &mut E, episodes: usize, rng: &mut LabRng) -> Result<f64>
where
    E: Environment,
    P: Policy<E::Action>,
{
    if episodes == 0 {
        return Err(Error::Domain("need at least one evaluation episode".into()));
    }
    let mut sum = 0.0;
    for _ in 0..episodes {
        sum += rollout(policy, env, rng)?.0;
    }
    Ok(sum / episodes as f64)
}

pub(crate) fn stack_rows<'a>(
    rows: impl ExactSizeIterator<Item = &'a [f64]>,
    width: usize,
) -> Result<Array2<f64>> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * width);
    for r in rows {
        if r.len() != width {
            return Err(Error::Shape(format!("row width {} != {width}", r.len())));
        }
        data.extend_from_slice(r);
    }
    Array2::from_shape_vec((n, width), data).map_err(|e| Error::Shape(e.to_string()))
}

pub(crate) fn batch_mean_cosine(phi: ArrayView2<f64>, target: ArrayView2<f64>) -> Result<f64> {
    let a = phi
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::Domain("empty batch".into()))?;
    let b = target
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::Domain("empty batch".into()))?;
    cosine_similarity(&a.to_vec(), &b.to_vec())
}

pub(crate) fn check_finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} is not finite ({v})")))
    }
}
