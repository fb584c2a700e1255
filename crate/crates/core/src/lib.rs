//! A small deep-RL laboratory for representation-regularized policy evaluation.
//!
//! The crate bundles everything needed to train DQN and TD3 agents with the
//! PEER regularizer (an inner-product penalty between the online network's
//! representation and the target network's next-step representation), to
//! measure the distinguishable representation discrepancy (DRD) during
//! training, and to log and plot the results deterministically.
//!
//! Module map:
//! - [`nn`]: dense MLPs, reverse-mode gradients, Adam.
//! - [`peer`]: TD targets and the policy-evaluation / PEER losses.
//! - [`metrics`]: normalisation, cosine similarity, the similarity bound, DRD, Q-gap.
//! - [`envs`]: the 4x5 grid world and a pendulum swing-up task.
//! - [`replay`]: fixed-capacity replay buffer.
//! - [`agents`]: DQN and TD3 agents, soft target updates, evaluation.
//! - [`harness`]: config parsing, experiment runner, CSV logs, SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod envs;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod peer;
pub mod replay;
pub mod rng;

pub use error::{Error, Result};
