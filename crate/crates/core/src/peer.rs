//! Policy-evaluation losses, TD targets and the PEER regularizer.
//!
//! The PEER term is the batch mean of row-wise inner products between the
//! online representation `Φ(s,a)` and the target network's representation
//! `Φ'(s',a')`. Only the online side is differentiated; the target rows are
//! constants. The full objective is `pe_loss + β·peer_loss`.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

fn check_pair(phi: &ArrayView2<f64>, target: &ArrayView2<f64>) -> Result<()> {
    if phi.nrows() != target.nrows() {
        return Err(Error::Shape(format!(
            "batch sizes differ: {} vs {}",
            phi.nrows(),
            target.nrows()
        )));
    }
    if phi.ncols() != target.ncols() {
        return Err(Error::Shape(format!(
            "representation widths differ: {} vs {}",
            phi.ncols(),
            target.ncols()
        )));
    }
    if phi.nrows() == 0 {
        return Err(Error::Domain("empty batch".into()));
    }
    Ok(())
}

/// Mean over the batch of `⟨Φᵢ, Φ'ᵢ⟩` on raw (unnormalised) representations.
pub fn peer_loss(phi: ArrayView2<f64>, target_phi_next: ArrayView2<f64>) -> Result<f64> {
    check_pair(&phi, &target_phi_next)?;
    let total: f64 = phi
        .rows()
        .into_iter()
        .zip(target_phi_next.rows())
        .map(|(a, b)| a.dot(&b))
        .sum();
    Ok(total / phi.nrows() as f64)
}

/// Gradient of `β·peer_loss` with respect to the online representation:
/// row `i` is `β·Φ'ᵢ / B`.
pub fn peer_loss_grad(target_phi_next: ArrayView2<f64>, beta: f64) -> Array2<f64> {
    let scale = beta / target_phi_next.nrows() as f64;
    target_phi_next.mapv(|v| v * scale)
}

/// Mean squared error between predictions and (constant) targets.
pub fn pe_loss(q: &[f64], targets: &[f64]) -> Result<f64> {
    if q.len() != targets.len() {
        return Err(Error::Shape(format!(
            "prediction length {} != target length {}",
            q.len(),
            targets.len()
        )));
    }
    if q.is_empty() {
        return Err(Error::Domain("empty batch".into()));
    }
    let sum: f64 = q.iter().zip(targets).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / q.len() as f64)
}

/// Gradient of [`pe_loss`] with respect to each prediction: `2(qᵢ - yᵢ)/B`.
pub fn pe_loss_grad(q: &[f64], targets: &[f64]) -> Vec<f64> {
    let n = q.len() as f64;
    q.iter()
        .zip(targets)
        .map(|(a, b)| 2.0 * (a - b) / n)
        .collect()
}

/// `pe + β·peer`.
pub fn combined_loss(pe: f64, peer: f64, beta: f64) -> f64 {
    pe + beta * peer
}

/// Greedy Bellman target `r + γ(1-done)·maxₐ Q'(s',a)` from target-network values.
///
/// `gamma = 0` is accepted here as the myopic limit.
pub fn td_target_dqn(reward: f64, done: bool, gamma: f64, q_next_target: &[f64]) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    let max = q_next_target
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::Domain("empty action-value vector".into()))?;
    Ok(if done { reward } else { reward + gamma * max })
}

/// Clipped double-Q target `r + γ(1-done)·min(Q'₁, Q'₂)`.
pub fn td_target_td3(reward: f64, done: bool, gamma: f64, q1_next: f64, q2_next: f64) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * q1_next.min(q2_next)
    }
}

/// Target-policy smoothing: add clipped Gaussian noise, then clamp to the bounds.
///
/// One normal draw is consumed per action component regardless of `noise_std`,
/// so the rng stream position does not depend on the noise scale.
pub fn smooth_target_action<R: Rng + ?Sized>(
    a_next: &[f64],
    noise_std: f64,
    noise_clip: f64,
    action_low: f64,
    action_high: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(noise_std >= 0.0) || !(noise_clip >= 0.0) {
        return Err(Error::Domain("noise scales must be non-negative".into()));
    }
    if !(action_low < action_high) {
        return Err(Error::Domain(format!(
            "empty action range [{action_low}, {action_high}]"
        )));
    }
    let unit = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(a_next
        .iter()
        .map(|&a| {
            let noise = (unit.sample(rng) * noise_std).clamp(-noise_clip, noise_clip);
            (a + noise).clamp(action_low, action_high)
        })
        .collect())
}
