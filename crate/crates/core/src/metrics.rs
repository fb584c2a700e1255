//! Representation diagnostics.
//!
//! The distinguishable representation discrepancy (DRD) compares the
//! normalised similarity `⟨Φ̂(s,a), Φ̂'(s',a')⟩` against the bound
//! `1/γ - r²/(2‖Θ₋₁‖²)`. A non-positive DRD means the representations of the
//! online network and its target are distinguishable enough to be consistent
//! with the Bellman equation.

use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Norms below this are treated as zero vectors.
pub const NORM_FLOOR: f64 = 1e-12;

/// Unit-normalised copy of `v`, or the zero vector with `degenerate = true`
/// when `‖v‖ < 1e-12`.
pub fn l2_normalize(v: &[f64]) -> (Vec<f64>, bool) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm >= NORM_FLOOR {
        (v.iter().map(|x| x / norm).collect(), false)
    } else {
        (vec![0.0; v.len()], true)
    }
}

/// Cosine similarity clamped to `[-1, 1]`; `0.0` when either vector is degenerate.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!(
            "vector lengths differ: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu < NORM_FLOOR || nv < NORM_FLOOR {
        return Ok(0.0);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The similarity ceiling `1/γ - r²/(2‖Θ₋₁‖²)`.
pub fn theorem1_bound(reward: f64, gamma: f64, last_layer_norm: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    if !(last_layer_norm > 0.0) {
        return Err(Error::DegenerateNetwork(format!(
            "last-layer norm must be positive, got {last_layer_norm}"
        )));
    }
    Ok(1.0 / gamma - reward * reward / (2.0 * last_layer_norm * last_layer_norm))
}

/// Batch-averaged DRD measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrdReport {
    pub mean_similarity: f64,
    pub mean_bound: f64,
    pub mean_drd: f64,
    pub batch_size: usize,
    /// Rows where either representation had (near) zero norm.
    pub degenerate_rows: usize,
}

impl DrdReport {
    /// Whether the distinguishable-representation property holds on average.
    pub fn satisfied(&self) -> bool {
        self.mean_drd <= 0.0
    }
}

/// Per row: normalise both representations, take their inner product and
/// subtract the bound for that row's reward; then average over the batch.
///
/// Rows with a degenerate representation contribute similarity 0.
pub fn drd_batch(
    phi: ArrayView2<f64>,
    target_phi_next: ArrayView2<f64>,
    rewards: &[f64],
    gamma: f64,
    last_layer_norm: f64,
) -> Result<DrdReport> {
    if phi.dim() != target_phi_next.dim() {
        return Err(Error::Shape(format!(
            "representation batches differ: {:?} vs {:?}",
            phi.dim(),
            target_phi_next.dim()
        )));
    }
    if rewards.len() != phi.nrows() {
        return Err(Error::Shape(format!(
            "{} rewards for {} rows",
            rewards.len(),
            phi.nrows()
        )));
    }
    let n = phi.nrows();
    if n == 0 {
        return Err(Error::Domain("empty batch".into()));
    }
    let mut sim_sum = 0.0;
    let mut bound_sum = 0.0;
    let mut degenerate_rows = 0;
    for ((a, b), &r) in phi
        .rows()
        .into_iter()
        .zip(target_phi_next.rows())
        .zip(rewards)
    {
        let (na, nb) = (a.dot(&a).sqrt(), b.dot(&b).sqrt());
        if na < NORM_FLOOR || nb < NORM_FLOOR {
            degenerate_rows += 1;
        } else {
            sim_sum += a.dot(&b) / (na * nb);
        }
        bound_sum += theorem1_bound(r, gamma, last_layer_norm)?;
    }
    let mean_similarity = (sim_sum / n as f64).clamp(-1.0, 1.0);
    let mean_bound = bound_sum / n as f64;
    Ok(DrdReport {
        mean_similarity,
        mean_bound,
        mean_drd: mean_similarity - mean_bound,
        batch_size: n,
        degenerate_rows,
    })
}

/// `max(q_s1) - max(q_s2)`.
pub fn q_gap(q_s1: &[f64], q_s2: &[f64]) -> Result<f64> {
    let max = |q: &[f64]| {
        q.iter()
            .copied()
            .reduce(f64::max)
            .ok_or_else(|| Error::Domain("empty action-value vector".into()))
    };
    Ok(max(q_s1)? - max(q_s2)?)
}
