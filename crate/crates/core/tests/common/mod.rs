//! Independent scalar-loop reference implementations and small fixtures
//! shared by the integration suites. Nothing here calls into the batched
//! ndarray code paths under test.

#![allow(dead_code, clippy::needless_range_loop)]

use ndarray::{Array1, Array2};
use peer_lab::nn::{LayerParams, Mlp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn uniform_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..rows).map(|_| uniform_vec(rng, cols, scale)).collect()
}

pub fn to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    let cols = rows.first().map_or(0, Vec::len);
    Array2::from_shape_fn((rows.len(), cols), |(i, j)| rows[i][j])
}

/// Random network with the given widths; the final layer has no bias.
pub fn random_mlp(rng: &mut ChaCha8Rng, sizes: &[usize], scale: f64) -> Mlp {
    let n = sizes.len() - 1;
    let layers = (0..n)
        .map(|k| {
            let (fan_in, fan_out) = (sizes[k], sizes[k + 1]);
            let weights =
                Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-scale..scale));
            let bias = (k + 1 < n)
                .then(|| Array1::from_shape_fn(fan_out, |_| rng.random_range(-scale..scale)));
            LayerParams { weights, bias }
        })
        .collect();
    Mlp { layers }
}

/// Scalar forward pass: returns (pre-activations per layer, representation, output).
pub fn scalar_forward(net: &Mlp, x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut a = x.to_vec();
    let mut pres = Vec::new();
    let mut repr = x.to_vec();
    let n = net.layers.len();
    for (k, layer) in net.layers.iter().enumerate() {
        let (out, inp) = layer.weights.dim();
        let mut z = vec![0.0; out];
        for i in 0..out {
            let mut s = 0.0;
            for j in 0..inp {
                s += layer.weights[[i, j]] * a[j];
            }
            if let Some(b) = &layer.bias {
                s += b[i];
            }
            z[i] = s;
        }
        pres.push(z.clone());
        if k + 1 < n {
            a = z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
            repr = a.clone();
        } else {
            a = z;
        }
    }
    (pres, repr, a)
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        s += u[i] * v[i];
    }
    s
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn peer_loss_oracle(phi: &[Vec<f64>], target: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..phi.len() {
        s += dot(&phi[i], &target[i]);
    }
    s / phi.len() as f64
}

pub fn pe_loss_oracle(q: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..q.len() {
        s += (q[i] - y[i]) * (q[i] - y[i]);
    }
    s / q.len() as f64
}

pub fn bound_oracle(r: f64, gamma: f64, norm: f64) -> f64 {
    1.0 / gamma - r * r / (2.0 * norm * norm)
}

/// (mean similarity, mean bound, mean drd) computed row by row.
pub fn drd_oracle(
    phi: &[Vec<f64>],
    target: &[Vec<f64>],
    rewards: &[f64],
    gamma: f64,
    norm_w: f64,
) -> (f64, f64, f64) {
    let n = phi.len() as f64;
    let mut sim = 0.0;
    let mut bound = 0.0;
    for i in 0..phi.len() {
        let (a, b) = (norm(&phi[i]), norm(&target[i]));
        if a >= 1e-12 && b >= 1e-12 {
            sim += dot(&phi[i], &target[i]) / (a * b);
        }
        bound += bound_oracle(rewards[i], gamma, norm_w);
    }
    (sim / n, bound / n, sim / n - bound / n)
}

pub fn last_layer_norm_oracle(net: &Mlp) -> f64 {
    let w = &net.layers.last().unwrap().weights;
    let mut s = 0.0;
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            s += w[[i, j]] * w[[i, j]];
        }
    }
    s.sqrt()
}

/// Smallest |pre-activation| over every hidden unit and every input row.
pub fn min_abs_hidden_pre(net: &Mlp, xs: &[Vec<f64>]) -> f64 {
    let n = net.layers.len();
    xs.iter()
        .flat_map(|x| {
            let (pres, _, _) = scalar_forward(net, x);
            pres.into_iter().take(n - 1).flatten()
        })
        .fold(f64::INFINITY, |m, v| m.min(v.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
