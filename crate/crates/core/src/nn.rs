//! Dense multilayer perceptrons with hand-written reverse-mode gradients.
//!
//! Networks are ReLU on every layer except the last, which is linear. The
//! post-activation of the penultimate layer is the *representation* `Φ`; for
//! a value head built without a final bias the output is exactly
//! `⟨Φ, Θ₋₁⟩`, where `Θ₋₁` are the last-layer weights.
//!
//! All computation is batched: inputs are `batch × width` matrices and every
//! row is an independent sample. Single-vector helpers wrap a batch of one.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::rng::LabRng;

/// Weights (`out × in`) and optional bias (`out`) of one dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Array2<f64>,
    pub bias: Option<Array1<f64>>,
}

impl LayerParams {
    pub fn input_width(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.nrows()
    }

    fn zeros_like(&self) -> Self {
        LayerParams {
            weights: Array2::zeros(self.weights.raw_dim()),
            bias: self.bias.as_ref().map(|b| Array1::zeros(b.len())),
        }
    }

    fn congruent(&self, other: &LayerParams) -> bool {
        self.weights.dim() == other.weights.dim()
            && match (&self.bias, &other.bias) {
                (Some(a), Some(b)) => a.len() == b.len(),
                (None, None) => true,
                _ => false,
            }
    }

    fn for_each_pair(&mut self, other: &LayerParams, mut f: impl FnMut(&mut f64, f64)) {
        self.weights.zip_mut_with(&other.weights, |a, &b| f(a, b));
        if let (Some(a), Some(b)) = (self.bias.as_mut(), other.bias.as_ref()) {
            a.zip_mut_with(b, |a, &b| f(a, b));
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights
            .iter()
            .chain(self.bias.iter().flat_map(|b| b.iter()))
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights
            .iter_mut()
            .chain(self.bias.iter_mut().flat_map(|b| b.iter_mut()))
    }
}

/// A multilayer perceptron: ReLU hidden layers and a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<LayerParams>,
}

/// Per-parameter partial derivatives, laid out exactly like an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
}

/// Activations retained from one batched forward pass.
///
/// `inputs[k]` is the input to layer `k` (so `inputs[0]` is the network
/// input and `inputs[L-1]` the representation), `pre[k]` its pre-activation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub inputs: Vec<Array2<f64>>,
    pub pre: Vec<Array2<f64>>,
}

impl ForwardTrace {
    /// Penultimate post-activations, one row per sample.
    pub fn representation(&self) -> &Array2<f64> {
        self.inputs.last().expect("trace has at least one layer")
    }

    /// Network outputs, one row per sample.
    pub fn output(&self) -> &Array2<f64> {
        self.pre.last().expect("trace has at least one layer")
    }

    pub fn batch_size(&self) -> usize {
        self.inputs[0].nrows()
    }
}

/// Result of a single-sample forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub representation: Vec<f64>,
    pub output: Vec<f64>,
    pub trace: ForwardTrace,
}

/// Build an MLP with Kaiming-uniform weights and zero biases.
///
/// Hidden (ReLU) layers draw from `U(-√(6/fan_in), √(6/fan_in))`; the linear
/// output layer draws from `U(-1/√fan_in, 1/√fan_in)`. With
/// `final_bias = false` the output layer has no bias, as required for a
/// value head.
pub fn init_mlp(layer_sizes: &[usize], seed: u64, final_bias: bool) -> Result<Mlp> {
    if layer_sizes.len() < 2 {
        return Err(Error::config(
            "layer_sizes",
            format!("need at least 2 widths, got {}", layer_sizes.len()),
        ));
    }
    if let Some(pos) = layer_sizes.iter().position(|&w| w == 0) {
        return Err(Error::config(
            "layer_sizes",
            format!("width at position {pos} is zero"),
        ));
    }
    let mut rng = LabRng::seed_from_u64(seed);
    let n_layers = layer_sizes.len() - 1;
    let layers = layer_sizes
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let last = k + 1 == n_layers;
            let bound = if last {
                (1.0 / fan_in as f64).sqrt()
            } else {
                (6.0 / fan_in as f64).sqrt()
            };
            let weights = Array2::from_shape_simple_fn((fan_out, fan_in), || {
                rng.random_range(-bound..=bound)
            });
            let bias = (!last || final_bias).then(|| Array1::zeros(fan_out));
            LayerParams { weights, bias }
        })
        .collect();
    Ok(Mlp { layers })
}

fn relu_in_place(a: &mut Array2<f64>) {
    a.mapv_inplace(|v| if v > 0.0 { v } else { 0.0 });
}

impl Mlp {
    pub fn input_width(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, LayerParams::output_width)
    }

    /// Width of the representation (input width of the last layer).
    pub fn representation_width(&self) -> usize {
        self.layers.last().map_or(0, LayerParams::input_width)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.values().count()).sum()
    }

    /// Check the structural invariants: matching widths, finite entries.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("network has no layers".into()));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            if let Some(b) = &layer.bias {
                if b.len() != layer.output_width() {
                    return Err(Error::Shape(format!(
                        "layer {k}: bias length {} != output width {}",
                        b.len(),
                        layer.output_width()
                    )));
                }
            }
            if k + 1 < self.layers.len() && layer.output_width() != self.layers[k + 1].input_width()
            {
                return Err(Error::Shape(format!(
                    "layer {k} outputs {} but layer {} expects {}",
                    layer.output_width(),
                    k + 1,
                    self.layers[k + 1].input_width()
                )));
            }
            if layer.values().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "layer {k} has non-finite parameters"
                )));
            }
        }
        Ok(())
    }

    /// Batched forward pass; `input` is `batch × input_width`.
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<ForwardTrace> {
        if input.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "input width {} != network input width {}",
                input.ncols(),
                self.input_width()
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite network input".into()));
        }
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n);
        let mut current = input.to_owned();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weights.t());
            if let Some(b) = &layer.bias {
                z += b;
            }
            inputs.push(current);
            current = if k + 1 < n {
                let mut a = z.clone();
                relu_in_place(&mut a);
                a
            } else {
                Array2::zeros((0, 0))
            };
            pre.push(z);
        }
        Ok(ForwardTrace { inputs, pre })
    }

    /// Forward pass for a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Forward> {
        let x = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::Shape(e.to_string()))?;
        let trace = self.forward_batch(x)?;
        let representation = trace.representation().row(0).to_vec();
        let output = trace.output().row(0).to_vec();
        Ok(Forward {
            representation,
            output,
            trace,
        })
    }

    /// Gradients of `Σ output_grad ⊙ output` with respect to every parameter.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        output_grad: ArrayView2<f64>,
    ) -> Result<Gradients> {
        self.backward_with(trace, output_grad, None).map(|(g, _)| g)
    }

    /// Reverse pass with an optional extra gradient injected at the
    /// representation. Also returns the gradient with respect to the input.
    ///
    /// The scalar being differentiated is
    /// `Σ output_grad ⊙ output + Σ repr_grad ⊙ Φ`, summed over the batch.
    pub fn backward_with(
        &self,
        trace: &ForwardTrace,
        output_grad: ArrayView2<f64>,
        repr_grad: Option<ArrayView2<f64>>,
    ) -> Result<(Gradients, Array2<f64>)> {
        let n = self.layers.len();
        if trace.inputs.len() != n || trace.pre.len() != n {
            return Err(Error::Shape(format!(
                "trace has {} layers, network has {n}",
                trace.inputs.len()
            )));
        }
        let batch = trace.batch_size();
        if output_grad.dim() != (batch, self.output_width()) {
            return Err(Error::Shape(format!(
                "output gradient is {:?}, expected ({batch}, {})",
                output_grad.dim(),
                self.output_width()
            )));
        }
        if let Some(rg) = &repr_grad {
            if rg.dim() != (batch, self.representation_width()) {
                return Err(Error::Shape(format!(
                    "representation gradient is {:?}, expected ({batch}, {})",
                    rg.dim(),
                    self.representation_width()
                )));
            }
        }

        let mut grads: Vec<Option<LayerParams>> = vec![None; n];
        let mut delta = output_grad.to_owned();
        let mut input_grad = Array2::zeros((0, 0));
        for k in (0..n).rev() {
            let layer = &self.layers[k];
            let a_in = &trace.inputs[k];
            if a_in.ncols() != layer.input_width() {
                return Err(Error::Shape(format!("trace layer {k} width mismatch")));
            }
            let weights = delta.t().dot(a_in);
            let bias = layer.bias.as_ref().map(|_| delta.sum_axis(Axis(0)));
            grads[k] = Some(LayerParams { weights, bias });

            let mut upstream = delta.dot(&layer.weights);
            if k + 1 == n {
                if let Some(rg) = &repr_grad {
                    upstream += rg;
                }
            }
            if k == 0 {
                input_grad = upstream;
            } else {
                // ReLU subgradient is 0 at exactly 0.
                upstream.zip_mut_with(&trace.pre[k - 1], |g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = upstream;
            }
        }
        let layers = grads.into_iter().map(|g| g.expect("filled")).collect();
        Ok((Gradients { layers }, input_grad))
    }

    /// Euclidean norm of the flattened last-layer weights, `‖Θ₋₁‖`.
    pub fn last_layer_norm(&self) -> f64 {
        self.layers
            .last()
            .map_or(0.0, |l| l.weights.iter().map(|w| w * w).sum::<f64>().sqrt())
    }

    /// All parameters flattened in layer order (weights row-major, then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.values().copied())
            .collect()
    }

    /// Overwrite all parameters from a flat vector in [`Mlp::flat_params`] order.
    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                values.len()
            )));
        }
        let mut it = values.iter();
        for layer in &mut self.layers {
            for p in layer.values_mut() {
                *p = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// True when both networks have identical layer shapes and bias layout.
    pub fn congruent(&self, other: &Mlp) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.congruent(b))
    }
}

/// Free-function form of [`Mlp::last_layer_norm`].
pub fn last_layer_norm(params: &Mlp) -> f64 {
    params.last_layer_norm()
}

impl Gradients {
    pub fn zeros_like(params: &Mlp) -> Self {
        Gradients {
            layers: params.layers.iter().map(LayerParams::zeros_like).collect(),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.values().copied())
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.values().all(|v| v.is_finite()))
    }

    fn congruent_with(&self, params: &Mlp) -> bool {
        self.layers.len() == params.layers.len()
            && self
                .layers
                .iter()
                .zip(&params.layers)
                .all(|(g, p)| g.congruent(p))
    }
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment accumulators plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: Vec<LayerParams>,
    pub second: Vec<LayerParams>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &Mlp) -> Self {
        let zeros: Vec<_> = params.layers.iter().map(LayerParams::zeros_like).collect();
        AdamState {
            first: zeros.clone(),
            second: zeros,
            t: 0,
        }
    }
}

/// One bias-corrected Adam step, applied in place.
///
/// Refuses (and leaves everything untouched) when any gradient is non-finite.
pub fn adam_step(
    params: &mut Mlp,
    grads: &Gradients,
    state: &mut AdamState,
    config: AdamConfig,
) -> Result<()> {
    if !grads.congruent_with(params)
        || state.first.len() != params.layers.len()
        || state.second.len() != params.layers.len()
    {
        return Err(Error::Shape(
            "gradients or optimizer state do not match network".into(),
        ));
    }
    if !(config.lr > 0.0) {
        return Err(Error::Domain(format!(
            "learning rate must be positive, got {}",
            config.lr
        )));
    }
    if !grads.all_finite() {
        return Err(Error::Numeric(
            "non-finite gradient; Adam step refused".into(),
        ));
    }
    state.t += 1;
    let t = state.t as i32;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        eps,
    } = config;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for k in 0..params.layers.len() {
        let g = &grads.layers[k];
        state.first[k].for_each_pair(g, |m, g| *m = beta1 * *m + (1.0 - beta1) * g);
        state.second[k].for_each_pair(g, |v, g| *v = beta2 * *v + (1.0 - beta2) * g * g);
        let m = state.first[k].values();
        let v = state.second[k].values();
        for ((p, &m), &v) in params.layers[k].values_mut().zip(m).zip(v) {
            let m_hat = m / c1;
            let v_hat = v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

/// Polyak averaging: `target ← η·online + (1-η)·target`.
pub fn soft_update(online: &Mlp, target: &mut Mlp, eta: f64) -> Result<()> {
    if !online.congruent(target) {
        return Err(Error::Shape(
            "online and target networks differ in shape".into(),
        ));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 1], got {eta}")));
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        t.for_each_pair(o, |t, o| *t = eta * o + (1.0 - eta) * *t);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn net(sizes: &[usize], seed: u64) -> Mlp {
        init_mlp(sizes, seed, false).unwrap()
    }

    #[test]
    fn init_shapes() {
        let m = init_mlp(&[2, 3, 1], 0, false).unwrap();
        assert_eq!(m.layers.len(), 2);
        assert_eq!(m.layers[0].weights.dim(), (3, 2));
        assert_eq!(m.layers[0].bias.as_ref().unwrap().len(), 3);
        assert_eq!(m.layers[1].weights.dim(), (1, 3));
        assert!(m.layers[1].bias.is_none());
        assert!(m.layers[0].bias.as_ref().unwrap().iter().all(|&b| b == 0.0));
        m.validate().unwrap();
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_mlp(&[2, 3, 1], 7, false).unwrap();
        let b = init_mlp(&[2, 3, 1], 7, false).unwrap();
        let bits = |m: &Mlp| {
            m.flat_params()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        let c = init_mlp(&[2, 3, 1], 8, false).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn init_respects_kaiming_bound() {
        let m = init_mlp(&[4, 8, 1], 3, false).unwrap();
        let bound = (6.0f64 / 4.0).sqrt();
        assert!(m.layers[0].weights.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn init_rejects_bad_sizes() {
        assert!(matches!(init_mlp(&[], 0, false), Err(Error::Config { .. })));
        assert!(matches!(
            init_mlp(&[3], 0, false),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            init_mlp(&[3, 0, 1], 0, false),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut m = init_mlp(&[3, 4, 2], 1, true).unwrap();
        let zeros = vec![0.0; m.num_params()];
        m.set_flat_params(&zeros).unwrap();
        let f = m.forward(&[1.0, -2.0, 3.0]).unwrap();
        assert!(f.representation.iter().all(|&v| v == 0.0));
        assert!(f.output.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_forward() {
        let m = Mlp {
            layers: vec![
                LayerParams {
                    weights: array![[1.0], [-1.0]],
                    bias: None,
                },
                LayerParams {
                    weights: array![[1.0, 1.0]],
                    bias: None,
                },
            ],
        };
        let f = m.forward(&[2.0]).unwrap();
        assert_eq!(f.trace.pre[0].row(0).to_vec(), vec![2.0, -2.0]);
        assert_eq!(f.representation, vec![2.0, 0.0]);
        assert_eq!(f.output, vec![2.0]);
    }

    #[test]
    fn output_is_representation_dot_last_weights() {
        let m = net(&[5, 7, 6, 3], 11);
        let f = m.forward(&[0.3, -1.2, 0.8, 2.0, -0.1]).unwrap();
        let last = &m.layers[2].weights;
        for (a, &out) in f.output.iter().enumerate() {
            let dot: f64 = f
                .representation
                .iter()
                .zip(last.row(a))
                .map(|(p, w)| p * w)
                .sum();
            assert!((dot - out).abs() <= 1e-12);
        }
    }

    #[test]
    fn forward_errors() {
        let m = net(&[2, 3, 1], 0);
        assert!(matches!(m.forward(&[1.0]), Err(Error::Shape(_))));
        assert!(matches!(
            m.forward(&[1.0, f64::NAN]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn zero_output_grad_gives_zero_gradients() {
        let m = net(&[3, 4, 2], 5);
        let f = m.forward(&[0.5, 1.0, -0.5]).unwrap();
        let g = m.backward(&f.trace, Array2::zeros((1, 2)).view()).unwrap();
        assert!(g.flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_linear_layer_gradient_is_outer_product() {
        let m = Mlp {
            layers: vec![LayerParams {
                weights: array![[0.5, -1.0, 2.0], [1.5, 0.0, -0.5]],
                bias: None,
            }],
        };
        let x = [1.0, 2.0, 3.0];
        let g = [0.7, -0.3];
        let f = m.forward(&x).unwrap();
        let grads = m
            .backward(&f.trace, ArrayView2::from_shape((1, 2), &g).unwrap())
            .unwrap();
        for (i, gi) in g.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                assert!((grads.layers[0].weights[[i, j]] - gi * xj).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn backward_rejects_mismatched_shapes() {
        let m = net(&[3, 4, 2], 5);
        let f = m.forward(&[0.5, 1.0, -0.5]).unwrap();
        assert!(matches!(
            m.backward(&f.trace, Array2::zeros((1, 3)).view()),
            Err(Error::Shape(_))
        ));
        let other = net(&[3, 4, 4, 2], 5);
        assert!(matches!(
            other.backward(&f.trace, Array2::zeros((1, 2)).view()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn last_layer_norm_cases() {
        let mut m = net(&[2, 2, 1], 0);
        m.layers[1].weights = array![[3.0, 4.0]];
        assert_eq!(last_layer_norm(&m), 5.0);
        m.layers[1].weights.fill(0.0);
        assert_eq!(m.last_layer_norm(), 0.0);
    }

    #[test]
    fn adam_zero_gradient_is_identity() {
        let mut m = net(&[3, 4, 2], 2);
        let before = m.clone();
        let mut st = AdamState::new(&m);
        let g = Gradients::zeros_like(&m);
        adam_step(&mut m, &g, &mut st, AdamConfig::default()).unwrap();
        assert_eq!(m, before);
        assert_eq!(st.t, 1);
    }

    fn scalar_net(w: f64) -> Mlp {
        Mlp {
            layers: vec![LayerParams {
                weights: array![[w]],
                bias: None,
            }],
        }
    }

    fn scalar_grad(g: f64) -> Gradients {
        Gradients {
            layers: vec![LayerParams {
                weights: array![[g]],
                bias: None,
            }],
        }
    }

    #[test]
    fn adam_first_step_matches_hand_value() {
        let mut m = scalar_net(0.0);
        let mut st = AdamState::new(&m);
        let cfg = AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        };
        adam_step(&mut m, &scalar_grad(1.0), &mut st, cfg).unwrap();
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((m.layers[0].weights[[0, 0]] - expected).abs() < 1e-18);
    }

    #[test]
    fn adam_moments_decay_geometrically() {
        let mut m = scalar_net(1.0);
        let mut st = AdamState::new(&m);
        let cfg = AdamConfig::default();
        adam_step(&mut m, &scalar_grad(2.0), &mut st, cfg).unwrap();
        let m1 = st.first[0].weights[[0, 0]];
        let v1 = st.second[0].weights[[0, 0]];
        assert!((m1 - 0.2).abs() < 1e-15);
        assert!((v1 - 0.004).abs() < 1e-15);
        adam_step(&mut m, &scalar_grad(0.0), &mut st, cfg).unwrap();
        adam_step(&mut m, &scalar_grad(0.0), &mut st, cfg).unwrap();
        assert_eq!(st.first[0].weights[[0, 0]], m1 * 0.9 * 0.9);
        assert_eq!(st.second[0].weights[[0, 0]], v1 * 0.999 * 0.999);
        assert_eq!(st.t, 3);
    }

    #[test]
    fn adam_refuses_non_finite_gradients() {
        let mut m = scalar_net(1.0);
        let mut st = AdamState::new(&m);
        let err = adam_step(
            &mut m,
            &scalar_grad(f64::INFINITY),
            &mut st,
            AdamConfig::default(),
        );
        assert!(matches!(err, Err(Error::Numeric(_))));
        assert_eq!(st.t, 0);
        assert_eq!(m.layers[0].weights[[0, 0]], 1.0);
    }

    #[test]
    fn soft_update_extremes_and_value() {
        let online = net(&[2, 3, 1], 1);
        let mut target = net(&[2, 3, 1], 2);
        let frozen = target.clone();
        soft_update(&online, &mut target, 0.0).unwrap();
        assert_eq!(target, frozen);
        soft_update(&online, &mut target, 1.0).unwrap();
        assert_eq!(target, online);

        let mut one = scalar_net(1.0);
        let mut zero = scalar_net(0.0);
        soft_update(&one, &mut zero, 0.005).unwrap();
        assert!((zero.layers[0].weights[[0, 0]] - 0.005).abs() < 1e-18);
        one.layers[0].weights[[0, 0]] = 2.0;
        let other = net(&[2, 3, 1], 1);
        assert!(matches!(
            soft_update(&other, &mut one, 0.5),
            Err(Error::Shape(_))
        ));
    }
}
