//! Dense multilayer perceptrons with exact backprop.
//!
//! Weights are stored row-major per layer (`out x in`). The activation is
//! chosen per layer; policy networks use tanh on hidden layers and identity
//! on the output. Forward is a pure function of (parameters, input):
//! repeated calls on the same inputs return identical bits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::TensorError;
use crate::Result;

/// Per-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

/// A fully connected network: `sizes = [input, hidden.., output]` with one
/// activation per weight layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    /// `weights[l]` is row-major `sizes[l+1] x sizes[l]`.
    weights: Vec<Vec<f64>>,
    /// `biases[l]` has length `sizes[l+1]`.
    biases: Vec<Vec<f64>>,
}

/// Intermediate values kept from a forward pass: the input followed by every
/// layer's post-activation output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    layer_values: Vec<Vec<f64>>,
}

impl ForwardCache {
    /// The network output (last layer's post-activation values).
    pub fn output(&self) -> &[f64] {
        self.layer_values.last().expect("cache always holds the input")
    }
}

/// Parameter gradients with the same shapes as the network they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpGrads {
    /// All-zero gradients shaped like `net`.
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Accumulates `other` into `self` (for mini-batch averaging).
    pub fn accumulate(&mut self, other: &MlpGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Multiplies every entry by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            for x in w {
                *x *= factor;
            }
        }
        for b in &mut self.biases {
            for x in b {
                *x *= factor;
            }
        }
    }

    /// Max absolute entry; handy for diagnostics and tests.
    pub fn max_abs(&self) -> f64 {
        let w = self.weights.iter().flatten();
        let b = self.biases.iter().flatten();
        w.chain(b).fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

fn validate_shape(sizes: &[usize], activations: &[Activation]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(TensorError::InvalidSpec(
            "need at least an input and an output size".into(),
        ));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(TensorError::InvalidSpec("layer sizes must be >= 1".into()));
    }
    if activations.len() != sizes.len() - 1 {
        return Err(TensorError::InvalidSpec(format!(
            "{} activations for {} weight layers",
            activations.len(),
            sizes.len() - 1
        )));
    }
    Ok(())
}

impl Mlp {
    /// Xavier-uniform initialization: each weight is drawn from
    /// `U(-limit, limit)` with `limit = sqrt(6 / (fan_in + fan_out))`; biases
    /// start at zero. Draw order is layer by layer, row-major, so a given
    /// RNG stream always produces the same network.
    pub fn xavier(sizes: &[usize], activations: &[Activation], rng: &mut impl Rng) -> Result<Self> {
        validate_shape(sizes, activations)?;
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            activations: activations.to_vec(),
            weights,
            biases,
        })
    }

    /// Builds a network from explicit parameters (used by checkpoint loading
    /// and tests). Shapes are validated.
    pub fn from_parts(
        sizes: Vec<usize>,
        activations: Vec<Activation>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_shape(&sizes, &activations)?;
        if weights.len() != sizes.len() - 1 || biases.len() != sizes.len() - 1 {
            return Err(TensorError::ShapeMismatch("wrong number of layers".into()));
        }
        for l in 0..weights.len() {
            if weights[l].len() != sizes[l] * sizes[l + 1] {
                return Err(TensorError::ShapeMismatch(format!(
                    "layer {l} weights: got {} values, expected {}",
                    weights[l].len(),
                    sizes[l] * sizes[l + 1]
                )));
            }
            if biases[l].len() != sizes[l + 1] {
                return Err(TensorError::ShapeMismatch(format!(
                    "layer {l} biases: got {} values, expected {}",
                    biases[l].len(),
                    sizes[l + 1]
                )));
            }
        }
        Ok(Self { sizes, activations, weights, biases })
    }

    /// Layer sizes `[input, hidden.., output]`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Per-layer activations.
    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    /// Input width.
    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    /// Output width.
    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("validated")
    }

    /// Raw weights (row-major per layer).
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Raw biases.
    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    /// Mutable parameter access for the optimizer.
    pub(crate) fn params_mut(&mut self) -> (&mut Vec<Vec<f64>>, &mut Vec<Vec<f64>>) {
        (&mut self.weights, &mut self.biases)
    }

    /// Zeroes the final layer's weights and biases, so a freshly built
    /// network outputs exactly zero everywhere. A common stable-start
    /// initialization: the first prediction is the zero vector and gradients
    /// still flow through the (Xavier-initialized) hidden layers.
    pub fn zero_output_layer(&mut self) {
        let last = self.weights.len() - 1;
        self.weights[last].fill(0.0);
        self.biases[last].fill(0.0);
    }

    /// Total parameter count.
    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Adds `delta` to one weight entry; used by finite differencing.
    pub(crate) fn nudge_weight(&mut self, layer: usize, idx: usize, delta: f64) {
        self.weights[layer][idx] += delta;
    }

    /// Adds `delta` to one bias entry; used by finite differencing.
    pub(crate) fn nudge_bias(&mut self, layer: usize, idx: usize, delta: f64) {
        self.biases[layer][idx] += delta;
    }

    /// Forward pass returning the output and the cache needed by
    /// [`Self::backward`].
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.sizes[0] {
            return Err(TensorError::ShapeMismatch(format!(
                "input has {} values, network expects {}",
                input.len(),
                self.sizes[0]
            )));
        }
        let mut layer_values = Vec::with_capacity(self.sizes.len());
        layer_values.push(input.to_vec());
        let mut current = input.to_vec();
        for l in 0..self.weights.len() {
            let n_in = self.sizes[l];
            let w = &self.weights[l];
            let mut next = self.biases[l].clone();
            for (o, out_val) in next.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = 0.0;
                for (x, wi) in current.iter().zip(row) {
                    acc += x * wi;
                }
                *out_val += acc;
            }
            if self.activations[l] == Activation::Tanh {
                for v in &mut next {
                    *v = v.tanh();
                }
            }
            layer_values.push(next.clone());
            current = next;
        }
        Ok((current, ForwardCache { layer_values }))
    }

    /// Forward pass without keeping the cache (rollout/inference path).
    pub fn forward_output(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.0)
    }

    /// Backward pass: given the cache from [`Self::forward`] and the loss
    /// gradient with respect to the network output, returns parameter
    /// gradients and the loss gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<(MlpGrads, Vec<f64>)> {
        let n_layers = self.weights.len();
        if cache.layer_values.len() != n_layers + 1 {
            return Err(TensorError::ShapeMismatch("cache does not match network depth".into()));
        }
        if output_grad.len() != self.output_dim() {
            return Err(TensorError::ShapeMismatch(format!(
                "output grad has {} values, expected {}",
                output_grad.len(),
                self.output_dim()
            )));
        }

        let mut grads = MlpGrads::zeros_like(self);
        // delta = dL/d(pre-activation of current layer)
        let mut delta: Vec<f64> = output_grad.to_vec();
        apply_activation_grad(&mut delta, &cache.layer_values[n_layers], self.activations[n_layers - 1]);

        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let prev = &cache.layer_values[l];
            let dw = &mut grads.weights[l];
            for o in 0..n_out {
                let d = delta[o];
                let row = &mut dw[o * n_in..(o + 1) * n_in];
                for (g, x) in row.iter_mut().zip(prev) {
                    *g = d * x;
                }
            }
            grads.biases[l].copy_from_slice(&delta);

            // Propagate to the previous layer's outputs.
            let w = &self.weights[l];
            let mut input_grad = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                let row = &w[o * n_in..(o + 1) * n_in];
                for (gi, wi) in input_grad.iter_mut().zip(row) {
                    *gi += d * wi;
                }
            }
            if l == 0 {
                return Ok((grads, input_grad));
            }
            apply_activation_grad(&mut input_grad, &cache.layer_values[l], self.activations[l - 1]);
            delta = input_grad;
        }
        unreachable!("loop always returns at l == 0");
    }
}

/// Multiplies a post-activation gradient by the activation derivative,
/// expressed through the post-activation value (`tanh' = 1 - a^2`).
fn apply_activation_grad(grad: &mut [f64], post: &[f64], act: Activation) {
    if act == Activation::Tanh {
        for (g, a) in grad.iter_mut().zip(post) {
            *g *= 1.0 - a * a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_net() -> Mlp {
        // 2 -> 2 (tanh) -> 1 (identity) with hand-picked weights.
        Mlp::from_parts(
            vec![2, 2, 1],
            vec![Activation::Tanh, Activation::Identity],
            vec![vec![0.5, -0.25, 0.1, 0.3], vec![1.0, -2.0]],
            vec![vec![0.0, 0.1], vec![0.05]],
        )
        .unwrap()
    }

    #[test]
    fn forward_matches_hand_computation() {
        let net = tiny_net();
        let (out, _) = net.forward(&[1.0, 2.0]).unwrap();
        // Hidden pre-activations: (0.5*1 - 0.25*2, 0.1*1 + 0.3*2 + 0.1) = (0, 0.8)
        // Hidden outputs: (tanh 0, tanh 0.8); output: tanh0 - 2*tanh0.8 + 0.05.
        let expected = 0.0f64.tanh() - 2.0 * 0.8f64.tanh() + 0.05;
        assert!((out[0] - expected).abs() < 1e-15, "got {} want {expected}", out[0]);
    }

    #[test]
    fn forward_is_pure() {
        let net = tiny_net();
        let a = net.forward(&[0.3, -0.7]).unwrap().0;
        let b = net.forward(&[0.3, -0.7]).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn input_length_is_validated() {
        let net = tiny_net();
        assert!(matches!(net.forward(&[1.0]), Err(TensorError::ShapeMismatch(_))));
    }

    #[test]
    fn xavier_weights_stay_within_limit_and_biases_are_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::xavier(&[5, 7, 3], &[Activation::Tanh, Activation::Identity], &mut rng)
            .unwrap();
        let limit0 = (6.0 / 12.0f64).sqrt();
        assert!(net.weights()[0].iter().all(|w| w.abs() < limit0));
        let limit1 = (6.0 / 10.0f64).sqrt();
        assert!(net.weights()[1].iter().all(|w| w.abs() < limit1));
        assert!(net.biases().iter().flatten().all(|&b| b == 0.0));
        // Same seed, same net.
        let mut rng2 = ChaCha8Rng::seed_from_u64(1);
        let net2 = Mlp::xavier(&[5, 7, 3], &[Activation::Tanh, Activation::Identity], &mut rng2)
            .unwrap();
        assert_eq!(net, net2);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(Mlp::xavier(&[3], &[], &mut rng).is_err());
        assert!(Mlp::xavier(&[3, 0], &[Activation::Tanh], &mut rng).is_err());
        assert!(Mlp::xavier(&[3, 2], &[], &mut rng).is_err());
    }

    #[test]
    fn backward_linear_net_gradients_are_exact() {
        // Identity activations make the net linear: out = W1 (W0 x + b0) + b1.
        // For loss = out (cotangent 1), d out / d b1 = 1 and
        // d out / d W0[0][0] = W1[0][0] * x0.
        let net = Mlp::from_parts(
            vec![2, 2, 1],
            vec![Activation::Identity, Activation::Identity],
            vec![vec![0.5, -0.25, 0.1, 0.3], vec![2.0, -1.0]],
            vec![vec![0.0, 0.0], vec![0.0]],
        )
        .unwrap();
        let x = [0.7, -0.4];
        let (_, cache) = net.forward(&x).unwrap();
        let (grads, input_grad) = net.backward(&cache, &[1.0]).unwrap();
        assert!((grads.biases[1][0] - 1.0).abs() < 1e-15);
        assert!((grads.weights[0][0] - 2.0 * 0.7).abs() < 1e-15);
        assert!((grads.weights[0][2] - (-1.0) * 0.7).abs() < 1e-15);
        // d out / d x0 = W1 W0[:,0] = 2*0.5 + (-1)*0.1 = 0.9
        assert!((input_grad[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zeroed_output_layer_predicts_zero_but_keeps_hidden_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut net =
            Mlp::xavier(&[3, 4, 2], &[Activation::Tanh, Activation::Identity], &mut rng).unwrap();
        net.zero_output_layer();
        let out = net.forward_output(&[0.5, -1.0, 2.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
        assert!(net.weights()[0].iter().any(|&w| w != 0.0), "hidden layer untouched");
    }

    #[test]
    fn grads_accumulate_and_scale() {
        let net = tiny_net();
        let (_, cache) = net.forward(&[0.2, 0.4]).unwrap();
        let (g1, _) = net.backward(&cache, &[1.0]).unwrap();
        let mut acc = MlpGrads::zeros_like(&net);
        acc.accumulate(&g1);
        acc.accumulate(&g1);
        acc.scale(0.5);
        assert!((acc.weights[1][0] - g1.weights[1][0]).abs() < 1e-15);
    }
}
