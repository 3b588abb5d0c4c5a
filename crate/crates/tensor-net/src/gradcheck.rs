//! Finite-difference gradient verification.
//!
//! The check builds a network from a seeded spec, evaluates the scalar loss
//! `L = sum_i c_i * out_i` for random coefficients `c`, and compares the
//! analytic backward pass against central differences on every parameter.
//! The linear-in-output loss keeps the numeric side well conditioned while
//! still exercising every weight and bias through the full chain rule.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mlp::{Activation, Mlp, MlpGrads};
use crate::Result;

/// A reproducible network description for gradient checking.
#[derive(Debug, Clone, PartialEq)]
pub struct NetSpec {
    /// `[input, hidden.., output]`.
    pub layer_sizes: Vec<usize>,
    /// One activation per weight layer.
    pub activations: Vec<Activation>,
    /// Seeds the parameter draw, the probe input, and the loss coefficients.
    pub seed: u64,
}

/// Finite-difference settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    /// Central-difference step.
    pub epsilon: f64,
    /// Maximum allowed relative error.
    pub tolerance: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { epsilon: 1e-5, tolerance: 1e-4 }
    }
}

/// Outcome of one gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest relative error over all parameters.
    pub max_rel_error: f64,
    /// Number of parameters compared.
    pub param_count: usize,
    /// Whether `max_rel_error <= tolerance`.
    pub passed: bool,
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn probe_loss(net: &Mlp, input: &[f64], coeffs: &[f64]) -> Result<f64> {
    let out = net.forward_output(input)?;
    Ok(out.iter().zip(coeffs).map(|(o, c)| o * c).sum())
}

/// Central-difference gradients of `sum_i coeffs[i] * net(input)[i]` with
/// respect to every parameter. This is the slow oracle the analytic backward
/// pass is compared against; it is public so tests can diff a deliberately
/// corrupted gradient against it.
pub fn numeric_gradients(
    net: &Mlp,
    input: &[f64],
    coeffs: &[f64],
    epsilon: f64,
) -> Result<MlpGrads> {
    let mut work = net.clone();
    let mut grads = MlpGrads::zeros_like(net);
    for l in 0..net.weights().len() {
        for i in 0..net.weights()[l].len() {
            work.nudge_weight(l, i, epsilon);
            let plus = probe_loss(&work, input, coeffs)?;
            work.nudge_weight(l, i, -2.0 * epsilon);
            let minus = probe_loss(&work, input, coeffs)?;
            work.nudge_weight(l, i, epsilon);
            grads.weights[l][i] = (plus - minus) / (2.0 * epsilon);
        }
        for i in 0..net.biases()[l].len() {
            work.nudge_bias(l, i, epsilon);
            let plus = probe_loss(&work, input, coeffs)?;
            work.nudge_bias(l, i, -2.0 * epsilon);
            let minus = probe_loss(&work, input, coeffs)?;
            work.nudge_bias(l, i, epsilon);
            grads.biases[l][i] = (plus - minus) / (2.0 * epsilon);
        }
    }
    Ok(grads)
}

/// Worst relative error between an analytic gradient and the numeric oracle.
pub fn max_relative_error(analytic: &MlpGrads, numeric: &MlpGrads) -> f64 {
    let mut worst = 0.0f64;
    for (aw, nw) in analytic.weights.iter().zip(&numeric.weights) {
        for (&a, &n) in aw.iter().zip(nw) {
            worst = worst.max(relative_error(a, n));
        }
    }
    for (ab, nb) in analytic.biases.iter().zip(&numeric.biases) {
        for (&a, &n) in ab.iter().zip(nb) {
            worst = worst.max(relative_error(a, n));
        }
    }
    worst
}

/// Builds the network, probe input, and loss coefficients a spec describes.
/// Draw order: parameters, then input (uniform in -1..1), then coefficients
/// (uniform in -1..1).
pub fn materialize_spec(spec: &NetSpec) -> Result<(Mlp, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let net = Mlp::xavier(&spec.layer_sizes, &spec.activations, &mut rng)?;
    let input: Vec<f64> = (0..net.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let coeffs: Vec<f64> = (0..net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok((net, input, coeffs))
}

/// Runs one full gradient check for `spec`.
pub fn grad_check(spec: &NetSpec, config: &GradCheckConfig) -> Result<GradCheckReport> {
    let (net, input, coeffs) = materialize_spec(spec)?;
    let (_, cache) = net.forward(&input)?;
    let (analytic, _) = net.backward(&cache, &coeffs)?;
    let numeric = numeric_gradients(&net, &input, &coeffs, config.epsilon)?;
    let max_rel_error = max_relative_error(&analytic, &numeric);
    Ok(GradCheckReport {
        max_rel_error,
        param_count: net.param_count(),
        passed: max_rel_error <= config.tolerance,
    })
}
