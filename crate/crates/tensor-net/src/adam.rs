//! Adam optimizer with bias-corrected first and second moments.
//!
//! One [`AdamState`] is kept per network; its moment buffers mirror the
//! network's parameter shapes. The update is the standard rule
//!
//! ```text
//! m <- b1 m + (1 - b1) g        v <- b2 v + (1 - b2) g^2
//! w <- w - lr * m_hat / (sqrt(v_hat) + eps)
//! ```
//!
//! with `m_hat = m / (1 - b1^t)`, `v_hat = v / (1 - b2^t)` and `t` counting
//! completed steps.

use crate::error::TensorError;
use crate::mlp::{Mlp, MlpGrads};
use crate::Result;

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl AdamParams {
    /// Default moments with a custom learning rate.
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self { learning_rate, ..Self::default() }
    }
}

/// Per-parameter moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_biases: Vec<Vec<f64>>,
    v_biases: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    /// Zeroed moments shaped like `net`.
    pub fn new(net: &Mlp) -> Self {
        let zw: Vec<Vec<f64>> = net.weights().iter().map(|w| vec![0.0; w.len()]).collect();
        let zb: Vec<Vec<f64>> = net.biases().iter().map(|b| vec![0.0; b.len()]).collect();
        Self { m_weights: zw.clone(), v_weights: zw, m_biases: zb.clone(), v_biases: zb, step: 0 }
    }

    /// Number of completed update steps.
    pub fn steps_taken(&self) -> u64 {
        self.step
    }
}

fn update_block(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    hp: &AdamParams,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.epsilon);
    }
}

/// Applies one Adam update to `net` in place. Gradient shapes must match the
/// network; non-finite gradients are refused so a numeric blow-up surfaces at
/// the step that caused it.
pub fn adam_step(
    net: &mut Mlp,
    grads: &MlpGrads,
    state: &mut AdamState,
    hp: &AdamParams,
) -> Result<()> {
    if grads.weights.len() != net.weights().len() || grads.biases.len() != net.biases().len() {
        return Err(TensorError::ShapeMismatch("gradient layer count differs from network".into()));
    }
    for (gw, w) in grads.weights.iter().zip(net.weights()) {
        if gw.len() != w.len() {
            return Err(TensorError::ShapeMismatch("weight gradient shape differs".into()));
        }
    }
    for (gb, b) in grads.biases.iter().zip(net.biases()) {
        if gb.len() != b.len() {
            return Err(TensorError::ShapeMismatch("bias gradient shape differs".into()));
        }
    }
    let finite = grads.weights.iter().flatten().chain(grads.biases.iter().flatten());
    for &g in finite {
        if !g.is_finite() {
            return Err(TensorError::NonFinite("gradient contains a non-finite value".into()));
        }
    }

    state.step += 1;
    let bc1 = 1.0 - hp.beta1.powi(state.step as i32);
    let bc2 = 1.0 - hp.beta2.powi(state.step as i32);
    let (weights, biases) = net.params_mut();
    for l in 0..weights.len() {
        update_block(
            &mut weights[l],
            &grads.weights[l],
            &mut state.m_weights[l],
            &mut state.v_weights[l],
            hp,
            bc1,
            bc2,
        );
    }
    for l in 0..biases.len() {
        update_block(
            &mut biases[l],
            &grads.biases[l],
            &mut state.m_biases[l],
            &mut state.v_biases[l],
            hp,
            bc1,
            bc2,
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::Activation;

    /// A 1x1 identity "network" is just a scalar weight; Adam on it matches
    /// the textbook scalar recursion computed by hand below.
    fn scalar_net(w: f64) -> Mlp {
        Mlp::from_parts(vec![1, 1], vec![Activation::Identity], vec![vec![w]], vec![vec![0.0]])
            .unwrap()
    }

    #[test]
    fn first_step_moves_by_learning_rate_against_gradient_sign() {
        // On step one m_hat = g and v_hat = g^2, so the update is
        // lr * g / (|g| + eps) ~ lr * sign(g).
        let mut net = scalar_net(1.0);
        let mut state = AdamState::new(&net);
        let hp = AdamParams::with_learning_rate(0.05);
        let mut grads = MlpGrads::zeros_like(&net);
        grads.weights[0][0] = 2.0; // gradient of w^2 at w = 1
        adam_step(&mut net, &grads, &mut state, &hp).unwrap();
        let w = net.weights()[0][0];
        assert!((w - (1.0 - 0.05)).abs() < 1e-6, "w after one step: {w}");
        assert_eq!(state.steps_taken(), 1);
    }

    #[test]
    fn minimizes_a_quadratic() {
        // Loss w^2, gradient 2w. Independent scalar recursion as the oracle.
        let hp = AdamParams::with_learning_rate(0.05);
        let mut net = scalar_net(1.0);
        let mut state = AdamState::new(&net);
        let (mut m, mut v, mut w_ref) = (0.0f64, 0.0f64, 1.0f64);
        for t in 1..=100u32 {
            let w = net.weights()[0][0];
            let mut grads = MlpGrads::zeros_like(&net);
            grads.weights[0][0] = 2.0 * w;
            adam_step(&mut net, &grads, &mut state, &hp).unwrap();

            let g = 2.0 * w_ref;
            m = hp.beta1 * m + (1.0 - hp.beta1) * g;
            v = hp.beta2 * v + (1.0 - hp.beta2) * g * g;
            let m_hat = m / (1.0 - hp.beta1.powi(t as i32));
            let v_hat = v / (1.0 - hp.beta2.powi(t as i32));
            w_ref -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.epsilon);
            assert!(
                (net.weights()[0][0] - w_ref).abs() < 1e-12,
                "diverged from scalar recursion at step {t}"
            );
        }
        assert!(net.weights()[0][0].abs() < 0.2, "did not descend: {}", net.weights()[0][0]);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut net = scalar_net(0.37);
        let mut state = AdamState::new(&net);
        let grads = MlpGrads::zeros_like(&net);
        adam_step(&mut net, &grads, &mut state, &AdamParams::default()).unwrap();
        assert_eq!(net.weights()[0][0], 0.37);
    }

    #[test]
    fn non_finite_gradients_are_refused() {
        let mut net = scalar_net(1.0);
        let mut state = AdamState::new(&net);
        let mut grads = MlpGrads::zeros_like(&net);
        grads.weights[0][0] = f64::NAN;
        let err = adam_step(&mut net, &grads, &mut state, &AdamParams::default());
        assert!(matches!(err, Err(TensorError::NonFinite(_))));
        assert_eq!(net.weights()[0][0], 1.0, "refused step must not mutate");
    }

    #[test]
    fn mismatched_shapes_are_refused() {
        let mut net = scalar_net(1.0);
        let other = Mlp::from_parts(
            vec![2, 1],
            vec![Activation::Identity],
            vec![vec![0.0, 0.0]],
            vec![vec![0.0]],
        )
        .unwrap();
        let mut state = AdamState::new(&net);
        let grads = MlpGrads::zeros_like(&other);
        assert!(adam_step(&mut net, &grads, &mut state, &AdamParams::default()).is_err());
    }
}
