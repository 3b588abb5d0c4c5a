//! Loss functions and the reparameterized Gaussian head.
//!
//! Every loss returns its value together with the exact analytic gradient so
//! training code never has to re-derive it. Gradients follow the mean-over-
//! elements convention for MSE and sum-over-dimensions for the KL term.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::TensorError;
use crate::Result;

/// Mean squared error over all elements and its gradient with respect to the
/// predictions: `d/dp mean((p - t)^2) = 2 (p - t) / n`.
pub fn mse_loss(prediction: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if prediction.len() != target.len() || prediction.is_empty() {
        return Err(TensorError::ShapeMismatch(format!(
            "mse over {} predictions vs {} targets",
            prediction.len(),
            target.len()
        )));
    }
    let n = prediction.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; prediction.len()];
    for (g, (&p, &t)) in grad.iter_mut().zip(prediction.iter().zip(target)) {
        let d = p - t;
        value += d * d;
        *g = 2.0 * d / n;
    }
    Ok((value / n, grad))
}

/// KL divergence of a diagonal Gaussian `N(mu, exp(log_var))` from the
/// standard normal, summed over dimensions:
///
/// `KL = 1/2 * sum(mu^2 + exp(log_var) - 1 - log_var)`
///
/// Returns the value and its gradients with respect to `mu` (which is `mu`)
/// and `log_var` (which is `(exp(log_var) - 1) / 2`).
pub fn kl_diag_gaussian(mu: &[f64], log_var: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if mu.len() != log_var.len() || mu.is_empty() {
        return Err(TensorError::ShapeMismatch(format!(
            "kl over {} means vs {} log-variances",
            mu.len(),
            log_var.len()
        )));
    }
    let mut value = 0.0;
    let mut d_mu = vec![0.0; mu.len()];
    let mut d_lv = vec![0.0; log_var.len()];
    for i in 0..mu.len() {
        let ev = log_var[i].exp();
        value += mu[i] * mu[i] + ev - 1.0 - log_var[i];
        d_mu[i] = mu[i];
        d_lv[i] = (ev - 1.0) / 2.0;
    }
    // The value is >= 0 in exact arithmetic; the clamp only absorbs
    // last-ulp rounding near the optimum.
    Ok(((value / 2.0).max(0.0), d_mu, d_lv))
}

/// The two halves of a Gaussian posterior head: the first half of the flat
/// encoder output is the mean, the second half the log-variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHead {
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
}

impl GaussianHead {
    /// Splits a flat `[mu.., log_var..]` vector in half.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.is_empty() || flat.len() % 2 != 0 {
            return Err(TensorError::ShapeMismatch(format!(
                "gaussian head needs an even, nonzero width, got {}",
                flat.len()
            )));
        }
        let half = flat.len() / 2;
        Ok(Self { mu: flat[..half].to_vec(), log_var: flat[half..].to_vec() })
    }

    /// Reassembles the flat gradient `[d_mu.., d_log_var..]` for backprop
    /// through the encoder output.
    pub fn flat_grad(d_mu: &[f64], d_log_var: &[f64]) -> Vec<f64> {
        let mut flat = Vec::with_capacity(d_mu.len() + d_log_var.len());
        flat.extend_from_slice(d_mu);
        flat.extend_from_slice(d_log_var);
        flat
    }
}

/// A latent draw together with the standard-normal noise that produced it,
/// kept so the backward pass can reuse the same noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ReparamSample {
    pub z: Vec<f64>,
    pub noise: Vec<f64>,
}

/// Reparameterization trick: `z = mu + exp(log_var / 2) * eps` with
/// `eps ~ N(0, I)` drawn from `rng` (one draw per dimension, in order).
pub fn reparameterize(head: &GaussianHead, rng: &mut impl Rng) -> Result<ReparamSample> {
    if head.mu.len() != head.log_var.len() {
        return Err(TensorError::ShapeMismatch("head halves differ in length".into()));
    }
    let noise: Vec<f64> = (0..head.mu.len()).map(|_| rng.sample(StandardNormal)).collect();
    let z = head
        .mu
        .iter()
        .zip(&head.log_var)
        .zip(&noise)
        .map(|((&m, &lv), &e)| m + (lv / 2.0).exp() * e)
        .collect();
    Ok(ReparamSample { z, noise })
}

impl ReparamSample {
    /// Backprop through the reparameterization: given `dL/dz`, returns
    /// `(dL/d_mu, dL/d_log_var)` where `dL/d_mu = dL/dz` and
    /// `dL/d_log_var = dL/dz * eps * exp(log_var / 2) / 2`.
    pub fn backward(&self, head: &GaussianHead, dz: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if dz.len() != self.z.len() {
            return Err(TensorError::ShapeMismatch("dz length differs from z".into()));
        }
        let d_mu = dz.to_vec();
        let d_lv = dz
            .iter()
            .zip(&self.noise)
            .zip(&head.log_var)
            .map(|((&g, &e), &lv)| g * e * (lv / 2.0).exp() / 2.0)
            .collect();
        Ok((d_mu, d_lv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mse_matches_hand_computation() {
        let (v, g) = mse_loss(&[1.0, 2.0], &[0.0, 4.0]).unwrap();
        // ((1)^2 + (-2)^2) / 2 = 2.5; grads 2*(1)/2 = 1 and 2*(-2)/2 = -2.
        assert!((v - 2.5).abs() < 1e-15);
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn mse_is_zero_at_the_target() {
        let (v, g) = mse_loss(&[0.3, -0.8], &[0.3, -0.8]).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn kl_is_zero_for_standard_normal_and_positive_elsewhere() {
        let (v, d_mu, d_lv) = kl_diag_gaussian(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(v, 0.0);
        assert!(d_mu.iter().all(|&x| x == 0.0));
        assert!(d_lv.iter().all(|&x| x == 0.0));
        let (v2, _, _) = kl_diag_gaussian(&[0.5], &[-1.0]).unwrap();
        assert!(v2 > 0.0);
    }

    #[test]
    fn kl_matches_hand_computation() {
        // mu = 1, log_var = ln 4: KL = (1 + 4 - 1 - ln 4)/2.
        let lv = 4.0f64.ln();
        let (v, d_mu, d_lv) = kl_diag_gaussian(&[1.0], &[lv]).unwrap();
        assert!((v - (4.0 - lv) / 2.0).abs() < 1e-15);
        assert!((d_mu[0] - 1.0).abs() < 1e-15);
        assert!((d_lv[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn head_splits_in_half_and_rejects_odd_widths() {
        let head = GaussianHead::from_flat(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(head.mu, vec![1.0, 2.0]);
        assert_eq!(head.log_var, vec![3.0, 4.0]);
        assert!(GaussianHead::from_flat(&[1.0, 2.0, 3.0]).is_err());
        assert!(GaussianHead::from_flat(&[]).is_err());
    }

    #[test]
    fn reparameterize_reduces_to_mu_at_zero_variance_noise() {
        // With log_var -> -inf the noise term vanishes; emulate with a very
        // negative log variance.
        let head = GaussianHead { mu: vec![0.7, -0.2], log_var: vec![-200.0, -200.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = reparameterize(&head, &mut rng).unwrap();
        assert!((s.z[0] - 0.7).abs() < 1e-12);
        assert!((s.z[1] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn reparameterize_is_deterministic_per_seed() {
        let head = GaussianHead { mu: vec![0.0; 4], log_var: vec![0.0; 4] };
        let a = reparameterize(&head, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = reparameterize(&head, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        // z equals mu + eps exactly when log_var = 0.
        for (z, e) in a.z.iter().zip(&a.noise) {
            assert!((z - e).abs() < 1e-15);
        }
    }

    #[test]
    fn reparam_backward_matches_chain_rule() {
        let head = GaussianHead { mu: vec![0.2], log_var: vec![0.6] };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = reparameterize(&head, &mut rng).unwrap();
        let (d_mu, d_lv) = s.backward(&head, &[2.0]).unwrap();
        assert!((d_mu[0] - 2.0).abs() < 1e-15);
        let expect = 2.0 * s.noise[0] * (0.6f64 / 2.0).exp() / 2.0;
        assert!((d_lv[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn shape_errors_are_reported() {
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mse_loss(&[], &[]).is_err());
        assert!(kl_diag_gaussian(&[1.0], &[1.0, 2.0]).is_err());
    }
}
