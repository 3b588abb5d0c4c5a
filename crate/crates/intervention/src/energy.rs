//! The linear energy-based distribution over feature masks.
//!
//! A model scores mask `g` with the energy `⟨ω, g⟩` and induces the
//! distribution `p(g) ∝ exp(⟨ω, g⟩/τ)`. Because the energy is linear in the
//! bits, the distribution factorizes: each bit is independent with
//! `P(g_i = 1) = logistic(ω_i/τ)`, which gives an exact sampler
//! ([`sample_graph`]) and a closed-form mode ([`best_graph`]).
//! [`graph_prob`] deliberately ignores the factorization and normalizes by
//! brute-force enumeration over all `2^n` masks, so it can serve as an
//! independent oracle for both.

use graph_policy::GraphMask;
use rand::Rng;

use crate::error::InterventionError;
use crate::Result;

/// Largest feature dimension [`graph_prob`] will normalize by enumeration.
pub const MAX_ENUM_DIM: usize = 20;

/// A linear energy model over masks plus the affine reward fit it came from.
///
/// `omega` and `tau` define the sampling distribution; `bias` completes the
/// reward predictor `R(g) ≈ ⟨ω, g⟩ + b` and plays no role in `p(g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    omega: Vec<f64>,
    bias: f64,
    tau: f64,
}

impl EnergyModel {
    /// Builds a model, rejecting empty or non-finite `omega`, non-finite
    /// `bias`, and `tau ≤ 0`.
    pub fn new(omega: Vec<f64>, bias: f64, tau: f64) -> Result<Self> {
        if omega.is_empty() {
            return Err(InterventionError::Config("omega must have at least one entry".into()));
        }
        if omega.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(InterventionError::Config("energy parameters must be finite".into()));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(InterventionError::Config(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { omega, bias, tau })
    }

    /// The all-zero model: every mask equally likely, predicted reward 0.
    pub fn zeros(feature_dim: usize, tau: f64) -> Result<Self> {
        Self::new(vec![0.0; feature_dim], 0.0, tau)
    }

    /// Per-feature energy weights ω.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Reward-fit intercept b.
    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Temperature τ.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of mask bits the model scores.
    pub fn feature_dim(&self) -> usize {
        self.omega.len()
    }

    /// The energy `⟨ω, g⟩` of a mask.
    pub fn energy(&self, g: &GraphMask) -> Result<f64> {
        if g.len() != self.omega.len() {
            return Err(InterventionError::Dim(format!(
                "mask has {} bits, model scores {}",
                g.len(),
                self.omega.len()
            )));
        }
        Ok(self
            .omega
            .iter()
            .zip(g.bits())
            .map(|(&w, &b)| w * b as f64)
            .sum())
    }

    /// The fitted reward prediction `⟨ω, g⟩ + b`.
    pub fn predicted_reward(&self, g: &GraphMask) -> Result<f64> {
        Ok(self.energy(g)? + self.bias)
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Exact probability of `g` under `p(g) ∝ exp(⟨ω, g⟩/τ)`, normalized by
/// enumerating every mask.
///
/// The sum is shifted by the maximum energy before exponentiation, so large
/// `ω` cannot overflow. Dimensions above [`MAX_ENUM_DIM`] are refused —
/// enumeration is exponential; use [`sample_graph`], which factorizes and
/// never enumerates.
pub fn graph_prob(model: &EnergyModel, g: &GraphMask) -> Result<f64> {
    let n = model.feature_dim();
    if g.len() != n {
        return Err(InterventionError::Dim(format!(
            "mask has {} bits, model scores {n}",
            g.len()
        )));
    }
    if n > MAX_ENUM_DIM {
        return Err(InterventionError::Config(format!(
            "feature_dim {n} exceeds {MAX_ENUM_DIM}: exact normalization enumerates 2^n masks; \
             use the factorized sample_graph instead"
        )));
    }
    // Highest possible energy: every positive weight on.
    let shift: f64 = model.omega.iter().map(|w| w.max(0.0)).sum::<f64>() / model.tau;
    let mut z = 0.0;
    for word in 0u64..(1u64 << n) {
        let mut e = 0.0;
        for (i, &w) in model.omega.iter().enumerate() {
            if (word >> i) & 1 == 1 {
                e += w;
            }
        }
        z += (e / model.tau - shift).exp();
    }
    Ok((model.energy(g)? / model.tau - shift).exp() / z)
}

/// Draws a mask from `p(g) ∝ exp(⟨ω, g⟩/τ)` via the exact factorization:
/// one `rng` draw per bit, in index order, with `P(g_i = 1) =
/// logistic(ω_i/τ)`.
pub fn sample_graph(model: &EnergyModel, rng: &mut impl Rng) -> GraphMask {
    let bits = model
        .omega
        .iter()
        .map(|&w| rng.random_bool(logistic(w / model.tau)) as u8)
        .collect();
    GraphMask::from_bits(bits).expect("model holds at least one finite weight")
}

/// The most probable mask: `g*_i = 1` iff `ω_i > 0`.
///
/// Ties at `ω_i = 0` resolve to 0 — both settings are equally likely, and
/// excluding the feature prunes harder. Because `p(g)` factorizes, this
/// elementwise rule equals the argmax over all `2^n` masks, and it is
/// invariant under joint positive rescaling of `ω` and `τ`.
pub fn best_graph(model: &EnergyModel) -> GraphMask {
    let bits = model.omega.iter().map(|&w| (w > 0.0) as u8).collect();
    GraphMask::from_bits(bits).expect("model holds at least one finite weight")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn mask(bits: &[u8]) -> GraphMask {
        GraphMask::from_bits(bits.to_vec()).unwrap()
    }

    #[test]
    fn zero_omega_makes_every_mask_equally_likely() {
        let model = EnergyModel::zeros(2, 1.0).unwrap();
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(graph_prob(&model, &mask(&bits)).unwrap(), 0.25);
        }
    }

    #[test]
    fn enumerated_probability_matches_the_hand_count() {
        // Weights exp⟨ω,g⟩ over the four masks are {1, 1, 3, 3}; the mask
        // (1,0) carries weight 3 of a total 8.
        let model = EnergyModel::new(vec![3f64.ln(), 0.0], 0.0, 1.0).unwrap();
        let p = graph_prob(&model, &mask(&[1, 0])).unwrap();
        assert!((p - 3.0 / 8.0).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn probabilities_sum_to_one_for_every_small_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=10 {
            let omega: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let model = EnergyModel::new(omega, 0.3, 0.8).unwrap();
            let mut total = 0.0;
            for word in 0u64..(1 << n) {
                let bits: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
                total += graph_prob(&model, &mask(&bits)).unwrap();
            }
            assert!((total - 1.0).abs() < 1e-9, "n = {n}: total = {total}");
        }
    }

    #[test]
    fn large_dimensions_are_directed_to_the_factorized_sampler() {
        let model = EnergyModel::zeros(MAX_ENUM_DIM + 1, 1.0).unwrap();
        let g = GraphMask::ones(MAX_ENUM_DIM + 1);
        let err = graph_prob(&model, &g).unwrap_err();
        assert!(matches!(err, InterventionError::Config(_)));
        assert!(err.to_string().contains("sample_graph"), "{err}");
    }

    #[test]
    fn saturated_weight_pins_its_bit() {
        let model = EnergyModel::new(vec![20.0, 0.0, -20.0], 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let g = sample_graph(&model, &mut rng);
            assert!(g.bit(0), "a +20 weight must always switch its bit on");
            assert!(!g.bit(2), "a −20 weight must always switch its bit off");
        }
    }

    #[test]
    fn best_graph_thresholds_at_zero_and_breaks_ties_down() {
        let model = EnergyModel::new(vec![1.2, -0.5, 0.0], 0.0, 1.0).unwrap();
        assert_eq!(best_graph(&model), mask(&[1, 0, 0]));
    }

    #[test]
    fn all_negative_weights_give_the_empty_mask() {
        let model = EnergyModel::new(vec![-0.1, -3.0, -0.7], 1.0, 2.0).unwrap();
        assert_eq!(best_graph(&model), mask(&[0, 0, 0]));
    }

    #[test]
    fn best_graph_matches_brute_force_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=10 {
            let omega: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let model = EnergyModel::new(omega, 0.0, 1.3).unwrap();
            let mut argmax = None;
            let mut best_p = -1.0;
            for word in 0u64..(1 << n) {
                let bits: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
                let g = mask(&bits);
                let p = graph_prob(&model, &g).unwrap();
                if p > best_p {
                    best_p = p;
                    argmax = Some(g);
                }
            }
            assert_eq!(best_graph(&model), argmax.unwrap(), "n = {n}");
        }
    }

    #[test]
    fn best_graph_is_invariant_under_joint_rescaling() {
        let omega = vec![0.4, -0.9, 0.0, 2.2];
        let a = EnergyModel::new(omega.clone(), 0.0, 1.0).unwrap();
        for c in [0.1, 3.0, 250.0] {
            let scaled: Vec<f64> = omega.iter().map(|w| w * c).collect();
            let b = EnergyModel::new(scaled, 0.0, c).unwrap();
            assert_eq!(best_graph(&a), best_graph(&b), "c = {c}");
            // The whole distribution is preserved, not only the mode.
            let g = mask(&[1, 0, 1, 1]);
            let (pa, pb) = (graph_prob(&a, &g).unwrap(), graph_prob(&b, &g).unwrap());
            assert!((pa - pb).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(EnergyModel::new(vec![], 0.0, 1.0).is_err());
        assert!(EnergyModel::new(vec![f64::NAN], 0.0, 1.0).is_err());
        assert!(EnergyModel::new(vec![0.0], f64::INFINITY, 1.0).is_err());
        assert!(EnergyModel::new(vec![0.0], 0.0, 0.0).is_err());
        assert!(EnergyModel::new(vec![0.0], 0.0, -1.0).is_err());
    }

    #[test]
    fn mismatched_mask_width_is_rejected() {
        let model = EnergyModel::zeros(3, 1.0).unwrap();
        let g = GraphMask::ones(4);
        assert!(matches!(model.energy(&g), Err(InterventionError::Dim(_))));
        assert!(matches!(graph_prob(&model, &g), Err(InterventionError::Dim(_))));
    }
}
