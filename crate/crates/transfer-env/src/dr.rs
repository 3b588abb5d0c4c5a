//! Domain-randomization count sampling and per-episode seed derivation.

use rand::Rng;

use crate::config::{DrExponent, DR_COUNT_SUPPORT};
use crate::Result;

/// Draws a distractor count `i` in `1..=6` with probability
/// `i^k / sum_{j=1..6} j^k`. `k = 0` is uniform; the infinite sentinel
/// always returns 6. Weights are computed as `(i/6)^k` so large finite
/// exponents stay numerically stable and converge to the infinite case.
pub fn dr_sample_count(k: DrExponent, rng: &mut impl Rng) -> Result<usize> {
    k.validate()?;
    let k = match k {
        DrExponent::Infinite => return Ok(DR_COUNT_SUPPORT),
        DrExponent::Finite(k) => k,
    };
    let weights: Vec<f64> = (1..=DR_COUNT_SUPPORT)
        .map(|i| (i as f64 / DR_COUNT_SUPPORT as f64).powf(k))
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        // powf underflow can zero every weight for huge k; that limit is the
        // infinite case.
        return Ok(DR_COUNT_SUPPORT);
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return Ok(i + 1);
        }
    }
    Ok(DR_COUNT_SUPPORT)
}

/// Exact probability table of [`dr_sample_count`] for a finite exponent,
/// indexed `0 => count 1`.
pub fn dr_count_probabilities(k: DrExponent) -> Result<[f64; DR_COUNT_SUPPORT]> {
    k.validate()?;
    let mut probs = [0.0; DR_COUNT_SUPPORT];
    match k {
        DrExponent::Infinite => probs[DR_COUNT_SUPPORT - 1] = 1.0,
        DrExponent::Finite(k) => {
            let weights: Vec<f64> = (1..=DR_COUNT_SUPPORT)
                .map(|i| (i as f64 / DR_COUNT_SUPPORT as f64).powf(k))
                .collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) || !total.is_finite() {
                probs[DR_COUNT_SUPPORT - 1] = 1.0;
            } else {
                for (p, w) in probs.iter_mut().zip(&weights) {
                    *p = w / total;
                }
            }
        }
    }
    Ok(probs)
}

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The `(index + 1)`-th output of a splitmix64 generator seeded with
/// `master`: the generator's state after `n` calls is
/// `master + n * gamma`, and each output is the finalizer of that state.
/// Episodes can therefore be seeded in any order, or in parallel, and get
/// the same streams.
pub fn episode_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(SPLITMIX_GAMMA.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
