//! Binary feature masks ("graphs") over the policy's feature vector.
//!
//! A mask has one bit per feature dimension: bit `i` decides whether feature
//! `i` is visible to the decoder. The uniform sampler draws each bit as an
//! independent fair coin, which is the exploration distribution used while
//! collecting intervention data.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::PolicyError;
use crate::Result;

/// A binary vector of feature-inclusion bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GraphMask {
    bits: Vec<u8>,
}

impl GraphMask {
    /// Builds a mask from 0/1 entries.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(PolicyError::Config("mask must have at least one bit".into()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(PolicyError::Config("mask entries must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    /// All-ones mask (every feature visible).
    pub fn ones(n: usize) -> Self {
        Self { bits: vec![1; n] }
    }

    /// All-zeros mask (every feature hidden).
    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// True for the empty mask (never constructible via `from_bits`).
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit `i` as a bool.
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    /// The raw 0/1 entries.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// The bits as 0.0/1.0 values (the decoder's mask input block).
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| b as f64).collect()
    }

    /// Elementwise product `x ⊙ g`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.bits.len() {
            return Err(PolicyError::Dim(format!(
                "masking {} features with a {}-bit mask",
                x.len(),
                self.bits.len()
            )));
        }
        Ok(x.iter().zip(&self.bits).map(|(&v, &b)| v * b as f64).collect())
    }

    /// Compact `0`/`1` string, most significant bit first in index order.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    /// Parses the string form produced by [`Self::to_bit_string`].
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(PolicyError::Parse(format!("mask character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(bits)
    }
}

/// Draws a mask whose bits are independent fair coins (one `rng` draw per
/// bit, in index order).
pub fn sample_uniform_graph(feature_dim: usize, rng: &mut impl Rng) -> Result<GraphMask> {
    if feature_dim == 0 {
        return Err(PolicyError::Config("feature_dim must be >= 1".into()));
    }
    let bits = (0..feature_dim).map(|_| rng.random_bool(0.5) as u8).collect();
    Ok(GraphMask { bits })
}
