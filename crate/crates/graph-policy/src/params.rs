//! Policy architecture: feature encoder, style encoder, and the
//! graph-masked chunk decoder.
//!
//! Data flow (training):
//!
//! ```text
//! obs ──encode──> x ──⊙ g──┐
//!                    g ────┤
//! joints ──────────────────┼──decoder──> action chunk (k × act_dim)
//! (a_chunk, joints) ──style┤
//!     └─> (μ, log σ²) ─z───┘   z = μ + σ·ε  (training), z = 0 (inference)
//! ```
//!
//! The decoder sees both the masked features `x ⊙ g` and the mask `g`
//! itself, so it can distinguish "feature hidden" from "feature equals
//! zero". Masked feature positions cannot influence the output at all —
//! that independence is exact, not approximate, and is property-tested.

use rand::Rng;
use serde::{Deserialize, Serialize};
use tensor_net::{Activation, ForwardCache, GaussianHead, Mlp};
use transfer_env::Dataset;

use crate::error::PolicyError;
use crate::mask::GraphMask;
use crate::Result;

/// How observations become features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderMode {
    /// Features are the raw observation (`feature_dim = obs_dim`); masks
    /// then act on interpretable dimensions.
    Identity,
    /// A learned MLP compresses observations to `feature_dim` features.
    Mlp,
}

/// Graph distribution used during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSampling {
    /// Fresh uniform mask per sample (the intervention-ready mode).
    Uniform,
    /// Mask pinned to all-ones (plain behavior cloning on the identical
    /// architecture — the baseline).
    AllOnes,
}

/// All widths in one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDims {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub joints_dim: usize,
    pub feature_dim: usize,
    pub z_dim: usize,
    pub chunk: usize,
}

impl PolicyDims {
    /// Validates widths and cross-field consistency for `mode`.
    pub fn validate(&self, mode: EncoderMode) -> Result<()> {
        let fields = [
            ("obs_dim", self.obs_dim),
            ("act_dim", self.act_dim),
            ("joints_dim", self.joints_dim),
            ("feature_dim", self.feature_dim),
            ("z_dim", self.z_dim),
            ("chunk", self.chunk),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(PolicyError::Config(format!("{name} must be >= 1")));
            }
        }
        if mode == EncoderMode::Identity && self.feature_dim != self.obs_dim {
            return Err(PolicyError::Config(format!(
                "identity encoder requires feature_dim = obs_dim, got {} vs {}",
                self.feature_dim, self.obs_dim
            )));
        }
        Ok(())
    }

    /// Width of the style encoder input: the flattened chunk plus joints.
    pub fn style_in(&self) -> usize {
        self.act_dim * self.chunk + self.joints_dim
    }

    /// Width of the decoder input: `[x ⊙ g, g, joints, z]`.
    pub fn decoder_in(&self) -> usize {
        2 * self.feature_dim + self.joints_dim + self.z_dim
    }

    /// Width of the decoder output: the flattened chunk.
    pub fn chunk_out(&self) -> usize {
        self.act_dim * self.chunk
    }
}

/// Per-dimension affine normalization of the action space.
///
/// Velocity commands are an order of magnitude smaller than the 0/1 grip
/// commands; a plain squared error over raw actions would spend nearly all
/// of its gradient on grip timing and leave the reach direction sloppy.
/// Training therefore standardizes each action dimension to zero mean and
/// unit scale over the demo set; the networks live entirely in that space,
/// and [`PolicyParams::decode`] maps predictions back to environment units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub mean: Vec<f64>,
    /// Per-dimension scale (standard deviation, floored away from zero).
    pub scale: Vec<f64>,
}

impl ActionStats {
    /// The no-op normalization (mean 0, scale 1) — raw environment units.
    pub fn identity(act_dim: usize) -> Self {
        Self { mean: vec![0.0; act_dim], scale: vec![1.0; act_dim] }
    }

    /// Mean and standard deviation of every action dimension across all
    /// steps of all episodes. Constant dimensions get a floored scale so
    /// normalization stays invertible.
    pub fn from_dataset(dataset: &Dataset) -> Result<Self> {
        let act_dim = dataset.config.act_dim();
        let mut sum = vec![0.0; act_dim];
        let mut sum_sq = vec![0.0; act_dim];
        let mut n = 0usize;
        for ep in &dataset.episodes {
            for row in &ep.actions {
                if row.len() != act_dim {
                    return Err(PolicyError::Data(format!(
                        "action row has {} dims, config says {act_dim}",
                        row.len()
                    )));
                }
                for (j, &a) in row.iter().enumerate() {
                    sum[j] += a;
                    sum_sq[j] += a * a;
                }
                n += 1;
            }
        }
        if n == 0 {
            return Err(PolicyError::Data("dataset has no action rows".into()));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        let scale: Vec<f64> = (0..act_dim)
            .map(|j| {
                let var = (sum_sq[j] / n as f64 - mean[j] * mean[j]).max(0.0);
                var.sqrt().max(1e-6)
            })
            .collect();
        Ok(Self { mean, scale })
    }

    /// Checks lengths, finiteness, and positive scales for `act_dim`.
    pub fn validate(&self, act_dim: usize) -> Result<()> {
        if self.mean.len() != act_dim || self.scale.len() != act_dim {
            return Err(PolicyError::Dim(format!(
                "action stats cover {} / {} dims, expected {act_dim}",
                self.mean.len(),
                self.scale.len()
            )));
        }
        let finite = self.mean.iter().chain(&self.scale).all(|v| v.is_finite());
        if !finite || self.scale.iter().any(|&s| s <= 0.0) {
            return Err(PolicyError::Numeric("action stats must be finite with scale > 0".into()));
        }
        Ok(())
    }

    /// Maps a flattened chunk from environment units to normalized units.
    pub fn normalize_chunk(&self, flat: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        flat.iter().enumerate().map(|(i, &a)| (a - self.mean[i % d]) / self.scale[i % d]).collect()
    }

    /// Inverse of [`Self::normalize_chunk`].
    pub fn denormalize_chunk(&self, flat: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        flat.iter().enumerate().map(|(i, &v)| v * self.scale[i % d] + self.mean[i % d]).collect()
    }
}

/// The trainable policy: up to three networks plus the dimension record and
/// the action normalization the networks were trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub(crate) dims: PolicyDims,
    pub(crate) encoder_mode: EncoderMode,
    /// Present only in [`EncoderMode::Mlp`].
    pub(crate) encoder: Option<Mlp>,
    pub(crate) style: Mlp,
    pub(crate) decoder: Mlp,
    pub(crate) action_stats: ActionStats,
}

fn net_activations(hidden_layers: usize) -> Vec<Activation> {
    let mut acts = vec![Activation::Tanh; hidden_layers + 1];
    acts[hidden_layers] = Activation::Identity;
    acts
}

fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input);
    sizes.extend_from_slice(hidden);
    sizes.push(output);
    sizes
}

impl PolicyParams {
    /// Builds a fresh policy. Hidden layers use tanh; outputs are linear.
    /// The style and decoder output layers start at exactly zero, so before
    /// any update the policy predicts the zero chunk (in normalized action
    /// units) and the style posterior is the standard normal (KL exactly 0).
    /// Network draw order: encoder (mlp mode only), style, decoder.
    pub fn new(
        dims: PolicyDims,
        encoder_mode: EncoderMode,
        hidden: &[usize],
        action_stats: ActionStats,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        dims.validate(encoder_mode)?;
        action_stats.validate(dims.act_dim)?;
        if hidden.is_empty() || hidden.iter().any(|&h| h == 0) {
            return Err(PolicyError::Config("hidden layer sizes must be >= 1".into()));
        }
        let acts = net_activations(hidden.len());
        let encoder = match encoder_mode {
            EncoderMode::Identity => None,
            EncoderMode::Mlp => Some(Mlp::xavier(
                &layer_sizes(dims.obs_dim, hidden, dims.feature_dim),
                &acts,
                rng,
            )?),
        };
        let mut style =
            Mlp::xavier(&layer_sizes(dims.style_in(), hidden, 2 * dims.z_dim), &acts, rng)?;
        style.zero_output_layer();
        let mut decoder =
            Mlp::xavier(&layer_sizes(dims.decoder_in(), hidden, dims.chunk_out()), &acts, rng)?;
        decoder.zero_output_layer();
        Ok(Self { dims, encoder_mode, encoder, style, decoder, action_stats })
    }

    /// Reassembles a policy from its parts (checkpoint loading). Shapes are
    /// validated against `dims`.
    pub fn from_parts(
        dims: PolicyDims,
        encoder_mode: EncoderMode,
        encoder: Option<Mlp>,
        style: Mlp,
        decoder: Mlp,
        action_stats: ActionStats,
    ) -> Result<Self> {
        dims.validate(encoder_mode)?;
        action_stats.validate(dims.act_dim)?;
        match (encoder_mode, &encoder) {
            (EncoderMode::Identity, None) => {}
            (EncoderMode::Mlp, Some(net)) => {
                if net.input_dim() != dims.obs_dim || net.output_dim() != dims.feature_dim {
                    return Err(PolicyError::Dim("encoder net shape".into()));
                }
            }
            (EncoderMode::Identity, Some(_)) => {
                return Err(PolicyError::Config("identity mode carries no encoder net".into()))
            }
            (EncoderMode::Mlp, None) => {
                return Err(PolicyError::Config("mlp mode requires an encoder net".into()))
            }
        }
        if style.input_dim() != dims.style_in() || style.output_dim() != 2 * dims.z_dim {
            return Err(PolicyError::Dim("style net shape".into()));
        }
        if decoder.input_dim() != dims.decoder_in() || decoder.output_dim() != dims.chunk_out() {
            return Err(PolicyError::Dim("decoder net shape".into()));
        }
        Ok(Self { dims, encoder_mode, encoder, style, decoder, action_stats })
    }

    /// Dimension record.
    pub fn dims(&self) -> &PolicyDims {
        &self.dims
    }

    /// Encoder mode.
    pub fn encoder_mode(&self) -> EncoderMode {
        self.encoder_mode
    }

    /// The action normalization the networks operate under.
    pub fn action_stats(&self) -> &ActionStats {
        &self.action_stats
    }

    /// Observations to features. Identity mode returns the observation
    /// unchanged; mlp mode runs the encoder network.
    pub fn encode(&self, obs: &[f64]) -> Result<Vec<f64>> {
        if obs.len() != self.dims.obs_dim {
            return Err(PolicyError::Dim(format!(
                "observation has {} dims, policy expects {}",
                obs.len(),
                self.dims.obs_dim
            )));
        }
        match &self.encoder {
            None => Ok(obs.to_vec()),
            Some(net) => Ok(net.forward_output(obs)?),
        }
    }

    /// Encoder forward keeping the cache (training path); identity mode has
    /// no cache.
    pub(crate) fn encode_cached(&self, obs: &[f64]) -> Result<(Vec<f64>, Option<ForwardCache>)> {
        if obs.len() != self.dims.obs_dim {
            return Err(PolicyError::Dim("observation width".into()));
        }
        match &self.encoder {
            None => Ok((obs.to_vec(), None)),
            Some(net) => {
                let (x, cache) = net.forward(obs)?;
                Ok((x, Some(cache)))
            }
        }
    }

    /// Posterior head over the style latent given a flattened action chunk
    /// (in environment units; normalization is applied internally) and the
    /// joints.
    pub fn style_encode(&self, chunk_flat: &[f64], joints: &[f64]) -> Result<GaussianHead> {
        let normalized = self.action_stats.normalize_chunk(chunk_flat);
        Ok(GaussianHead::from_flat(&self.style_forward(&normalized, joints)?.0)?)
    }

    pub(crate) fn style_forward(
        &self,
        chunk_flat: &[f64],
        joints: &[f64],
    ) -> Result<(Vec<f64>, ForwardCache)> {
        if chunk_flat.len() != self.dims.chunk_out() {
            return Err(PolicyError::Dim(format!(
                "action chunk has {} values, expected {} (k={} × act_dim={})",
                chunk_flat.len(),
                self.dims.chunk_out(),
                self.dims.chunk,
                self.dims.act_dim
            )));
        }
        if joints.len() != self.dims.joints_dim {
            return Err(PolicyError::Dim("joints width".into()));
        }
        let mut input = Vec::with_capacity(self.dims.style_in());
        input.extend_from_slice(chunk_flat);
        input.extend_from_slice(joints);
        Ok(self.style.forward(&input)?)
    }

    /// Assembles the decoder input `[x ⊙ g, g, joints, z]`.
    pub(crate) fn decoder_input(
        &self,
        x: &[f64],
        g: &GraphMask,
        joints: &[f64],
        z: &[f64],
    ) -> Result<Vec<f64>> {
        if x.len() != self.dims.feature_dim || g.len() != self.dims.feature_dim {
            return Err(PolicyError::Dim(format!(
                "features/mask of {} / {} dims, expected {}",
                x.len(),
                g.len(),
                self.dims.feature_dim
            )));
        }
        if joints.len() != self.dims.joints_dim || z.len() != self.dims.z_dim {
            return Err(PolicyError::Dim("joints or latent width".into()));
        }
        let mut input = Vec::with_capacity(self.dims.decoder_in());
        input.extend(g.apply(x)?);
        input.extend(g.to_f64_vec());
        input.extend_from_slice(joints);
        input.extend_from_slice(z);
        Ok(input)
    }

    /// Runs the decoder over `[x ⊙ g, g, joints, z]` and maps the output
    /// back to environment units, returning the flattened predicted chunk.
    pub fn decode(&self, x: &[f64], g: &GraphMask, joints: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        let raw = self.decode_normalized(x, g, joints, z)?;
        Ok(self.action_stats.denormalize_chunk(&raw))
    }

    /// Decoder output in normalized action units — the space the training
    /// objective lives in.
    pub(crate) fn decode_normalized(
        &self,
        x: &[f64],
        g: &GraphMask,
        joints: &[f64],
        z: &[f64],
    ) -> Result<Vec<f64>> {
        let input = self.decoder_input(x, g, joints, z)?;
        Ok(self.decoder.forward_output(&input)?)
    }

    /// Inference-mode action chunk: `decode(encode(obs), g, joints, z = 0)`.
    pub fn act(&self, obs: &[f64], joints: &[f64], g: &GraphMask) -> Result<Vec<f64>> {
        let x = self.encode(obs)?;
        let z = vec![0.0; self.dims.z_dim];
        self.decode(&x, g, joints, &z)
    }

    /// The action chunk as `k` rows of `act_dim`.
    pub fn chunk_rows(&self, flat: &[f64]) -> Vec<Vec<f64>> {
        flat.chunks(self.dims.act_dim).map(<[f64]>::to_vec).collect()
    }

    /// Read access to the underlying networks (checkpointing, diagnostics):
    /// `(encoder, style, decoder)`.
    pub fn nets(&self) -> (Option<&Mlp>, &Mlp, &Mlp) {
        (self.encoder.as_ref(), &self.style, &self.decoder)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_dims() -> PolicyDims {
        PolicyDims { obs_dim: 10, act_dim: 3, joints_dim: 4, feature_dim: 10, z_dim: 2, chunk: 5 }
    }

    fn small_policy(seed: u64) -> PolicyParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PolicyParams::new(
            small_dims(),
            EncoderMode::Identity,
            &[16, 16],
            ActionStats::identity(3),
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn identity_encoder_returns_observations_unchanged() {
        let policy = small_policy(1);
        let obs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        assert_eq!(policy.encode(&obs).unwrap(), obs);
    }

    #[test]
    fn mlp_encoder_is_deterministic_and_shaped() {
        let dims = PolicyDims { feature_dim: 6, ..small_dims() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let policy =
            PolicyParams::new(dims, EncoderMode::Mlp, &[16], ActionStats::identity(3), &mut rng)
                .unwrap();
        let obs: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let a = policy.encode(&obs).unwrap();
        let b = policy.encode(&obs).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn identity_mode_rejects_mismatched_feature_dim() {
        let dims = PolicyDims { feature_dim: 7, ..small_dims() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stats = ActionStats::identity(3);
        assert!(PolicyParams::new(dims, EncoderMode::Identity, &[8], stats, &mut rng).is_err());
    }

    #[test]
    fn fresh_policy_predicts_zero_and_standard_normal_style() {
        let policy = small_policy(4);
        let obs = vec![0.5; 10];
        let joints = vec![0.1; 4];
        let chunk = vec![0.3; 15];
        let head = policy.style_encode(&chunk, &joints).unwrap();
        assert!(head.mu.iter().all(|&m| m == 0.0));
        assert!(head.log_var.iter().all(|&lv| lv == 0.0));
        let out = policy.act(&obs, &joints, &GraphMask::ones(10)).unwrap();
        assert!(out.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn style_head_has_z_dim_halves() {
        let policy = small_policy(5);
        let head = policy.style_encode(&vec![0.0; 15], &vec![0.0; 4]).unwrap();
        assert_eq!(head.mu.len(), 2);
        assert_eq!(head.log_var.len(), 2);
        assert!(policy.style_encode(&vec![0.0; 14], &vec![0.0; 4]).is_err());
    }

    #[test]
    fn masked_positions_cannot_influence_the_output() {
        let policy = small_policy(6);
        let joints = vec![0.2; 4];
        let z = vec![0.0; 2];
        let g = GraphMask::from_bits(vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 0]).unwrap();
        let x1: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut x2 = x1.clone();
        for i in (1..10).step_by(2) {
            x2[i] = -999.0; // only masked positions change
        }
        let y1 = policy.decode(&x1, &g, &joints, &z).unwrap();
        let y2 = policy.decode(&x2, &g, &joints, &z).unwrap();
        assert_eq!(y1, y2, "masked inputs leaked into the output");
    }

    #[test]
    fn all_zero_mask_blocks_features_entirely() {
        let policy = small_policy(7);
        let joints = vec![0.2; 4];
        let z = vec![0.0; 2];
        let g = GraphMask::zeros(10);
        let y1 = policy.decode(&vec![1.0; 10], &g, &joints, &z).unwrap();
        let y2 = policy.decode(&vec![-5.0; 10], &g, &joints, &z).unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn act_equals_decode_with_zero_latent() {
        let policy = small_policy(8);
        let obs: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
        let joints = vec![0.0, 0.1, 0.2, 0.3];
        let g = GraphMask::ones(10);
        let via_act = policy.act(&obs, &joints, &g).unwrap();
        let via_decode =
            policy.decode(&policy.encode(&obs).unwrap(), &g, &joints, &[0.0, 0.0]).unwrap();
        assert_eq!(via_act, via_decode);
        assert_eq!(policy.chunk_rows(&via_act).len(), 5);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let policy = small_policy(9);
        assert!(policy.encode(&vec![0.0; 9]).is_err());
        assert!(policy.act(&vec![0.0; 10], &vec![0.0; 3], &GraphMask::ones(10)).is_err());
        assert!(policy.act(&vec![0.0; 10], &vec![0.0; 4], &GraphMask::ones(9)).is_err());
        let bad_z = policy.decode(&vec![0.0; 10], &GraphMask::ones(10), &vec![0.0; 4], &[0.0; 3]);
        assert!(bad_z.is_err());
    }
}
