//! Policy checkpoints: the three networks plus a header describing the
//! architecture and how the policy was trained.
//!
//! The header records the graph-sampling mode so downstream consumers can
//! tell an intervention-ready policy (trained under uniform masks) from the
//! all-ones baseline, which is meaningless to intervene on.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tensor_net::{decode_f64, encode_f64, MlpCheckpoint};

use crate::error::PolicyError;
use crate::params::{ActionStats, EncoderMode, GraphSampling, PolicyDims, PolicyParams};
use crate::Result;

/// Current policy checkpoint layout version.
pub const POLICY_CHECKPOINT_VERSION: u32 = 1;

/// Architecture summary stored at the top of every checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyHeader {
    pub encoder_mode: EncoderMode,
    pub feature_dim: usize,
    pub z_dim: usize,
    pub chunk: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub joints_dim: usize,
}

/// Serializable image of a trained policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCheckpoint {
    pub version: u32,
    pub header: PolicyHeader,
    /// How masks were drawn during training.
    pub graph_sampling: GraphSampling,
    /// Per-dimension action normalization (round-trip-exact strings).
    pub action_mean: Vec<String>,
    pub action_scale: Vec<String>,
    pub encoder: Option<MlpCheckpoint>,
    pub style: MlpCheckpoint,
    pub decoder: MlpCheckpoint,
}

impl PolicyCheckpoint {
    /// Captures a policy together with its training mode.
    pub fn from_params(params: &PolicyParams, graph_sampling: GraphSampling) -> Result<Self> {
        let dims = params.dims();
        let (encoder, style, decoder) = params.nets();
        Ok(Self {
            version: POLICY_CHECKPOINT_VERSION,
            header: PolicyHeader {
                encoder_mode: params.encoder_mode(),
                feature_dim: dims.feature_dim,
                z_dim: dims.z_dim,
                chunk: dims.chunk,
                obs_dim: dims.obs_dim,
                act_dim: dims.act_dim,
                joints_dim: dims.joints_dim,
            },
            graph_sampling,
            action_mean: params.action_stats().mean.iter().copied().map(encode_f64).collect(),
            action_scale: params.action_stats().scale.iter().copied().map(encode_f64).collect(),
            encoder: encoder.map(MlpCheckpoint::from_net).transpose()?,
            style: MlpCheckpoint::from_net(style)?,
            decoder: MlpCheckpoint::from_net(decoder)?,
        })
    }

    /// Rebuilds the policy, validating version and shapes.
    pub fn to_params(&self) -> Result<PolicyParams> {
        if self.version != POLICY_CHECKPOINT_VERSION {
            return Err(PolicyError::Parse(format!(
                "unsupported policy checkpoint version {} (expected {POLICY_CHECKPOINT_VERSION})",
                self.version
            )));
        }
        let h = &self.header;
        let dims = PolicyDims {
            obs_dim: h.obs_dim,
            act_dim: h.act_dim,
            joints_dim: h.joints_dim,
            feature_dim: h.feature_dim,
            z_dim: h.z_dim,
            chunk: h.chunk,
        };
        let encoder = self.encoder.as_ref().map(MlpCheckpoint::to_net).transpose()?;
        let decode_all = |v: &[String]| -> Result<Vec<f64>> {
            v.iter().map(|s| Ok(decode_f64(s)?)).collect()
        };
        let action_stats = ActionStats {
            mean: decode_all(&self.action_mean)?,
            scale: decode_all(&self.action_scale)?,
        };
        PolicyParams::from_parts(
            dims,
            h.encoder_mode,
            encoder,
            self.style.to_net()?,
            self.decoder.to_net()?,
            action_stats,
        )
    }
}

/// Writes a policy checkpoint as JSON.
pub fn save_policy(
    params: &PolicyParams,
    graph_sampling: GraphSampling,
    path: &Path,
) -> Result<()> {
    let ckpt = PolicyCheckpoint::from_params(params, graph_sampling)?;
    let body = serde_json::to_string_pretty(&ckpt)
        .map_err(|e| PolicyError::Parse(format!("encoding checkpoint: {e}")))?;
    fs::write(path, body).map_err(|e| PolicyError::Io(format!("writing {}: {e}", path.display())))
}

/// Reads a policy checkpoint, returning the policy and its recorded
/// graph-sampling mode.
pub fn load_policy(path: &Path) -> Result<(PolicyParams, GraphSampling)> {
    let body = fs::read_to_string(path)
        .map_err(|e| PolicyError::Io(format!("reading {}: {e}", path.display())))?;
    let ckpt: PolicyCheckpoint = serde_json::from_str(&body)
        .map_err(|e| PolicyError::Parse(format!("decoding {}: {e}", path.display())))?;
    Ok((ckpt.to_params()?, ckpt.graph_sampling))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_policy(mode: EncoderMode, seed: u64) -> PolicyParams {
        let dims = PolicyDims {
            obs_dim: 10,
            act_dim: 3,
            joints_dim: 4,
            feature_dim: if mode == EncoderMode::Identity { 10 } else { 6 },
            z_dim: 2,
            chunk: 5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stats = ActionStats {
            mean: vec![0.1, -0.23312804709405502, 0.0],
            scale: vec![1.0, 0.02052079055270283, 0.45240081018445977],
        };
        PolicyParams::new(dims, mode, &[12], stats, &mut rng).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact_for_both_encoder_modes() {
        let dir = tempfile::tempdir().unwrap();
        for (i, mode) in [EncoderMode::Identity, EncoderMode::Mlp].into_iter().enumerate() {
            let policy = sample_policy(mode, 100 + i as u64);
            let path = dir.path().join(format!("p{i}.json"));
            save_policy(&policy, GraphSampling::Uniform, &path).unwrap();
            let (restored, sampling) = load_policy(&path).unwrap();
            assert_eq!(policy, restored);
            assert_eq!(sampling, GraphSampling::Uniform);
        }
    }

    #[test]
    fn sampling_mode_is_preserved() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("baseline.json");
        let policy = sample_policy(EncoderMode::Identity, 3);
        save_policy(&policy, GraphSampling::AllOnes, &path).unwrap();
        let (_, sampling) = load_policy(&path).unwrap();
        assert_eq!(sampling, GraphSampling::AllOnes);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let policy = sample_policy(EncoderMode::Identity, 4);
        let mut ckpt = PolicyCheckpoint::from_params(&policy, GraphSampling::Uniform).unwrap();
        ckpt.header.feature_dim = 99;
        assert!(ckpt.to_params().is_err());
        let mut versioned = PolicyCheckpoint::from_params(&policy, GraphSampling::Uniform).unwrap();
        versioned.version = 7;
        assert!(matches!(versioned.to_params(), Err(PolicyError::Parse(_))));
    }

    #[test]
    fn missing_or_garbled_files_error_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_policy(&dir.path().join("absent.json")),
            Err(PolicyError::Io(_))
        ));
        let path = dir.path().join("garbled.json");
        std::fs::write(&path, "not json").unwrap();
        assert!(matches!(load_policy(&path), Err(PolicyError::Parse(_))));
    }
}
