//! Bit-exact network serialization.
//!
//! Parameters are stored as decimal strings produced by Rust's shortest
//! round-trip float formatting (`{:?}`), so `save -> load` reproduces every
//! bit of every `f64` regardless of magnitude. [`MlpCheckpoint`] is a plain
//! serde value; embed it inside larger checkpoint files or use
//! [`save_mlp`]/[`load_mlp`] for a single network per file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::TensorError;
use crate::mlp::{Activation, Mlp};
use crate::Result;

/// Current checkpoint layout version.
pub const CHECKPOINT_VERSION: u32 = 1;

/// Serializable image of an [`Mlp`]. Every float is kept as its shortest
/// round-trip decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpCheckpoint {
    pub version: u32,
    pub sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub weights: Vec<Vec<String>>,
    pub biases: Vec<Vec<String>>,
}

/// Renders a float with `{:?}` — the shortest string that parses back to
/// the identical bits — for checkpoint storage.
pub fn encode_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Parses a checkpoint float, refusing NaN and infinities.
pub fn decode_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| TensorError::Parse(format!("not a float: {s:?}")))?;
    if !v.is_finite() {
        return Err(TensorError::NonFinite(format!("checkpoint holds {s:?}")));
    }
    Ok(v)
}

impl MlpCheckpoint {
    /// Captures a network. Refuses non-finite parameters: a checkpoint that
    /// cannot be evaluated should fail at save time, not at load time.
    pub fn from_net(net: &Mlp) -> Result<Self> {
        let all = net.weights().iter().flatten().chain(net.biases().iter().flatten());
        for &p in all {
            if !p.is_finite() {
                return Err(TensorError::NonFinite(
                    "refusing to save a network with non-finite parameters".into(),
                ));
            }
        }
        Ok(Self {
            version: CHECKPOINT_VERSION,
            sizes: net.sizes().to_vec(),
            activations: net.activations().to_vec(),
            weights: net
                .weights()
                .iter()
                .map(|layer| layer.iter().copied().map(encode_f64).collect())
                .collect(),
            biases: net
                .biases()
                .iter()
                .map(|layer| layer.iter().copied().map(encode_f64).collect())
                .collect(),
        })
    }

    /// Rebuilds the network, validating version and shapes.
    pub fn to_net(&self) -> Result<Mlp> {
        if self.version != CHECKPOINT_VERSION {
            return Err(TensorError::Parse(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        let weights = self
            .weights
            .iter()
            .map(|layer| layer.iter().map(|s| decode_f64(s)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        let biases = self
            .biases
            .iter()
            .map(|layer| layer.iter().map(|s| decode_f64(s)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        Mlp::from_parts(self.sizes.clone(), self.activations.clone(), weights, biases)
    }
}

/// Writes one network to a JSON file.
pub fn save_mlp(net: &Mlp, path: &Path) -> Result<()> {
    let ckpt = MlpCheckpoint::from_net(net)?;
    let body = serde_json::to_string_pretty(&ckpt)
        .map_err(|e| TensorError::Io(format!("encoding checkpoint: {e}")))?;
    fs::write(path, body).map_err(|e| TensorError::Io(format!("writing {}: {e}", path.display())))
}

/// Reads one network from a JSON file written by [`save_mlp`].
pub fn load_mlp(path: &Path) -> Result<Mlp> {
    let body = fs::read_to_string(path)
        .map_err(|e| TensorError::Io(format!("reading {}: {e}", path.display())))?;
    let ckpt: MlpCheckpoint = serde_json::from_str(&body)
        .map_err(|e| TensorError::Parse(format!("decoding {}: {e}", path.display())))?;
    ckpt.to_net()
}
