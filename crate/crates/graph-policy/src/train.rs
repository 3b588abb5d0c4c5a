//! Training: masked behavior cloning with a style CVAE.
//!
//! Per sample the loop draws a random `(episode, t)` pair, encodes the
//! observation, infers the style posterior from the true action chunk and
//! joints, reparameterizes a latent `z`, draws a fresh feature mask
//! (uniform mode) or pins it to all-ones (baseline mode), decodes, and
//! minimizes
//!
//! ```text
//! L = MSE(â, a) + β · KL(q(z | a, j) ‖ N(0, I))
//! ```
//!
//! jointly over the encoder, style encoder, and decoder with one Adam state
//! per network and mini-batch-averaged gradients. Everything is driven by a
//! single ChaCha stream, so a seed pins the entire run; per sample the draw
//! order is: episode index, timestep, joint noise (only if enabled), mask
//! bits (only in uniform mode), reparameterization noise.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use tensor_net::{
    adam_step, kl_diag_gaussian, mse_loss, reparameterize, AdamParams, AdamState, GaussianHead,
    MlpGrads,
};
use transfer_env::Dataset;

use crate::error::PolicyError;
use crate::mask::{sample_uniform_graph, GraphMask};
use crate::params::{ActionStats, EncoderMode, GraphSampling, PolicyDims, PolicyParams};
use crate::Result;

/// Training settings. Everything has a task-scale default, so partial JSON
/// configs deserialize cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Actions predicted per query (`k`).
    pub chunk: usize,
    /// KL weight β.
    pub beta: f64,
    pub learning_rate: f64,
    pub seed: u64,
    pub encoder_mode: EncoderMode,
    pub graph_sampling: GraphSampling,
    /// Feature width in mlp mode (identity mode uses the observation width).
    pub feature_dim: usize,
    pub z_dim: usize,
    /// Hidden layer widths shared by all three networks.
    pub hidden: Vec<usize>,
    /// Batches per epoch; defaults to one expected pass over all
    /// `(episode, t)` pairs.
    pub batches_per_epoch: Option<usize>,
    /// Std-dev of Gaussian jitter added to the joints input during training
    /// (never at inference). Zero disables it. Jitter makes the clean
    /// observation copies of the proprioceptive dims more attractive than
    /// the joints path, sharpening what masking can reveal.
    pub joint_noise_sd: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 64,
            chunk: 10,
            beta: 1.0,
            learning_rate: 1e-3,
            seed: 0,
            encoder_mode: EncoderMode::Identity,
            graph_sampling: GraphSampling::Uniform,
            feature_dim: 32,
            z_dim: 8,
            hidden: vec![64, 64],
            batches_per_epoch: None,
            joint_noise_sd: 0.0,
        }
    }
}

impl TrainConfig {
    /// Checks every documented range.
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(PolicyError::Config("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(PolicyError::Config("batch size must be >= 1".into()));
        }
        if self.chunk < 1 {
            return Err(PolicyError::Config("chunk must be >= 1".into()));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(PolicyError::Config("beta must be finite and >= 0".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(PolicyError::Config("learning rate must be > 0".into()));
        }
        if self.feature_dim == 0 || self.z_dim == 0 {
            return Err(PolicyError::Config("feature_dim and z_dim must be >= 1".into()));
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err(PolicyError::Config("hidden layers must be >= 1 wide".into()));
        }
        if self.batches_per_epoch == Some(0) {
            return Err(PolicyError::Config("batches_per_epoch must be >= 1".into()));
        }
        if !self.joint_noise_sd.is_finite() || self.joint_noise_sd < 0.0 {
            return Err(PolicyError::Config("joint noise sd must be >= 0".into()));
        }
        Ok(())
    }

    /// The dimensions a dataset implies under this config.
    pub fn dims_for(&self, dataset: &Dataset) -> PolicyDims {
        let env = &dataset.config;
        let feature_dim = match self.encoder_mode {
            EncoderMode::Identity => env.obs_dim(),
            EncoderMode::Mlp => self.feature_dim,
        };
        PolicyDims {
            obs_dim: env.obs_dim(),
            act_dim: env.act_dim(),
            joints_dim: env.joints_dim(),
            feature_dim,
            z_dim: self.z_dim,
            chunk: self.chunk,
        }
    }

    fn resolved_batches_per_epoch(&self, dataset: &Dataset) -> usize {
        self.batches_per_epoch.unwrap_or_else(|| {
            let pairs =
                dataset.len() * (dataset.config.episode_len - self.chunk + 1);
            pairs.div_ceil(self.batch_size).max(1)
        })
    }
}

/// Mean loss terms for one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean reconstruction term.
    pub mse: f64,
    /// Mean KL term (unweighted).
    pub kl: f64,
    /// `mse + β · kl`.
    pub total: f64,
}

/// Per-epoch training curve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub rows: Vec<EpochStats>,
}

impl TrainLog {
    /// CSV form with header `epoch,mse,kl,total`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mse,kl,total\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.epoch, r.mse, r.kl, r.total);
        }
        out
    }

    /// Writes the CSV form to a file.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())
            .map_err(|e| PolicyError::Io(format!("writing {}: {e}", path.display())))
    }
}

/// One training sample assembled from the dataset. The action chunk is in
/// normalized units (the objective's space).
struct Sample<'a> {
    obs: &'a [f64],
    joints: Vec<f64>,
    chunk_flat: Vec<f64>,
}

fn draw_sample<'a>(
    dataset: &'a Dataset,
    chunk: usize,
    joint_noise_sd: f64,
    stats: &ActionStats,
    rng: &mut ChaCha8Rng,
) -> Sample<'a> {
    let ep = &dataset.episodes[rng.random_range(0..dataset.len())];
    let t_max = ep.obs.len() - chunk;
    let t = rng.random_range(0..=t_max);
    let mut joints = ep.joints[t].clone();
    if joint_noise_sd > 0.0 {
        for j in joints.iter_mut() {
            let e: f64 = rng.sample(StandardNormal);
            *j += joint_noise_sd * e;
        }
    }
    let mut chunk_flat = Vec::with_capacity(chunk * ep.actions[t].len());
    for row in &ep.actions[t..t + chunk] {
        chunk_flat.extend_from_slice(row);
    }
    let chunk_flat = stats.normalize_chunk(&chunk_flat);
    Sample { obs: &ep.obs[t], joints, chunk_flat }
}

fn draw_mask(
    sampling: GraphSampling,
    feature_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GraphMask> {
    match sampling {
        GraphSampling::Uniform => sample_uniform_graph(feature_dim, rng),
        GraphSampling::AllOnes => Ok(GraphMask::ones(feature_dim)),
    }
}

/// Forward + backward for one sample. Returns `(mse, kl)` and accumulates
/// parameter gradients.
#[allow(clippy::too_many_arguments)]
fn sample_pass(
    params: &PolicyParams,
    sample: &Sample<'_>,
    g: &GraphMask,
    beta: f64,
    rng: &mut ChaCha8Rng,
    enc_grads: &mut Option<MlpGrads>,
    style_grads: &mut MlpGrads,
    dec_grads: &mut MlpGrads,
) -> Result<(f64, f64)> {
    let dims = *params.dims();
    let (x, enc_cache) = params.encode_cached(sample.obs)?;
    let (style_out, style_cache) = params.style_forward(&sample.chunk_flat, &sample.joints)?;
    let head = GaussianHead::from_flat(&style_out)?;
    let latent = reparameterize(&head, rng)?;
    let dec_in = params.decoder_input(&x, g, &sample.joints, &latent.z)?;
    let (pred, dec_cache) = params.decoder.forward(&dec_in)?;

    let (mse, d_pred) = mse_loss(&pred, &sample.chunk_flat)?;
    let (kl, d_mu_kl, d_lv_kl) = kl_diag_gaussian(&head.mu, &head.log_var)?;

    let (dg, d_dec_in) = params.decoder.backward(&dec_cache, &d_pred)?;
    dec_grads.accumulate(&dg);

    // Split the decoder input gradient: [x ⊙ g | g | joints | z]. Only the
    // masked-feature block ties back to the encoder and only the z block
    // ties back to the style encoder.
    let f = dims.feature_dim;
    let z_start = 2 * f + dims.joints_dim;
    let d_z = &d_dec_in[z_start..z_start + dims.z_dim];
    let (d_mu_rep, d_lv_rep) = latent.backward(&head, d_z)?;
    let d_mu: Vec<f64> =
        d_mu_rep.iter().zip(&d_mu_kl).map(|(r, k)| r + beta * k).collect();
    let d_lv: Vec<f64> =
        d_lv_rep.iter().zip(&d_lv_kl).map(|(r, k)| r + beta * k).collect();
    let (sg, _) = params
        .style
        .backward(&style_cache, &GaussianHead::flat_grad(&d_mu, &d_lv))?;
    style_grads.accumulate(&sg);

    if let (Some(net), Some(cache), Some(acc)) =
        (params.encoder.as_ref(), enc_cache.as_ref(), enc_grads.as_mut())
    {
        // d/dx (x ⊙ g) = g, elementwise.
        let d_x: Vec<f64> = d_dec_in[..f]
            .iter()
            .zip(g.bits())
            .map(|(&d, &b)| d * b as f64)
            .collect();
        let (eg, _) = net.backward(cache, &d_x)?;
        acc.accumulate(&eg);
    }
    Ok((mse, kl))
}

fn check_dataset(dataset: &Dataset, config: &TrainConfig) -> Result<()> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(PolicyError::Data("dataset has no episodes".into()));
    }
    dataset.validate().map_err(PolicyError::Env)?;
    if config.chunk > dataset.config.episode_len {
        return Err(PolicyError::Data(format!(
            "chunk {} exceeds episode length {}",
            config.chunk, dataset.config.episode_len
        )));
    }
    Ok(())
}

/// Trains a fresh policy on the dataset. Returns the trained parameters and
/// the per-epoch loss curve. Deterministic given `config.seed`.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(PolicyParams, TrainLog)> {
    check_dataset(dataset, config)?;
    let dims = config.dims_for(dataset);
    let stats = ActionStats::from_dataset(dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params =
        PolicyParams::new(dims, config.encoder_mode, &config.hidden, stats, &mut rng)?;

    let hp = AdamParams::with_learning_rate(config.learning_rate);
    let mut enc_state = params.encoder.as_ref().map(AdamState::new);
    let mut style_state = AdamState::new(&params.style);
    let mut dec_state = AdamState::new(&params.decoder);

    let batches = config.resolved_batches_per_epoch(dataset);
    let mut log = TrainLog::default();

    for epoch in 1..=config.epochs {
        let mut mse_sum = 0.0;
        let mut kl_sum = 0.0;
        let mut samples = 0usize;
        for batch in 0..batches {
            let mut enc_grads = params.encoder.as_ref().map(MlpGrads::zeros_like);
            let mut style_grads = MlpGrads::zeros_like(&params.style);
            let mut dec_grads = MlpGrads::zeros_like(&params.decoder);
            for _ in 0..config.batch_size {
                let sample = draw_sample(
                    dataset,
                    config.chunk,
                    config.joint_noise_sd,
                    &params.action_stats,
                    &mut rng,
                );
                let g = draw_mask(config.graph_sampling, dims.feature_dim, &mut rng)?;
                let (mse, kl) = sample_pass(
                    &params,
                    &sample,
                    &g,
                    config.beta,
                    &mut rng,
                    &mut enc_grads,
                    &mut style_grads,
                    &mut dec_grads,
                )?;
                if !mse.is_finite() || !kl.is_finite() {
                    return Err(PolicyError::Numeric(format!(
                        "non-finite loss at epoch {epoch}, batch {batch}: mse {mse}, kl {kl}"
                    )));
                }
                mse_sum += mse;
                kl_sum += kl;
                samples += 1;
            }
            let scale = 1.0 / config.batch_size as f64;
            style_grads.scale(scale);
            dec_grads.scale(scale);
            if let (Some(net), Some(state), Some(grads)) =
                (params.encoder.as_mut(), enc_state.as_mut(), enc_grads.as_mut())
            {
                grads.scale(scale);
                adam_step(net, grads, state, &hp)?;
            }
            adam_step(&mut params.style, &style_grads, &mut style_state, &hp)?;
            adam_step(&mut params.decoder, &dec_grads, &mut dec_state, &hp)?;
        }
        let mse = mse_sum / samples as f64;
        let kl = kl_sum / samples as f64;
        log.rows.push(EpochStats { epoch, mse, kl, total: mse + config.beta * kl });
    }
    Ok((params, log))
}

/// Monte-Carlo estimate of the training objective for fixed parameters:
/// one epoch's worth of samples drawn from `seed`, no updates. Returns
/// `(mean mse, mean kl)`.
pub fn dataset_loss(
    params: &PolicyParams,
    dataset: &Dataset,
    config: &TrainConfig,
    seed: u64,
) -> Result<(f64, f64)> {
    check_dataset(dataset, config)?;
    let dims = *params.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batches = config.resolved_batches_per_epoch(dataset);
    let n = batches * config.batch_size;
    let mut mse_sum = 0.0;
    let mut kl_sum = 0.0;
    for _ in 0..n {
        let sample =
            draw_sample(dataset, config.chunk, config.joint_noise_sd, params.action_stats(), &mut rng);
        let g = draw_mask(config.graph_sampling, dims.feature_dim, &mut rng)?;
        let (x, _) = params.encode_cached(sample.obs)?;
        let (style_out, _) = params.style_forward(&sample.chunk_flat, &sample.joints)?;
        let head = GaussianHead::from_flat(&style_out)?;
        let latent = reparameterize(&head, &mut rng)?;
        let dec_in = params.decoder_input(&x, &g, &sample.joints, &latent.z)?;
        let pred = params.decoder.forward_output(&dec_in)?;
        mse_sum += mse_loss(&pred, &sample.chunk_flat)?.0;
        kl_sum += kl_diag_gaussian(&head.mu, &head.log_var)?.0;
    }
    Ok((mse_sum / n as f64, kl_sum / n as f64))
}

/// Mean squared magnitude of all action components in the dataset under
/// the given normalization — the exact expected MSE of the constant-zero
/// predictor in that space, used as the initial-loss oracle. With stats
/// fitted on the same dataset this is 1 by construction (up to the scale
/// floor on constant dimensions); with identity stats it is the raw second
/// moment.
pub fn action_second_moment(dataset: &Dataset, stats: &ActionStats) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for ep in &dataset.episodes {
        for row in &ep.actions {
            for (j, &a) in row.iter().enumerate() {
                let v = (a - stats.mean[j]) / stats.scale[j];
                sum += v * v;
                count += 1;
            }
        }
    }
    sum / count as f64
}
