//! Small dense neural networks with hand-derived backprop.
//!
//! Everything a chunked-action imitation policy needs and nothing more:
//!
//! * [`mlp`] — multilayer perceptrons (tanh hidden layers, identity output by
//!   convention), Xavier-uniform initialization, exact forward/backward.
//! * [`loss`] — mean-squared-error and diagonal-Gaussian KL terms with their
//!   gradients, plus the reparameterization draw for the style latent.
//! * [`adam`] — bias-corrected Adam with per-network moment state.
//! * [`gradcheck`] — central finite-difference verification of the analytic
//!   gradients, usable as both a test harness and a diagnostics entry point.
//! * [`checkpoint`] — JSON serialization with every float written as a
//!   decimal string that parses back to the identical bits.
//!
//! All computation is `f64`, single-threaded, and deterministic; random
//! initialization and noise draws consume caller-provided ChaCha streams.

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod gradcheck;
pub mod loss;
pub mod mlp;

pub use adam::{adam_step, AdamParams, AdamState};
pub use checkpoint::{decode_f64, encode_f64, load_mlp, save_mlp, MlpCheckpoint};
pub use error::TensorError;
pub use gradcheck::{
    grad_check, materialize_spec, max_relative_error, numeric_gradients, GradCheckConfig,
    GradCheckReport, NetSpec,
};
pub use loss::{kl_diag_gaussian, mse_loss, reparameterize, GaussianHead, ReparamSample};
pub use mlp::{Activation, ForwardCache, Mlp, MlpGrads};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, TensorError>;
