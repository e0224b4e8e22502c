//! Small fully connected networks with hand-written gradients.

mod adam;
mod checkpoint;
mod mlp;
mod policy;

pub use adam::{clip_grad_norm, grad_norm, Adam};
pub use checkpoint::{config_digest, Checkpoint, CHECKPOINT_FORMAT};
pub use mlp::{Dense, Mlp, Trace};
pub use policy::{gaussian_log_prob, GaussianPolicy, LogProbTrace, PolicyParams, PolicySample, LOG_STD_MAX, LOG_STD_MIN};

/// Flat view over every trainable scalar of a model, in a fixed order.
pub trait Parameters {
    fn params(&self) -> impl Iterator<Item = &f64>;
    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64>;
}
