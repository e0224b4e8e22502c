use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    /// Clipped surrogate, several epochs per batch.
    Ppo,
    /// Unclipped advantage-weighted log-likelihood, one epoch per batch.
    A2c,
}

impl std::str::FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ppo" => Ok(Algo::Ppo),
            "a2c" => Ok(Algo::A2c),
            other => Err(format!("unknown algorithm `{other}` (expected ppo or a2c)")),
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::Ppo => "ppo",
            Algo::A2c => "a2c",
        })
    }
}

/// Learner hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub episodes_per_update: usize,
    /// Total training episodes.
    pub episodes: usize,
    pub entropy_coef: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub max_grad_norm: f64,
    /// Multiplier applied to rewards before advantage estimation.
    pub reward_scale: f64,
    pub normalize_advantages: bool,
    pub hidden_sizes: Vec<usize>,
    pub init_log_std: f64,
    /// Initial log standard deviation of the two acceleration outputs.
    pub init_log_std_accel: f64,
    pub seed: u64,
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.95,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            epochs: 10,
            minibatch_size: 64,
            episodes_per_update: 5,
            episodes: 300,
            entropy_coef: 0.0,
            actor_lr: 3e-4,
            critic_lr: 1e-3,
            max_grad_norm: 0.5,
            reward_scale: 1e-3,
            normalize_advantages: true,
            hidden_sizes: vec![128, 128],
            init_log_std: -0.5,
            init_log_std_accel: -1.5,
            seed: 0,
            checkpoint_every: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |field: &'static str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(field, format!("must lie in (0, 1], got {v}")))
            }
        };
        unit("gamma", self.gamma)?;
        unit("gae_lambda", self.gae_lambda)?;
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err(ConfigError::invalid("clip_epsilon", format!("must lie in (0, 1), got {}", self.clip_epsilon)));
        }
        for (field, v) in [
            ("epochs", self.epochs),
            ("minibatch_size", self.minibatch_size),
            ("episodes_per_update", self.episodes_per_update),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(field, "must be at least 1"));
            }
        }
        for (field, v) in [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("max_grad_norm", self.max_grad_norm),
            ("reward_scale", self.reward_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.entropy_coef.is_finite() && self.entropy_coef >= 0.0) {
            return Err(ConfigError::invalid("entropy_coef", "must be finite and >= 0"));
        }
        if self.hidden_sizes.iter().any(|&h| h == 0) {
            return Err(ConfigError::invalid("hidden_sizes", "layer widths must be positive"));
        }
        if !self.init_log_std.is_finite() {
            return Err(ConfigError::invalid("init_log_std", "must be finite"));
        }
        if !self.init_log_std_accel.is_finite() {
            return Err(ConfigError::invalid("init_log_std_accel", "must be finite"));
        }
        Ok(())
    }
}
