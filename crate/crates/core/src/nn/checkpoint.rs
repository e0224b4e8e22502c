//! Structured text checkpoints.
//!
//! JSON with shortest round-trip float formatting, so a save/load cycle is
//! bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PolicyParams;
use crate::error::CheckpointError;
use crate::scenario::ScenarioConfig;

pub const CHECKPOINT_FORMAT: &str = "flexedge-checkpoint-v1";

/// SHA-256 of the resolved flat config text.
pub fn config_digest(config: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(config.to_toml_string().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub episode: usize,
    pub actor_sizes: Vec<usize>,
    pub critic_sizes: Vec<usize>,
    pub config_digest: String,
    pub scenario: ScenarioConfig,
    pub params: PolicyParams,
}

impl Checkpoint {
    pub fn new(params: &PolicyParams, scenario: &ScenarioConfig, episode: usize) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            episode,
            actor_sizes: params.actor.actor.sizes(),
            critic_sizes: params.critic.sizes(),
            config_digest: config_digest(scenario),
            scenario: scenario.clone(),
            params: params.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        ck.verify()?;
        Ok(ck)
    }

    fn verify(&self) -> Result<(), CheckpointError> {
        let corrupt = |m: String| Err(CheckpointError::Corrupt(m));
        if self.format != CHECKPOINT_FORMAT {
            return corrupt(format!("unsupported format `{}`", self.format));
        }
        self.scenario.validate().map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        if config_digest(&self.scenario) != self.config_digest {
            return corrupt("config digest does not match embedded config".into());
        }
        let p = &self.params;
        if p.actor.actor.sizes() != self.actor_sizes || p.old_actor.actor.sizes() != self.actor_sizes {
            return corrupt("actor layer sizes disagree with header".into());
        }
        if p.critic.sizes() != self.critic_sizes {
            return corrupt("critic layer sizes disagree with header".into());
        }
        for net in [&p.actor.actor, &p.old_actor.actor, &p.critic] {
            for layer in &net.layers {
                if layer.weights.len() != layer.inputs * layer.outputs || layer.biases.len() != layer.outputs {
                    return corrupt("layer array length disagrees with its shape".into());
                }
            }
            if net.layers.windows(2).any(|w| w[0].outputs != w[1].inputs) {
                return corrupt("layers do not chain".into());
            }
        }
        if p.actor.log_std.len() != p.actor.actor.output_dim() {
            return corrupt("log-std length disagrees with action dimension".into());
        }
        if self.actor_sizes.first() != Some(&self.scenario.observation_dim())
            || self.actor_sizes.last() != Some(&self.scenario.action_dim())
            || self.critic_sizes.last() != Some(&1)
        {
            return corrupt("network dimensions do not fit the embedded scenario".into());
        }
        if !p.is_finite() {
            return corrupt("non-finite parameters".into());
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_json()).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| CheckpointError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }
}
