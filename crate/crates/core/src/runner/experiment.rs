use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::rl::TrainConfig;
use crate::scenario::{map_toml_error, table_keys, ScenarioConfig};

/// Scenario and learner settings read from one flat TOML file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    /// Parse a flat document; each key belongs to either the scenario or the
    /// learner, missing keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(map_toml_error)?;
        let scenario_keys = ScenarioConfig::keys();
        let train_keys = table_keys(&TrainConfig::default());
        let mut scenario = toml::Table::new();
        let mut train = toml::Table::new();
        for (key, value) in table {
            if scenario_keys.contains(&key) {
                scenario.insert(key, value);
            } else if train_keys.contains(&key) {
                train.insert(key, value);
            } else {
                return Err(ConfigError::UnknownKey(key));
            }
        }
        let scenario: ScenarioConfig = toml::Value::Table(scenario).try_into().map_err(map_toml_error)?;
        let train: TrainConfig = toml::Value::Table(train).try_into().map_err(map_toml_error)?;
        scenario.validate()?;
        train.validate()?;
        Ok(ExperimentConfig { scenario, train })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }

    /// Every key with its effective value, scenario first.
    pub fn to_toml_string(&self) -> String {
        let mut out = self.scenario.to_toml_string();
        out.push_str(&toml::to_string(&self.train).expect("train config serializes"));
        out
    }
}
