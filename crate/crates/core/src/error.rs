use std::path::PathBuf;

use thiserror::Error;

/// Invalid or unreadable configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("malformed config file: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidField { field, reason: reason.into() }
    }
}

/// A physics evaluator was called outside its domain.
#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("coincident positions give an undefined channel gain")]
    ZeroDistance,
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("partition factor {0} outside [0, 1]")]
    Partition(f64),
}

/// Vector or matrix dimensions do not line up.
#[derive(Debug, Error, PartialEq)]
#[error("shape mismatch in {context}: expected {expected}, got {actual}")]
pub struct ShapeError {
    pub context: &'static str,
    pub expected: usize,
    pub actual: usize,
}

impl ShapeError {
    pub(crate) fn check(context: &'static str, expected: usize, actual: usize) -> Result<(), Self> {
        if expected == actual {
            Ok(())
        } else {
            Err(ShapeError { context, expected, actual })
        }
    }
}

/// Failure while advancing an episode.
#[derive(Debug, Error)]
pub enum EnvError {
    #[error("episode fault at slot {slot}, vehicle {vehicle}: {source}")]
    Physics {
        slot: usize,
        vehicle: usize,
        #[source]
        source: DomainError,
    },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("episode already finished after {0} slots")]
    EpisodeOver(usize),
}

/// Failure during training or evaluation.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite {what} at update {update}")]
    NonFinite { what: &'static str, update: usize },
    #[error("evaluation requires at least one episode")]
    NoEpisodes,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Checkpoint cannot be decoded.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("cannot read checkpoint {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

/// Failure of a runner command; [`RunError::exit_code`] maps it to a process status.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("training diverged ({source}); last good parameters saved to {}", checkpoint.display())]
    Diverged {
        #[source]
        source: TrainError,
        checkpoint: PathBuf,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} sweep leg(s) failed")]
    SweepFailures(usize),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) | RunError::Train(TrainError::Config(_)) => 2,
            RunError::Checkpoint(_) => 3,
            _ => 1,
        }
    }
}
