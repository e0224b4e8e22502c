//! Digital-twin-driven UAV-aided vehicular edge computing.
//!
//! A seedable simulator of vehicles offloading partitioned tasks to a
//! flying edge server that relays overflow to a roadside unit, and a
//! from-scratch PPO trainer that learns partitioning, CPU allocation and
//! UAV acceleration to minimise system energy under latency constraints.

pub mod baselines;
pub mod env;
pub mod error;
pub mod nn;
pub mod physics;
pub mod rl;
pub mod runner;
pub mod scenario;

pub use env::{decode_action, Action, Env, SlotOutcome, Step};
pub use error::{CheckpointError, ConfigError, DomainError, EnvError, RunError, ShapeError, TrainError};
pub use nn::{Checkpoint, PolicyParams};
pub use rl::{Algo, TrainConfig};
pub use scenario::{ScenarioConfig, WorldState};
