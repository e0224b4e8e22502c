//! Policy-gradient training: rollouts, advantage estimation and the clipped
//! surrogate update, with an unclipped single-epoch ablation.

mod config;
mod evaluate;
mod gae;
mod loss;
mod trainer;

pub use config::{Algo, TrainConfig};
pub use evaluate::{evaluate, BaselineController, Controller, EvalSummary, PolicyController, TrajectoryPoint};
pub use gae::{compute_gae, normalize, Gae};
pub use loss::{actor_objective, critic_loss, critic_objective, pg_actor_loss, ppo_actor_loss, ActorBatch, ActorLoss, Objective};
pub use trainer::{episode_seed, train, EpisodeMetrics, Trainer, Transition, UpdateStats};
