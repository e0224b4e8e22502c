use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algo, TrainConfig};
use super::gae::{compute_gae, normalize};
use super::loss::{actor_objective, critic_objective, ActorBatch, Objective};
use crate::env::Env;
use crate::error::TrainError;
use crate::nn::{clip_grad_norm, Adam, Parameters, PolicyParams, LOG_STD_MAX, LOG_STD_MIN};
use crate::scenario::ScenarioConfig;

/// One environment step as seen by the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    /// Unclamped policy sample.
    pub raw: Vec<f64>,
    /// Log-probability under the old actor.
    pub log_prob: f64,
    /// Scaled reward.
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

/// Per-episode training record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode: usize,
    /// Unscaled episode return.
    pub reward: f64,
    pub cost: f64,
    pub energy_uav_compute: f64,
    pub energy_rsu: f64,
    pub energy_fly: f64,
    pub penalty: f64,
    pub violation_count: usize,
    /// Simulated seconds elapsed since the start of training.
    pub sim_time: f64,
}

/// Statistics of the most recent update.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpdateStats {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
}

/// Derive an independent 64-bit seed for episode `index` of run `seed`.
pub fn episode_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const POLICY_STREAM: u64 = 0x5EED_0F_AC70;
const SHUFFLE_STREAM: u64 = 0x5EED_5A4F_F1E;

struct Rollout {
    transitions: Vec<Transition>,
    metrics: EpisodeMetrics,
}

fn rollout(
    params: &PolicyParams,
    config: &ScenarioConfig,
    tc: &TrainConfig,
    episode: usize,
) -> Result<Rollout, TrainError> {
    let (mut env, mut obs) = Env::reset(config, episode_seed(tc.seed, episode as u64))?;
    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed(tc.seed ^ POLICY_STREAM, episode as u64));
    let mut transitions = Vec::with_capacity(config.num_slots);
    let mut m = EpisodeMetrics { episode, ..Default::default() };
    loop {
        let sample = params.old_actor.sample(&obs, &mut rng)?;
        let value = params.value(&obs)?;
        let step = env.step_raw(&sample.action)?;
        let o = &step.outcome;
        m.reward += o.reward;
        m.cost += o.cost;
        m.energy_uav_compute += o.uav_energy();
        m.energy_rsu += o.rsu_energy();
        m.energy_fly += o.fly_energy;
        m.penalty += o.penalty;
        m.violation_count += o.violation_count();
        transitions.push(Transition {
            obs: std::mem::replace(&mut obs, step.observation),
            raw: sample.raw,
            log_prob: sample.log_prob,
            reward: o.reward * tc.reward_scale,
            value,
            done: step.done,
        });
        if step.done {
            break;
        }
    }
    Ok(Rollout { transitions, metrics: m })
}

/// Incremental learner: each [`Trainer::step_update`] collects one batch of
/// episodes and optimises on it.
#[derive(Debug, Clone)]
pub struct Trainer {
    scenario: ScenarioConfig,
    tc: TrainConfig,
    algo: Algo,
    params: PolicyParams,
    actor_opt: Adam,
    critic_opt: Adam,
    shuffle_rng: ChaCha8Rng,
    episodes_done: usize,
    updates: usize,
    last_stats: UpdateStats,
}

impl Trainer {
    pub fn new(scenario: &ScenarioConfig, tc: &TrainConfig, algo: Algo) -> Result<Self, TrainError> {
        scenario.validate()?;
        tc.validate()?;
        let mut init_rng = ChaCha8Rng::seed_from_u64(tc.seed);
        let mut params = PolicyParams::new(
            scenario.observation_dim(),
            scenario.action_dim(),
            &tc.hidden_sizes,
            tc.init_log_std,
            &mut init_rng,
        );
        let accel = scenario.action_dim() - 2;
        for s in &mut params.actor.log_std[accel..] {
            *s = tc.init_log_std_accel.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
        params.sync_old();
        let actor_opt = Adam::new(params.actor.params().count(), tc.actor_lr);
        let critic_opt = Adam::new(params.critic.param_count(), tc.critic_lr);
        Ok(Trainer {
            scenario: scenario.clone(),
            tc: tc.clone(),
            algo,
            params,
            actor_opt,
            critic_opt,
            shuffle_rng: ChaCha8Rng::seed_from_u64(episode_seed(tc.seed ^ SHUFFLE_STREAM, 0)),
            episodes_done: 0,
            updates: 0,
            last_stats: UpdateStats::default(),
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn into_params(self) -> PolicyParams {
        self.params
    }

    pub fn episodes_done(&self) -> usize {
        self.episodes_done
    }

    pub fn is_finished(&self) -> bool {
        self.episodes_done >= self.tc.episodes
    }

    pub fn last_stats(&self) -> &UpdateStats {
        &self.last_stats
    }

    /// Collect the next batch of episodes and update on it.
    ///
    /// On a non-finite loss or parameter the learner is left at its last good
    /// parameters and the error is returned.
    pub fn step_update(&mut self) -> Result<Vec<EpisodeMetrics>, TrainError> {
        let remaining = self.tc.episodes.saturating_sub(self.episodes_done);
        let count = remaining.min(self.tc.episodes_per_update);
        if count == 0 {
            return Ok(Vec::new());
        }
        let first = self.episodes_done;
        let rollouts = (first..first + count)
            .into_par_iter()
            .map(|e| rollout(&self.params, &self.scenario, &self.tc, e))
            .collect::<Result<Vec<_>, _>>()?;

        let mut batch = Vec::with_capacity(count * self.scenario.num_slots);
        let mut advantages = Vec::with_capacity(batch.capacity());
        let mut returns = Vec::with_capacity(batch.capacity());
        let mut metrics = Vec::with_capacity(count);
        for r in rollouts {
            let rewards: Vec<f64> = r.transitions.iter().map(|t| t.reward).collect();
            let mut values: Vec<f64> = r.transitions.iter().map(|t| t.value).collect();
            // The horizon ends the episode, so the bootstrap value is zero.
            values.push(0.0);
            let gae = compute_gae(&rewards, &values, self.tc.gamma, self.tc.gae_lambda)?;
            advantages.extend(gae.advantages);
            returns.extend(gae.returns);
            batch.extend(r.transitions);
            metrics.push(r.metrics);
        }
        if self.tc.normalize_advantages {
            normalize(&mut advantages);
        }

        let backup = (self.params.clone(), self.actor_opt.clone(), self.critic_opt.clone());
        match self.optimise(&batch, &advantages, &returns) {
            Ok(stats) if self.params.is_finite() => self.last_stats = stats,
            Ok(_) => {
                (self.params, self.actor_opt, self.critic_opt) = backup;
                return Err(TrainError::NonFinite { what: "parameters", update: self.updates });
            }
            Err(TrainError::NonFinite { what, .. }) => {
                (self.params, self.actor_opt, self.critic_opt) = backup;
                return Err(TrainError::NonFinite { what, update: self.updates });
            }
            Err(e) => return Err(e),
        }
        self.params.sync_old();
        self.updates += 1;

        let slot = self.scenario.slot_len();
        let n = self.scenario.num_slots as f64;
        for m in &mut metrics {
            m.sim_time = (m.episode + 1) as f64 * n * slot;
        }
        self.episodes_done += count;
        Ok(metrics)
    }

    fn optimise(&mut self, batch: &[Transition], adv: &[f64], ret: &[f64]) -> Result<UpdateStats, TrainError> {
        let (epochs, objective) = match self.algo {
            Algo::Ppo => (self.tc.epochs, Objective::Clipped { epsilon: self.tc.clip_epsilon }),
            Algo::A2c => (1, Objective::Unclipped),
        };
        let mut order: Vec<usize> = (0..batch.len()).collect();
        let mut stats = UpdateStats::default();
        let mut minibatches = 0usize;
        for _ in 0..epochs {
            order.shuffle(&mut self.shuffle_rng);
            for idx in order.chunks(self.tc.minibatch_size) {
                let obs: Vec<Vec<f64>> = idx.iter().map(|&i| batch[i].obs.clone()).collect();
                let raw: Vec<Vec<f64>> = idx.iter().map(|&i| batch[i].raw.clone()).collect();
                let logp_old: Vec<f64> = idx.iter().map(|&i| batch[i].log_prob).collect();
                let a: Vec<f64> = idx.iter().map(|&i| adv[i]).collect();
                let targets: Vec<f64> = idx.iter().map(|&i| ret[i]).collect();

                let mb = ActorBatch { obs: &obs, raw: &raw, logp_old: &logp_old, advantages: &a };
                let (loss, mut grad) = actor_objective(&self.params.actor, mb, objective, self.tc.entropy_coef)?;
                clip_grad_norm(&mut grad, self.tc.max_grad_norm);
                self.actor_opt.step(&mut self.params.actor, &grad);
                self.params.actor.clamp_log_std();

                let (closs, mut cgrad) = critic_objective(&self.params.critic, &obs, &targets)?;
                clip_grad_norm(&mut cgrad, self.tc.max_grad_norm);
                self.critic_opt.step(&mut self.params.critic, &cgrad);

                stats.actor_loss += loss.loss;
                stats.critic_loss += closs;
                stats.clip_fraction += loss.clip_fraction;
                stats.approx_kl += loss.approx_kl;
                minibatches += 1;
            }
        }
        let n = minibatches.max(1) as f64;
        stats.actor_loss /= n;
        stats.critic_loss /= n;
        stats.clip_fraction /= n;
        stats.approx_kl /= n;
        Ok(stats)
    }
}

/// Run a full training and return the final parameters with per-episode metrics.
pub fn train(
    config: &ScenarioConfig,
    tc: &TrainConfig,
    algo: Algo,
) -> Result<(PolicyParams, Vec<EpisodeMetrics>), TrainError> {
    let mut trainer = Trainer::new(config, tc, algo)?;
    let mut history = Vec::with_capacity(tc.episodes);
    while !trainer.is_finished() {
        history.extend(trainer.step_update()?);
    }
    Ok((trainer.into_params(), history))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (ScenarioConfig, TrainConfig) {
        let config = ScenarioConfig { num_vehicles: 2, num_slots: 5, ..Default::default() };
        let tc = TrainConfig {
            episodes: 6,
            episodes_per_update: 2,
            hidden_sizes: vec![8],
            minibatch_size: 4,
            epochs: 2,
            ..Default::default()
        };
        (config, tc)
    }

    #[test]
    fn zero_episodes_returns_initial_params() {
        let (config, mut tc) = small();
        tc.episodes = 0;
        let init = Trainer::new(&config, &tc, Algo::Ppo).unwrap().into_params();
        let (params, history) = train(&config, &tc, Algo::Ppo).unwrap();
        assert_eq!(params, init);
        assert!(history.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let (config, tc) = small();
        for algo in [Algo::Ppo, Algo::A2c] {
            let a = train(&config, &tc, algo).unwrap();
            let b = train(&config, &tc, algo).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.1.len(), 6);
            assert_eq!(a.1.iter().map(|m| m.episode).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn metrics_components_sum_to_cost() {
        let (config, tc) = small();
        let (_, history) = train(&config, &tc, Algo::Ppo).unwrap();
        for m in history {
            let sum = m.energy_uav_compute + m.energy_rsu + m.energy_fly + m.penalty;
            assert!((sum - m.cost).abs() <= 1e-9 * m.cost.abs().max(1.0));
            assert!((m.reward + m.cost).abs() <= 1e-9 * m.cost.abs().max(1.0));
        }
    }

    #[test]
    fn partial_final_batch() {
        let (config, mut tc) = small();
        tc.episodes = 5;
        let (_, history) = train(&config, &tc, Algo::Ppo).unwrap();
        assert_eq!(history.len(), 5);
    }

    #[test]
    fn old_actor_is_synchronised_after_update() {
        let (config, tc) = small();
        let mut t = Trainer::new(&config, &tc, Algo::Ppo).unwrap();
        t.step_update().unwrap();
        assert_eq!(t.params().actor, t.params().old_actor);
    }

    #[test]
    fn episode_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| episode_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(episode_seed(0, 0), episode_seed(1, 0));
    }
}
