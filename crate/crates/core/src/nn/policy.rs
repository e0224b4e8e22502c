use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, Trace};
use super::Parameters;
use crate::error::ShapeError;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Diagonal Gaussian over raw actions with a tanh-squashed mean and a
/// state-independent log standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPolicy {
    pub actor: Mlp,
    pub log_std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    /// Unclamped Gaussian draw; the log-probability refers to this value.
    pub raw: Vec<f64>,
    /// `raw` clamped to `[-1, 1]`, what the environment receives.
    pub action: Vec<f64>,
    pub log_prob: f64,
}

impl GaussianPolicy {
    pub fn new(actor: Mlp, init_log_std: f64) -> Self {
        let dim = actor.output_dim();
        GaussianPolicy { actor, log_std: vec![init_log_std.clamp(LOG_STD_MIN, LOG_STD_MAX); dim] }
    }

    pub fn zeros_like(&self) -> Self {
        GaussianPolicy { actor: self.actor.zeros_like(), log_std: vec![0.0; self.log_std.len()] }
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn clamp_log_std(&mut self) {
        self.log_std.iter_mut().for_each(|s| *s = s.clamp(LOG_STD_MIN, LOG_STD_MAX));
    }

    pub fn mean(&self, obs: &[f64]) -> Result<Vec<f64>, ShapeError> {
        Ok(self.actor.forward(obs)?.into_iter().map(f64::tanh).collect())
    }

    pub fn sample<R: Rng>(&self, obs: &[f64], rng: &mut R) -> Result<PolicySample, ShapeError> {
        let mean = self.mean(obs)?;
        let raw: Vec<f64> = mean
            .iter()
            .zip(&self.log_std)
            .map(|(m, s)| {
                let z: f64 = rng.sample(StandardNormal);
                m + s.exp() * z
            })
            .collect();
        let log_prob = gaussian_log_prob(&mean, &self.log_std, &raw);
        let action = raw.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
        Ok(PolicySample { raw, action, log_prob })
    }

    /// The mean action, used for deterministic evaluation.
    pub fn act_deterministic(&self, obs: &[f64]) -> Result<Vec<f64>, ShapeError> {
        self.mean(obs)
    }

    pub fn log_prob(&self, obs: &[f64], raw: &[f64]) -> Result<f64, ShapeError> {
        ShapeError::check("raw action", self.action_dim(), raw.len())?;
        Ok(gaussian_log_prob(&self.mean(obs)?, &self.log_std, raw))
    }

    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|s| s + 0.5 + HALF_LN_2PI).sum()
    }

    /// Forward pass kept for a later [`GaussianPolicy::backprop_log_prob`].
    pub fn trace_log_prob(&self, obs: &[f64], raw: &[f64]) -> Result<LogProbTrace, ShapeError> {
        ShapeError::check("raw action", self.action_dim(), raw.len())?;
        let trace = self.actor.forward_trace(obs)?;
        let mean: Vec<f64> = trace.output().iter().map(|o| o.tanh()).collect();
        let log_prob = gaussian_log_prob(&mean, &self.log_std, raw);
        Ok(LogProbTrace { trace, mean, log_prob })
    }

    /// Add `coef · ∇ log π(raw | obs)` to `grad`.
    pub fn backprop_log_prob(
        &self,
        t: &LogProbTrace,
        raw: &[f64],
        coef: f64,
        grad: &mut GaussianPolicy,
    ) -> Result<(), ShapeError> {
        ShapeError::check("raw action", self.action_dim(), raw.len())?;
        if coef == 0.0 {
            return Ok(());
        }
        let mut upstream = Vec::with_capacity(t.mean.len());
        for (i, m) in t.mean.iter().enumerate() {
            let inv_var = (-2.0 * self.log_std[i]).exp();
            let diff = raw[i] - m;
            upstream.push(coef * diff * inv_var * (1.0 - m * m));
            grad.log_std[i] += coef * (diff * diff * inv_var - 1.0);
        }
        self.actor.accumulate_backward(&t.trace, &upstream, &mut grad.actor)
    }

    /// Add `coef · ∇ log π(raw | obs)` to `grad`; returns the log-probability.
    pub fn accumulate_log_prob_grad(
        &self,
        obs: &[f64],
        raw: &[f64],
        coef: f64,
        grad: &mut GaussianPolicy,
    ) -> Result<f64, ShapeError> {
        let t = self.trace_log_prob(obs, raw)?;
        self.backprop_log_prob(&t, raw, coef, grad)?;
        Ok(t.log_prob)
    }
}

#[derive(Debug, Clone)]
pub struct LogProbTrace {
    trace: Trace,
    mean: Vec<f64>,
    pub log_prob: f64,
}

impl Parameters for GaussianPolicy {
    fn params(&self) -> impl Iterator<Item = &f64> {
        self.actor.params().chain(&self.log_std)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.actor.params_mut().chain(self.log_std.iter_mut())
    }
}

pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], x: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(x)
        .map(|((m, s), a)| {
            let z = (a - m) * (-s).exp();
            -0.5 * z * z - s - HALF_LN_2PI
        })
        .sum()
}

/// Actor, frozen old actor and critic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub actor: GaussianPolicy,
    pub old_actor: GaussianPolicy,
    pub critic: Mlp,
}

impl PolicyParams {
    pub fn new<R: Rng>(obs_dim: usize, action_dim: usize, hidden: &[usize], init_log_std: f64, rng: &mut R) -> Self {
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend_from_slice(hidden);
        actor_sizes.push(action_dim);
        let mut critic_sizes = actor_sizes.clone();
        *critic_sizes.last_mut().unwrap() = 1;
        let actor = GaussianPolicy::new(Mlp::init(&actor_sizes, 0.01, rng), init_log_std);
        let critic = Mlp::init(&critic_sizes, 1.0, rng);
        PolicyParams { old_actor: actor.clone(), actor, critic }
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64, ShapeError> {
        Ok(self.critic.forward(obs)?[0])
    }

    pub fn sync_old(&mut self) {
        self.old_actor = self.actor.clone();
    }

    pub fn is_finite(&self) -> bool {
        self.actor.params().chain(self.critic.params()).all(|p| p.is_finite())
    }
}
