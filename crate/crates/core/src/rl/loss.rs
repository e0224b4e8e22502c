//! Actor and critic objectives with their per-sample derivatives.

use crate::error::{ShapeError, TrainError};
use crate::nn::{GaussianPolicy, Mlp, Parameters};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActorLoss {
    /// `-surrogate - entropy_coef · entropy`.
    pub loss: f64,
    pub surrogate: f64,
    /// Fraction of samples whose ratio fell outside `[1 - ε, 1 + ε]`.
    pub clip_fraction: f64,
    /// `mean(logp_old - logp_new)`.
    pub approx_kl: f64,
    /// ∂loss / ∂logp_new per sample.
    pub dlogp: Vec<f64>,
}

fn finite(what: &'static str, xs: &[f64]) -> Result<(), TrainError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(TrainError::NonFinite { what, update: 0 })
    }
}

/// Clipped surrogate objective, negated for minimisation.
pub fn ppo_actor_loss(
    logp_new: &[f64],
    logp_old: &[f64],
    advantages: &[f64],
    epsilon: f64,
    entropy_coef: f64,
    entropy: f64,
) -> Result<ActorLoss, TrainError> {
    ShapeError::check("logp_old", logp_new.len(), logp_old.len())?;
    ShapeError::check("advantages", logp_new.len(), advantages.len())?;
    finite("new log-probabilities", logp_new)?;
    finite("old log-probabilities", logp_old)?;
    finite("advantages", advantages)?;
    let n = logp_new.len().max(1) as f64;
    let mut out = ActorLoss { dlogp: Vec::with_capacity(logp_new.len()), ..Default::default() };
    let mut clipped = 0usize;
    for ((new, old), a) in logp_new.iter().zip(logp_old).zip(advantages) {
        let ratio = (new - old).exp();
        let bounded = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
        if bounded != ratio {
            clipped += 1;
        }
        let plain = ratio * a;
        let capped = bounded * a;
        out.surrogate += plain.min(capped);
        // The gradient flows only when the unclipped branch is the minimum.
        out.dlogp.push(if plain <= capped { -ratio * a / n } else { 0.0 });
        out.approx_kl += old - new;
    }
    out.surrogate /= n;
    out.approx_kl /= n;
    out.clip_fraction = clipped as f64 / n;
    out.loss = -out.surrogate - entropy_coef * entropy;
    if !out.loss.is_finite() {
        return Err(TrainError::NonFinite { what: "actor loss", update: 0 });
    }
    Ok(out)
}

/// Advantage-weighted log-likelihood without clipping.
pub fn pg_actor_loss(
    logp_new: &[f64],
    advantages: &[f64],
    entropy_coef: f64,
    entropy: f64,
) -> Result<ActorLoss, TrainError> {
    ShapeError::check("advantages", logp_new.len(), advantages.len())?;
    finite("new log-probabilities", logp_new)?;
    finite("advantages", advantages)?;
    let n = logp_new.len().max(1) as f64;
    let surrogate = logp_new.iter().zip(advantages).map(|(l, a)| l * a).sum::<f64>() / n;
    let loss = -surrogate - entropy_coef * entropy;
    if !loss.is_finite() {
        return Err(TrainError::NonFinite { what: "actor loss", update: 0 });
    }
    Ok(ActorLoss { loss, surrogate, clip_fraction: 0.0, approx_kl: 0.0, dlogp: advantages.iter().map(|a| -a / n).collect() })
}

/// Mean squared error and its derivative with respect to each prediction.
pub fn critic_loss(predictions: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>), TrainError> {
    ShapeError::check("critic targets", predictions.len(), targets.len())?;
    finite("value predictions", predictions)?;
    finite("value targets", targets)?;
    let n = predictions.len().max(1) as f64;
    let loss = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n;
    let grad = predictions.iter().zip(targets).map(|(p, t)| 2.0 * (p - t) / n).collect();
    Ok((loss, grad))
}

/// A batch of on-policy samples seen by the actor objective.
#[derive(Debug, Clone, Copy)]
pub struct ActorBatch<'a> {
    pub obs: &'a [Vec<f64>],
    pub raw: &'a [Vec<f64>],
    pub logp_old: &'a [f64],
    pub advantages: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Clipped { epsilon: f64 },
    Unclipped,
}

/// Actor loss and its gradient with respect to every actor parameter.
pub fn actor_objective(
    policy: &GaussianPolicy,
    batch: ActorBatch<'_>,
    objective: Objective,
    entropy_coef: f64,
) -> Result<(ActorLoss, GaussianPolicy), TrainError> {
    let n = batch.obs.len();
    ShapeError::check("actor batch raw actions", n, batch.raw.len())?;
    let traces = batch
        .obs
        .iter()
        .zip(batch.raw)
        .map(|(o, r)| policy.trace_log_prob(o, r))
        .collect::<Result<Vec<_>, _>>()?;
    let logp_new: Vec<f64> = traces.iter().map(|t| t.log_prob).collect();
    let entropy = policy.entropy();
    let loss = match objective {
        Objective::Clipped { epsilon } => {
            ppo_actor_loss(&logp_new, batch.logp_old, batch.advantages, epsilon, entropy_coef, entropy)?
        }
        Objective::Unclipped => pg_actor_loss(&logp_new, batch.advantages, entropy_coef, entropy)?,
    };
    let mut grad = policy.zeros_like();
    for ((trace, raw), coef) in traces.iter().zip(batch.raw).zip(&loss.dlogp) {
        policy.backprop_log_prob(trace, raw, *coef, &mut grad)?;
    }
    // d(-c · entropy)/d log_std_i = -c
    grad.log_std.iter_mut().for_each(|g| *g -= entropy_coef);
    Ok((loss, grad))
}

/// Critic mean squared error and its parameter gradient.
pub fn critic_objective(critic: &Mlp, obs: &[Vec<f64>], targets: &[f64]) -> Result<(f64, Mlp), TrainError> {
    let traces = obs.iter().map(|o| critic.forward_trace(o)).collect::<Result<Vec<_>, _>>()?;
    let preds: Vec<f64> = traces.iter().map(|t| t.output()[0]).collect();
    let (loss, dpred) = critic_loss(&preds, targets)?;
    let mut grad = critic.zeros_like();
    for (trace, d) in traces.iter().zip(&dpred) {
        critic.accumulate_backward(trace, &[*d], &mut grad)?;
    }
    debug_assert!(grad.params().all(|g| g.is_finite()));
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_ratio_gives_mean_advantage() {
        let adv = [1.0, -2.0, 0.5, 3.0];
        let lp = [-1.0, -2.0, -0.3, -4.0];
        let l = ppo_actor_loss(&lp, &lp, &adv, 0.2, 0.0, 0.0).unwrap();
        assert!((l.surrogate - 0.625).abs() < 1e-15);
        assert_eq!(l.clip_fraction, 0.0);
        assert_eq!(l.loss, -l.surrogate);
    }

    #[test]
    fn clip_binds_for_positive_advantage() {
        let l = ppo_actor_loss(&[1.5f64.ln()], &[0.0], &[1.0], 0.2, 0.0, 0.0).unwrap();
        assert!((l.surrogate - 1.2).abs() < 1e-12);
        assert_eq!(l.dlogp, vec![0.0]);
        assert_eq!(l.clip_fraction, 1.0);
    }

    #[test]
    fn clip_binds_for_negative_advantage() {
        let l = ppo_actor_loss(&[0.5f64.ln()], &[0.0], &[-1.0], 0.2, 0.0, 0.0).unwrap();
        assert!((l.surrogate + 0.8).abs() < 1e-12);
        assert_eq!(l.dlogp, vec![0.0]);
    }

    #[test]
    fn huge_epsilon_equals_unclipped_surrogate() {
        let new = [0.3, -0.7, 1.1];
        let old = [0.0, 0.0, 0.0];
        let adv = [1.0, -0.5, 2.0];
        let l = ppo_actor_loss(&new, &old, &adv, 1e12, 0.0, 0.0).unwrap();
        let unclipped: f64 = new.iter().zip(&adv).map(|(n, a)| n.exp() * a).sum::<f64>() / 3.0;
        assert!((l.surrogate - unclipped).abs() < 1e-12);
    }

    #[test]
    fn ratio_inside_band_is_unclipped() {
        let l = ppo_actor_loss(&[0.1], &[0.0], &[-2.0], 0.2, 0.0, 0.0).unwrap();
        assert!((l.surrogate + 2.0 * 0.1f64.exp()).abs() < 1e-12);
        assert!((l.dlogp[0] - 2.0 * 0.1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn non_finite_inputs_fault() {
        assert!(ppo_actor_loss(&[f64::NAN], &[0.0], &[1.0], 0.2, 0.0, 0.0).is_err());
        assert!(critic_loss(&[f64::INFINITY], &[0.0]).is_err());
        assert!(ppo_actor_loss(&[0.0, 1.0], &[0.0], &[1.0], 0.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn critic_examples() {
        assert_eq!(critic_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap().0, 0.0);
        assert_eq!(critic_loss(&[0.0], &[2.0]).unwrap().0, 4.0);
        let preds = [0.3, -1.2, 4.5, 2.25, -0.75];
        let targets = [1.0, -1.0, 3.0, 2.0, 0.5];
        let mut sum = 0.0;
        for i in 0..5 {
            sum += (preds[i] - targets[i]) * (preds[i] - targets[i]);
        }
        assert!((critic_loss(&preds, &targets).unwrap().0 - sum / 5.0).abs() < 1e-12);
    }
}
