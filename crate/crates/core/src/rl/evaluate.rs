use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trainer::episode_seed;
use crate::baselines::{random_policy, BaselineSpec};
use crate::env::{decode_action, Action, Env};
use crate::error::TrainError;
use crate::nn::PolicyParams;
use crate::physics::norm2;
use crate::scenario::ScenarioConfig;

const CONTROLLER_STREAM: u64 = 0xE7A1_0C7E;

/// Anything that picks an action for the current slot.
pub trait Controller {
    /// Called after each reset with a per-episode seed.
    fn begin_episode(&mut self, env: &mut Env, seed: u64);
    fn act(&mut self, env: &Env) -> Result<Action, TrainError>;
}

/// A trained actor, either sampled or run at its mean.
#[derive(Debug, Clone)]
pub struct PolicyController<'a> {
    params: &'a PolicyParams,
    deterministic: bool,
    rng: ChaCha8Rng,
}

impl<'a> PolicyController<'a> {
    pub fn new(params: &'a PolicyParams, deterministic: bool) -> Self {
        PolicyController { params, deterministic, rng: ChaCha8Rng::seed_from_u64(0) }
    }
}

impl Controller for PolicyController<'_> {
    fn begin_episode(&mut self, _env: &mut Env, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn act(&mut self, env: &Env) -> Result<Action, TrainError> {
        let obs = env.observation();
        let raw = if self.deterministic {
            self.params.actor.act_deterministic(&obs)?
        } else {
            self.params.actor.sample(&obs, &mut self.rng)?.action
        };
        Ok(decode_action(&raw, env.config())?)
    }
}

/// Random offloading on a fixed orbit, started on the circle each episode.
#[derive(Debug, Clone)]
pub struct BaselineController {
    spec: BaselineSpec,
    rng: ChaCha8Rng,
}

impl BaselineController {
    pub fn new(spec: BaselineSpec) -> Self {
        BaselineController { spec, rng: ChaCha8Rng::seed_from_u64(0) }
    }
}

impl Controller for BaselineController {
    fn begin_episode(&mut self, env: &mut Env, seed: u64) {
        let (p, v) = self.spec.initial_state();
        env.set_uav(p, v);
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn act(&mut self, env: &Env) -> Result<Action, TrainError> {
        Ok(random_policy(env.state(), &mut self.rng, env.config(), &self.spec))
    }
}

/// Positions at the start of one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub slot: usize,
    pub uav: [f64; 2],
    pub vehicles: Vec<[f64; 2]>,
}

impl TrajectoryPoint {
    pub fn centroid(&self) -> [f64; 2] {
        let n = self.vehicles.len().max(1) as f64;
        let sx: f64 = self.vehicles.iter().map(|v| v[0]).sum();
        let sy: f64 = self.vehicles.iter().map(|v| v[1]).sum();
        [sx / n, sy / n]
    }

    /// Horizontal distance from the UAV to the vehicle centroid.
    pub fn centroid_distance(&self) -> f64 {
        let c = self.centroid();
        norm2([self.uav[0] - c[0], self.uav[1] - c[1]])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub mean_reward: f64,
    pub energy_uav_compute: f64,
    pub energy_rsu: f64,
    pub energy_fly: f64,
    pub penalty: f64,
    /// Violations per vehicle-slot.
    pub violation_rate: f64,
    /// Cost of every episode in order.
    pub costs: Vec<f64>,
    /// The last episode.
    pub trajectory: Vec<TrajectoryPoint>,
}

impl EvalSummary {
    pub fn mean_centroid_distance(&self) -> f64 {
        let n = self.trajectory.len().max(1) as f64;
        self.trajectory.iter().map(TrajectoryPoint::centroid_distance).sum::<f64>() / n
    }
}

/// Run `episodes` episodes; episode `i` uses environment seed
/// `episode_seed(seed, i)`.
pub fn evaluate<C: Controller>(
    controller: &mut C,
    config: &ScenarioConfig,
    episodes: usize,
    seed: u64,
) -> Result<EvalSummary, TrainError> {
    if episodes == 0 {
        return Err(TrainError::NoEpisodes);
    }
    let mut s = EvalSummary {
        episodes,
        mean_cost: 0.0,
        std_cost: 0.0,
        mean_reward: 0.0,
        energy_uav_compute: 0.0,
        energy_rsu: 0.0,
        energy_fly: 0.0,
        penalty: 0.0,
        violation_rate: 0.0,
        costs: Vec::with_capacity(episodes),
        trajectory: Vec::new(),
    };
    let mut violations = 0usize;
    for i in 0..episodes as u64 {
        let (mut env, _) = Env::reset(config, episode_seed(seed, i))?;
        controller.begin_episode(&mut env, episode_seed(seed ^ CONTROLLER_STREAM, i));
        let mut cost = 0.0;
        let mut trajectory = Vec::with_capacity(config.num_slots);
        while !env.is_done() {
            let st = env.state();
            trajectory.push(TrajectoryPoint {
                slot: st.slot,
                uav: [st.uav.position[0], st.uav.position[1]],
                vehicles: st.vehicles.iter().map(|v| [v.position[0], v.position[1]]).collect(),
            });
            let action = controller.act(&env)?;
            let o = env.step(&action)?.outcome;
            cost += o.cost;
            s.mean_reward += o.reward;
            s.energy_uav_compute += o.uav_energy();
            s.energy_rsu += o.rsu_energy();
            s.energy_fly += o.fly_energy;
            s.penalty += o.penalty;
            violations += o.violation_count();
        }
        s.costs.push(cost);
        s.trajectory = trajectory;
    }
    let n = episodes as f64;
    s.mean_cost = s.costs.iter().sum::<f64>() / n;
    s.std_cost = (s.costs.iter().map(|c| (c - s.mean_cost).powi(2)).sum::<f64>() / n).sqrt();
    s.mean_reward /= n;
    s.energy_uav_compute /= n;
    s.energy_rsu /= n;
    s.energy_fly /= n;
    s.penalty /= n;
    s.violation_rate = violations as f64 / (n * (config.num_slots * config.num_vehicles).max(1) as f64);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ScenarioConfig {
        ScenarioConfig { num_vehicles: 3, num_slots: 10, period: 10.0, ..Default::default() }
    }

    fn baseline(c: &ScenarioConfig) -> BaselineController {
        BaselineController::new(BaselineSpec::for_config(c, 300.0))
    }

    #[test]
    fn baseline_evaluation_is_repeatable() {
        let c = config();
        let a = evaluate(&mut baseline(&c), &c, 3, 11).unwrap();
        let b = evaluate(&mut baseline(&c), &c, 3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trajectory.len(), 10);
        assert_eq!(a.costs.len(), 3);
    }

    #[test]
    fn deterministic_policy_has_no_spread_on_repeats() {
        let c = config();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = PolicyParams::new(c.observation_dim(), c.action_dim(), &[8], -0.5, &mut rng);
        let a = evaluate(&mut PolicyController::new(&params, true), &c, 2, 5).unwrap();
        let b = evaluate(&mut PolicyController::new(&params, true), &c, 2, 5).unwrap();
        assert_eq!(a, b);
        // Same environment seed every episode leaves only the actor as a noise source.
        let mut per_run = Vec::new();
        for _ in 0..3 {
            per_run.push(evaluate(&mut PolicyController::new(&params, true), &c, 1, 9).unwrap().mean_cost);
        }
        assert!(per_run.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn zero_episodes_is_an_error() {
        let c = config();
        assert!(matches!(evaluate(&mut baseline(&c), &c, 0, 0), Err(TrainError::NoEpisodes)));
    }

    #[test]
    fn baseline_starts_on_circle() {
        let c = config();
        let s = evaluate(&mut baseline(&c), &c, 1, 0).unwrap();
        assert_eq!(s.trajectory[0].uav, [300.0, 0.0]);
    }
}
