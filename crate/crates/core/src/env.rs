//! The per-slot decision process: observation encoding, action decoding,
//! transition and reward.
//!
//! Observation layout (length `4K + 2`), all positions divided by the area
//! half extent:
//!
//! | index            | value                       |
//! |------------------|-----------------------------|
//! | `4k`             | vehicle k x                 |
//! | `4k + 1`         | vehicle k y                 |
//! | `4k + 2`         | task k bits / max bits      |
//! | `4k + 3`         | task k density / max density|
//! | `4K`, `4K + 1`   | UAV x, UAV y                |
//!
//! Raw action layout (length `3K + 2`, entries in `[-1, 1]`):
//!
//! | index        | decoded as                                   |
//! |--------------|----------------------------------------------|
//! | `k`          | partition α_k = (raw + 1) / 2                |
//! | `K + k`      | UAV frequency for vehicle k                  |
//! | `2K + k`     | RSU frequency for vehicle k                  |
//! | `3K`, `3K+1` | UAV acceleration x, y (scaled by a_max)      |

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, EnvError, ShapeError};
use crate::physics::{self, clamp_norm};
use crate::scenario::{init_scenario, ScenarioConfig, TwinLayer, WorldState};

/// Decoded, feasible decision for one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub partition: Vec<f64>,
    pub uav_alloc: Vec<f64>,
    pub rsu_alloc: Vec<f64>,
    pub accel: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleOutcome {
    pub local_time: f64,
    pub offload_time: f64,
    pub uav_time: f64,
    pub relay_time: f64,
    pub rsu_time: f64,
    pub edge_latency: f64,
    pub uav_energy: f64,
    pub rsu_energy: f64,
    /// Seconds past the deadline, capped at the configured maximum.
    pub violation: f64,
    /// Local time predicted by the twin.
    pub est_local_time: f64,
    /// Edge latency predicted by the twin.
    pub est_edge_latency: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SlotOutcome {
    pub vehicles: Vec<VehicleOutcome>,
    pub fly_energy: f64,
    pub penalty: f64,
    pub cost: f64,
    pub reward: f64,
}

impl SlotOutcome {
    pub fn uav_energy(&self) -> f64 {
        self.vehicles.iter().map(|v| v.uav_energy).sum()
    }

    pub fn rsu_energy(&self) -> f64 {
        self.vehicles.iter().map(|v| v.rsu_energy).sum()
    }

    pub fn violation_count(&self) -> usize {
        self.vehicles.iter().filter(|v| v.violation > 0.0).count()
    }
}

fn unit_interval(raw: f64) -> f64 {
    let r = if raw.is_nan() { 0.0 } else { raw.clamp(-1.0, 1.0) };
    (r + 1.0) / 2.0
}

/// Map a raw policy output onto a feasible [`Action`].
pub fn decode_action(raw: &[f64], config: &ScenarioConfig) -> Result<Action, ShapeError> {
    let k = config.num_vehicles;
    ShapeError::check("raw action", config.action_dim(), raw.len())?;
    let partition = raw[..k].iter().map(|&r| unit_interval(r)).collect();

    let cap = config.uav_cpu_max;
    let mut uav_alloc: Vec<f64> = raw[k..2 * k].iter().map(|&r| unit_interval(r) * cap).collect();
    let total: f64 = uav_alloc.iter().sum();
    if total > cap {
        let scale = cap / total;
        uav_alloc.iter_mut().for_each(|f| *f *= scale);
        while uav_alloc.iter().sum::<f64>() > cap {
            uav_alloc.iter_mut().for_each(|f| *f *= 1.0 - f64::EPSILON);
        }
    }

    let rsu_alloc = raw[2 * k..3 * k].iter().map(|&r| unit_interval(r) * config.rsu_cpu_per_vehicle_max).collect();

    let a_max = config.uav.max_accel;
    let ax = if raw[3 * k].is_nan() { 0.0 } else { raw[3 * k].clamp(-1.0, 1.0) };
    let ay = if raw[3 * k + 1].is_nan() { 0.0 } else { raw[3 * k + 1].clamp(-1.0, 1.0) };
    let accel = clamp_norm([a_max * ax, a_max * ay], a_max);

    Ok(Action { partition, uav_alloc, rsu_alloc, accel })
}

pub fn encode_observation(state: &WorldState, config: &ScenarioConfig) -> Vec<f64> {
    let ext = config.area_half_extent;
    let mut obs = Vec::with_capacity(config.observation_dim());
    for (v, t) in state.vehicles.iter().zip(&state.tasks) {
        obs.push(v.position[0] / ext);
        obs.push(v.position[1] / ext);
        obs.push(t.bits / config.task_bits_range[1]);
        obs.push(t.density / config.task_density_range[1]);
    }
    obs.push(state.uav.position[0] / ext);
    obs.push(state.uav.position[1] / ext);
    obs
}

/// Evaluate energies, latencies and the reward of the current slot without
/// advancing the world.
pub fn evaluate_slot(state: &WorldState, config: &ScenarioConfig, action: &Action) -> Result<SlotOutcome, EnvError> {
    let k = config.num_vehicles;
    for (name, len) in [
        ("partition", action.partition.len()),
        ("uav_alloc", action.uav_alloc.len()),
        ("rsu_alloc", action.rsu_alloc.len()),
    ] {
        ShapeError::check(name, k, len)?;
    }
    let fault = |vehicle| move |source| EnvError::Physics { slot: state.slot, vehicle, source };
    let q = state.uav.position;
    let kappa = config.effective_cap_coeff;
    let relay = physics::link_budget(
        &q,
        &config.rsu_position,
        config.ref_channel_gain,
        config.tx_power_uav,
        config.bandwidth,
        k,
        config.noise_psd,
    )
    .map_err(fault(0))?;

    let mut vehicles = Vec::with_capacity(k);
    for i in 0..k {
        let task = &state.tasks[i];
        let dev = &state.deviations[i];
        let alpha = action.partition[i];
        let uplink = physics::link_budget(
            &q,
            &state.vehicles[i].position,
            config.ref_channel_gain,
            config.tx_power_vehicle,
            config.bandwidth,
            k,
            config.noise_psd,
        )
        .map_err(fault(i))?;
        let offload = physics::offload_time(alpha, task, uplink.rate);
        let local =
            physics::local_compute(alpha, task, config.vehicle_cpu, dev.local * config.vehicle_cpu).map_err(fault(i))?;
        let f_u = action.uav_alloc[i];
        let uav = physics::uav_compute(alpha, task, offload, f_u, dev.uav * f_u, kappa).map_err(fault(i))?;
        let relay_time = physics::relay_time(uav.relayed_bits, relay.rate);
        let f_rc = action.rsu_alloc[i];
        let rsu = physics::rsu_compute(uav.relayed_bits, task, relay_time, f_rc, dev.rsu * f_rc, kappa)
            .map_err(fault(i))?;
        let edge = physics::edge_latency(offload, relay_time, rsu.actual_time, uav.actual_time);
        let est_edge = physics::edge_latency(offload, relay_time, rsu.est_time, uav.est_time);
        let violation = (local.actual_time - task.deadline)
            .max(edge - task.deadline)
            .max(0.0)
            .min(config.violation_cap);
        vehicles.push(VehicleOutcome {
            local_time: local.actual_time,
            offload_time: offload,
            uav_time: uav.actual_time,
            relay_time,
            rsu_time: rsu.actual_time,
            edge_latency: edge,
            uav_energy: uav.energy,
            rsu_energy: rsu.energy,
            violation,
            est_local_time: local.est_time,
            est_edge_latency: est_edge,
        });
    }

    let fly_energy = physics::propulsion_energy(state.uav.velocity, config.slot_len(), &config.uav);
    let penalty = config.penalty_coeff / k as f64 * vehicles.iter().map(|v| v.violation).sum::<f64>();
    let mut outcome = SlotOutcome { vehicles, fly_energy, penalty, cost: 0.0, reward: 0.0 };
    outcome.cost = outcome.uav_energy() + outcome.rsu_energy() + outcome.fly_energy + outcome.penalty;
    outcome.reward = -outcome.cost;
    Ok(outcome)
}

/// Result of one [`Env::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub outcome: SlotOutcome,
    pub done: bool,
}

/// A single episode of the scenario.
#[derive(Debug, Clone)]
pub struct Env {
    config: ScenarioConfig,
    state: WorldState,
    twins: TwinLayer,
}

impl Env {
    pub fn reset(config: &ScenarioConfig, seed: u64) -> Result<(Env, Vec<f64>), ConfigError> {
        let state = init_scenario(config, seed)?;
        let mut twins = TwinLayer::default();
        twins.sync_vehicles(&state, config);
        let env = Env { config: config.clone(), state, twins };
        let obs = env.observation();
        Ok((env, obs))
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn twins(&self) -> &TwinLayer {
        &self.twins
    }

    pub fn observation(&self) -> Vec<f64> {
        encode_observation(&self.state, &self.config)
    }

    pub fn is_done(&self) -> bool {
        self.state.slot > self.config.num_slots
    }

    /// Override the UAV kinematic state, e.g. to start a baseline on its orbit.
    pub fn set_uav(&mut self, position: [f64; 2], velocity: [f64; 2]) {
        self.state.uav.position = [position[0], position[1], self.config.uav_altitude];
        self.state.uav.velocity = clamp_norm(velocity, self.config.uav.max_speed);
    }

    pub fn step(&mut self, action: &Action) -> Result<Step, EnvError> {
        if self.is_done() {
            return Err(EnvError::EpisodeOver(self.config.num_slots));
        }
        let outcome = evaluate_slot(&self.state, &self.config, action)?;
        self.twins.sync_uav(&self.state, &action.uav_alloc, action.accel);

        let uav = &self.config.uav;
        let (q, v) = physics::update_kinematics(
            self.state.uav.position,
            self.state.uav.velocity,
            action.accel,
            self.config.slot_len(),
            uav.max_speed,
            uav.max_accel,
        );
        self.state.uav.position = q;
        self.state.uav.velocity = v;
        let done = self.state.slot == self.config.num_slots;
        self.state.advance_slot(&self.config);
        self.twins.sync_vehicles(&self.state, &self.config);

        Ok(Step { observation: self.observation(), outcome, done })
    }

    /// Decode a raw policy output and step.
    pub fn step_raw(&mut self, raw: &[f64]) -> Result<Step, EnvError> {
        let action = decode_action(raw, &self.config)?;
        self.step(&action)
    }
}
