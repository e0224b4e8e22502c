use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ScenarioConfig;
use crate::error::ConfigError;

/// The single generator every stochastic draw of a scenario flows through.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoadAxis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Ground position, z is always 0.
    pub position: [f64; 3],
    pub axis: RoadAxis,
    /// +1 or -1 along `axis`.
    pub heading: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    /// Input size, bits.
    pub bits: f64,
    /// Cycles per bit.
    pub density: f64,
    /// Latency requirement, s.
    pub deadline: f64,
}

impl Task {
    pub fn cycles(&self) -> f64 {
        self.bits * self.density
    }
}

/// Relative twin-estimation errors of one vehicle's three compute paths,
/// each in `[-η, η]`. The absolute deviation is `ratio × estimate`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeviationRatios {
    pub local: f64,
    pub uav: f64,
    pub rsu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: [f64; 3],
    pub velocity: [f64; 2],
}

/// Ground truth of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    /// 1-based slot index.
    pub slot: usize,
    pub vehicles: Vec<VehicleState>,
    pub uav: UavState,
    pub tasks: Vec<Task>,
    pub deviations: Vec<DeviationRatios>,
    pub rng: SimRng,
}

/// Wrap a coordinate onto `[-half_extent, half_extent)`.
pub fn wrap_coordinate(x: f64, half_extent: f64) -> f64 {
    (x + half_extent).rem_euclid(2.0 * half_extent) - half_extent
}

fn uniform(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}

/// Advance each vehicle along its road, wrapping at the area boundary.
pub fn step_vehicles(vehicles: &mut [VehicleState], dt: f64, half_extent: f64) {
    for v in vehicles {
        let idx = match v.axis {
            RoadAxis::X => 0,
            RoadAxis::Y => 1,
        };
        let moved = v.position[idx] + v.heading * v.speed * dt;
        v.position[idx] = wrap_coordinate(moved, half_extent);
    }
}

pub fn sample_tasks(rng: &mut SimRng, config: &ScenarioConfig) -> Vec<Task> {
    let [d_lo, d_hi] = config.task_bits_range;
    let [c_lo, c_hi] = config.task_density_range;
    (0..config.num_vehicles)
        .map(|_| {
            let bits = uniform(rng, d_lo, d_hi);
            let density = uniform(rng, c_lo, c_hi);
            Task { bits, density, deadline: config.deadline }
        })
        .collect()
}

/// Draw an absolute deviation `f̂ ~ U[-η f̃, η f̃]` for each estimate.
pub fn sample_deviations(rng: &mut SimRng, deviation_ratio: f64, est_freqs: &[f64]) -> Vec<f64> {
    est_freqs.iter().map(|&f| uniform(rng, -deviation_ratio, deviation_ratio) * f).collect()
}

pub fn sample_deviation_ratios(rng: &mut SimRng, config: &ScenarioConfig) -> Vec<DeviationRatios> {
    let eta = config.deviation_ratio;
    (0..config.num_vehicles)
        .map(|_| DeviationRatios {
            local: uniform(rng, -eta, eta),
            uav: uniform(rng, -eta, eta),
            rsu: uniform(rng, -eta, eta),
        })
        .collect()
}

pub fn init_scenario(config: &ScenarioConfig, seed: u64) -> Result<WorldState, ConfigError> {
    config.validate()?;
    let mut rng = SimRng::seed_from_u64(seed);
    let ext = config.area_half_extent;
    let vehicles = (0..config.num_vehicles)
        .map(|_| {
            let axis = if rng.random::<bool>() { RoadAxis::X } else { RoadAxis::Y };
            let along = uniform(&mut rng, -ext, ext);
            let heading = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let position = match axis {
                RoadAxis::X => [along, 0.0, 0.0],
                RoadAxis::Y => [0.0, along, 0.0],
            };
            VehicleState { position, axis, heading, speed: config.vehicle_speed }
        })
        .collect();
    let tasks = sample_tasks(&mut rng, config);
    let deviations = sample_deviation_ratios(&mut rng, config);
    Ok(WorldState {
        slot: 1,
        vehicles,
        uav: UavState { position: [0.0, 0.0, config.uav_altitude], velocity: [0.0, 0.0] },
        tasks,
        deviations,
        rng,
    })
}

impl WorldState {
    /// Move to the next slot: advance vehicles and draw fresh tasks and deviations.
    pub(crate) fn advance_slot(&mut self, config: &ScenarioConfig) {
        step_vehicles(&mut self.vehicles, config.slot_len(), config.area_half_extent);
        self.tasks = sample_tasks(&mut self.rng, config);
        self.deviations = sample_deviation_ratios(&mut self.rng, config);
        self.slot += 1;
    }
}
