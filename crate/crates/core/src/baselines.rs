//! Non-learning comparison policy: random partitions, fixed frequency
//! allocation and a fixed circular UAV orbit around the area centre.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Action;
use crate::physics::{clamp_norm, norm2};
use crate::scenario::{ScenarioConfig, WorldState};

const RADIAL_GAIN: f64 = 0.08;
const RADIAL_DAMPING: f64 = 0.5;
const SPEED_GAIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub circle_radius: f64,
    /// Tangential speed along the orbit.
    pub speed: f64,
}

impl BaselineSpec {
    /// Fastest orbit allowed by both the speed and the acceleration limits.
    pub fn for_config(config: &ScenarioConfig, circle_radius: f64) -> Self {
        let uav = &config.uav;
        let speed = uav.max_speed.min((uav.max_accel * circle_radius).sqrt());
        BaselineSpec { circle_radius, speed }
    }

    pub fn angular_speed(&self) -> f64 {
        self.speed / self.circle_radius
    }

    pub fn centripetal_accel(&self) -> f64 {
        self.speed * self.speed / self.circle_radius
    }

    /// Start of the orbit: angle 0, moving counter-clockwise.
    pub fn initial_state(&self) -> ([f64; 2], [f64; 2]) {
        ([self.circle_radius, 0.0], [0.0, self.speed])
    }
}

/// Acceleration that keeps the UAV on the orbit.
///
/// Centripetal feed-forward plus proportional-derivative correction of the
/// radial error and proportional correction of the tangential speed, saturated
/// at `max_accel`.
pub fn circle_tracking_accel(position: [f64; 2], velocity: [f64; 2], spec: &BaselineSpec, max_accel: f64) -> [f64; 2] {
    let r = norm2(position);
    if r == 0.0 {
        return clamp_norm([spec.speed, 0.0], max_accel);
    }
    let u = [position[0] / r, position[1] / r];
    let t = [-u[1], u[0]];
    let v_rad = velocity[0] * u[0] + velocity[1] * u[1];
    let v_tan = velocity[0] * t[0] + velocity[1] * t[1];
    let radial = -spec.centripetal_accel() + RADIAL_GAIN * (spec.circle_radius - r) - RADIAL_DAMPING * v_rad;
    let tangential = SPEED_GAIN * (spec.speed - v_tan);
    clamp_norm([radial * u[0] + tangential * t[0], radial * u[1] + tangential * t[1]], max_accel)
}

/// Random offloading: `α ~ U[0, 1]`, equal UAV split, half the RSU budget.
pub fn random_policy<R: Rng>(state: &WorldState, rng: &mut R, config: &ScenarioConfig, spec: &BaselineSpec) -> Action {
    let k = config.num_vehicles;
    let partition = (0..k).map(|_| rng.random::<f64>()).collect();
    let uav_alloc = vec![config.uav_cpu_max / k as f64; k];
    let rsu_alloc = vec![config.rsu_cpu_per_vehicle_max / 2.0; k];
    let p = [state.uav.position[0], state.uav.position[1]];
    let accel = circle_tracking_accel(p, state.uav.velocity, spec, config.uav.max_accel);
    Action { partition, uav_alloc, rsu_alloc, accel }
}
