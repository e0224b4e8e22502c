//! Digital-twin records kept by the central controller.
//!
//! Twins mirror the physical layer at slot boundaries and carry only
//! estimated CPU frequencies; the actual frequencies differ by the
//! deviations held in [`WorldState`](super::WorldState).

use serde::{Deserialize, Serialize};

use super::{ScenarioConfig, Task, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTwin {
    pub task: Task,
    pub est_cpu: f64,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavTwin {
    /// Estimated CPU frequency allocated to each vehicle.
    pub est_cpu_alloc: Vec<f64>,
    pub position: [f64; 3],
    pub accel: [f64; 2],
    pub velocity: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TwinLayer {
    pub vehicles: Vec<VehicleTwin>,
    pub uav: Option<UavTwin>,
}

impl TwinLayer {
    /// Mirror the physical state at the start of a slot.
    pub fn sync_vehicles(&mut self, state: &WorldState, config: &ScenarioConfig) {
        self.vehicles = state
            .vehicles
            .iter()
            .zip(&state.tasks)
            .map(|(v, task)| VehicleTwin { task: *task, est_cpu: config.vehicle_cpu, position: v.position })
            .collect();
    }

    /// Record the UAV schedule decided for the current slot.
    pub fn sync_uav(&mut self, state: &WorldState, est_cpu_alloc: &[f64], accel: [f64; 2]) {
        self.uav = Some(UavTwin {
            est_cpu_alloc: est_cpu_alloc.to_vec(),
            position: state.uav.position,
            accel,
            velocity: state.uav.velocity,
        });
    }
}
