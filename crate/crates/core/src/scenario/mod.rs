//! Configuration, world state, mobility, task generation and twin records.

mod config;
mod twin;
mod world;

pub use config::{ScenarioConfig, UavParams};
pub(crate) use config::{map_toml_error, table_keys};
pub use twin::{TwinLayer, UavTwin, VehicleTwin};
pub use world::{
    init_scenario, sample_deviation_ratios, sample_deviations, sample_tasks, step_vehicles, wrap_coordinate,
    DeviationRatios, RoadAxis, SimRng, Task, UavState, VehicleState, WorldState,
};
