//! Physical, network and UAV constants of a scenario.
//!
//! The on-disk form is a flat TOML document in SI units. Missing keys fall
//! back to the defaults below and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Rotary-wing UAV flight parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavParams {
    /// Blade profile power in hover, W.
    pub blade_power: f64,
    /// Induced power in hover, W.
    pub induced_power: f64,
    /// Rotor blade tip speed, m/s.
    pub tip_speed: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub mean_rotor_velocity: f64,
    /// Fuselage drag ratio.
    pub fuselage_drag_ratio: f64,
    /// Rotor solidity.
    pub rotor_solidity: f64,
    /// Air density, kg/m³.
    pub air_density: f64,
    /// Rotor disc area, m².
    pub rotor_disc_area: f64,
    pub max_speed: f64,
    pub max_accel: f64,
    /// Speed exponent in the blade profile term. 3 reproduces the printed
    /// energy model, 2 the common rotary-wing form.
    pub profile_speed_exponent: u8,
}

impl Default for UavParams {
    fn default() -> Self {
        UavParams {
            blade_power: 39.03,
            induced_power: 89.07,
            tip_speed: 100.0,
            mean_rotor_velocity: 3.6,
            fuselage_drag_ratio: 0.6,
            rotor_solidity: 0.05,
            air_density: 1.225,
            rotor_disc_area: 0.5030,
            max_speed: 20.0,
            max_accel: 5.0,
            profile_speed_exponent: 3,
        }
    }
}

/// Every constant needed to simulate one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ConfigFile", into = "ConfigFile")]
pub struct ScenarioConfig {
    pub num_vehicles: usize,
    pub num_slots: usize,
    /// Episode length T, s.
    pub period: f64,
    /// Half side of the square service area, m.
    pub area_half_extent: f64,
    /// Total uplink bandwidth, Hz.
    pub bandwidth: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    pub tx_power_vehicle: f64,
    pub tx_power_uav: f64,
    /// Linear channel power gain at 1 m.
    pub ref_channel_gain: f64,
    pub uav_altitude: f64,
    pub rsu_position: [f64; 3],
    /// Effective switched capacitance κ.
    pub effective_cap_coeff: f64,
    /// Total UAV CPU budget, cycles/s.
    pub uav_cpu_max: f64,
    /// RSU CPU cap per vehicle, cycles/s.
    pub rsu_cpu_per_vehicle_max: f64,
    /// Estimated local CPU frequency of every vehicle, cycles/s.
    pub vehicle_cpu: f64,
    /// Bound on |deviation| / estimate for every twin frequency.
    pub deviation_ratio: f64,
    pub task_bits_range: [f64; 2],
    pub task_density_range: [f64; 2],
    /// Per-task latency requirement, s.
    pub deadline: f64,
    pub vehicle_speed: f64,
    pub uav: UavParams,
    pub penalty_coeff: f64,
    /// Largest per-task deadline violation (s) charged by the penalty.
    pub violation_cap: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_vehicles: 12,
            num_slots: 40,
            period: 40.0,
            area_half_extent: 250.0,
            bandwidth: 2e6,
            noise_psd: 1e-16,
            tx_power_vehicle: 0.5,
            tx_power_uav: 0.8,
            ref_channel_gain: 1e-3,
            uav_altitude: 100.0,
            rsu_position: [-50.0, 0.0, 0.0],
            effective_cap_coeff: 1e-26,
            uav_cpu_max: 2e10,
            rsu_cpu_per_vehicle_max: 2e9,
            vehicle_cpu: 1e9,
            deviation_ratio: 0.1,
            task_bits_range: [0.2e6, 2e6],
            task_density_range: [500.0, 1500.0],
            deadline: 1.0,
            vehicle_speed: 15.0,
            uav: UavParams::default(),
            penalty_coeff: 100.0,
            violation_cap: 10.0,
        }
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be finite and > 0, got {value}")))
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be finite and >= 0, got {value}")))
    }
}

fn ordered_range(field: &'static str, range: [f64; 2]) -> Result<(), ConfigError> {
    positive(field, range[0])?;
    positive(field, range[1])?;
    if range[0] > range[1] {
        return Err(ConfigError::invalid(field, format!("min {} exceeds max {}", range[0], range[1])));
    }
    Ok(())
}

impl ScenarioConfig {
    /// Slot length δt = T / N.
    pub fn slot_len(&self) -> f64 {
        self.period / self.num_slots as f64
    }

    pub fn observation_dim(&self) -> usize {
        4 * self.num_vehicles + 2
    }

    pub fn action_dim(&self) -> usize {
        3 * self.num_vehicles + 2
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_vehicles == 0 {
            return Err(ConfigError::invalid("num_vehicles", "must be at least 1"));
        }
        if self.num_slots == 0 {
            return Err(ConfigError::invalid("num_slots", "must be at least 1"));
        }
        positive("period", self.period)?;
        positive("area_half_extent", self.area_half_extent)?;
        positive("bandwidth", self.bandwidth)?;
        positive("noise_psd", self.noise_psd)?;
        positive("tx_power_vehicle", self.tx_power_vehicle)?;
        positive("tx_power_uav", self.tx_power_uav)?;
        positive("ref_channel_gain", self.ref_channel_gain)?;
        positive("uav_altitude", self.uav_altitude)?;
        if !self.rsu_position.iter().all(|c| c.is_finite()) {
            return Err(ConfigError::invalid("rsu_position", "coordinates must be finite"));
        }
        positive("effective_cap_coeff", self.effective_cap_coeff)?;
        positive("uav_cpu_max", self.uav_cpu_max)?;
        positive("rsu_cpu_per_vehicle_max", self.rsu_cpu_per_vehicle_max)?;
        positive("vehicle_cpu", self.vehicle_cpu)?;
        if !(self.deviation_ratio.is_finite() && (0.0..1.0).contains(&self.deviation_ratio)) {
            return Err(ConfigError::invalid(
                "deviation_ratio",
                format!("must lie in [0, 1), got {}", self.deviation_ratio),
            ));
        }
        ordered_range("task_bits_range", self.task_bits_range)?;
        ordered_range("task_density_range", self.task_density_range)?;
        positive("deadline", self.deadline)?;
        non_negative("vehicle_speed", self.vehicle_speed)?;
        let u = &self.uav;
        positive("uav_p0", u.blade_power)?;
        positive("uav_pi", u.induced_power)?;
        positive("uav_u_tip", u.tip_speed)?;
        positive("uav_v0", u.mean_rotor_velocity)?;
        positive("uav_d0", u.fuselage_drag_ratio)?;
        positive("uav_s", u.rotor_solidity)?;
        positive("uav_rho", u.air_density)?;
        positive("uav_a", u.rotor_disc_area)?;
        positive("uav_v_max", u.max_speed)?;
        positive("uav_a_max", u.max_accel)?;
        if !matches!(u.profile_speed_exponent, 2 | 3) {
            return Err(ConfigError::invalid(
                "profile_speed_exponent",
                format!("must be 2 or 3, got {}", u.profile_speed_exponent),
            ));
        }
        non_negative("penalty_coeff", self.penalty_coeff)?;
        positive("violation_cap", self.violation_cap)?;
        Ok(())
    }

    /// Parse and validate a flat TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ScenarioConfig = toml::from_str(text).map_err(map_toml_error)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }

    /// Key names accepted in the flat file.
    pub fn keys() -> Vec<String> {
        table_keys(&ScenarioConfig::default())
    }
}

pub(crate) fn table_keys<T: Serialize>(value: &T) -> Vec<String> {
    let table = toml::Table::try_from(value).expect("config serializes to a table");
    table.keys().cloned().collect()
}

pub(crate) fn map_toml_error(err: toml::de::Error) -> ConfigError {
    let msg = err.message().to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(end) = rest.find('`') {
            return ConfigError::UnknownKey(rest[..end].to_string());
        }
    }
    ConfigError::Parse(err.to_string())
}

/// Flat on-disk layout; UAV parameters carry a `uav_` prefix.
#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    num_vehicles: usize,
    num_slots: usize,
    period: f64,
    area_half_extent: f64,
    bandwidth: f64,
    noise_psd: f64,
    tx_power_vehicle: f64,
    tx_power_uav: f64,
    ref_channel_gain: f64,
    uav_altitude: f64,
    rsu_position: [f64; 3],
    effective_cap_coeff: f64,
    uav_cpu_max: f64,
    rsu_cpu_per_vehicle_max: f64,
    vehicle_cpu: f64,
    deviation_ratio: f64,
    task_bits_range: [f64; 2],
    task_density_range: [f64; 2],
    deadline: f64,
    vehicle_speed: f64,
    uav_p0: f64,
    uav_pi: f64,
    uav_u_tip: f64,
    uav_v0: f64,
    uav_d0: f64,
    uav_s: f64,
    uav_rho: f64,
    uav_a: f64,
    uav_v_max: f64,
    uav_a_max: f64,
    profile_speed_exponent: u8,
    penalty_coeff: f64,
    violation_cap: f64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ScenarioConfig::default().into()
    }
}

impl From<ScenarioConfig> for ConfigFile {
    fn from(c: ScenarioConfig) -> Self {
        ConfigFile {
            num_vehicles: c.num_vehicles,
            num_slots: c.num_slots,
            period: c.period,
            area_half_extent: c.area_half_extent,
            bandwidth: c.bandwidth,
            noise_psd: c.noise_psd,
            tx_power_vehicle: c.tx_power_vehicle,
            tx_power_uav: c.tx_power_uav,
            ref_channel_gain: c.ref_channel_gain,
            uav_altitude: c.uav_altitude,
            rsu_position: c.rsu_position,
            effective_cap_coeff: c.effective_cap_coeff,
            uav_cpu_max: c.uav_cpu_max,
            rsu_cpu_per_vehicle_max: c.rsu_cpu_per_vehicle_max,
            vehicle_cpu: c.vehicle_cpu,
            deviation_ratio: c.deviation_ratio,
            task_bits_range: c.task_bits_range,
            task_density_range: c.task_density_range,
            deadline: c.deadline,
            vehicle_speed: c.vehicle_speed,
            uav_p0: c.uav.blade_power,
            uav_pi: c.uav.induced_power,
            uav_u_tip: c.uav.tip_speed,
            uav_v0: c.uav.mean_rotor_velocity,
            uav_d0: c.uav.fuselage_drag_ratio,
            uav_s: c.uav.rotor_solidity,
            uav_rho: c.uav.air_density,
            uav_a: c.uav.rotor_disc_area,
            uav_v_max: c.uav.max_speed,
            uav_a_max: c.uav.max_accel,
            profile_speed_exponent: c.uav.profile_speed_exponent,
            penalty_coeff: c.penalty_coeff,
            violation_cap: c.violation_cap,
        }
    }
}

impl From<ConfigFile> for ScenarioConfig {
    fn from(f: ConfigFile) -> Self {
        ScenarioConfig {
            num_vehicles: f.num_vehicles,
            num_slots: f.num_slots,
            period: f.period,
            area_half_extent: f.area_half_extent,
            bandwidth: f.bandwidth,
            noise_psd: f.noise_psd,
            tx_power_vehicle: f.tx_power_vehicle,
            tx_power_uav: f.tx_power_uav,
            ref_channel_gain: f.ref_channel_gain,
            uav_altitude: f.uav_altitude,
            rsu_position: f.rsu_position,
            effective_cap_coeff: f.effective_cap_coeff,
            uav_cpu_max: f.uav_cpu_max,
            rsu_cpu_per_vehicle_max: f.rsu_cpu_per_vehicle_max,
            vehicle_cpu: f.vehicle_cpu,
            deviation_ratio: f.deviation_ratio,
            task_bits_range: f.task_bits_range,
            task_density_range: f.task_density_range,
            deadline: f.deadline,
            vehicle_speed: f.vehicle_speed,
            uav: UavParams {
                blade_power: f.uav_p0,
                induced_power: f.uav_pi,
                tip_speed: f.uav_u_tip,
                mean_rotor_velocity: f.uav_v0,
                fuselage_drag_ratio: f.uav_d0,
                rotor_solidity: f.uav_s,
                air_density: f.uav_rho,
                rotor_disc_area: f.uav_a,
                max_speed: f.uav_v_max,
                max_accel: f.uav_a_max,
                profile_speed_exponent: f.profile_speed_exponent,
            },
            penalty_coeff: f.penalty_coeff,
            violation_cap: f.violation_cap,
        }
    }
}
