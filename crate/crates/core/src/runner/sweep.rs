use std::fmt::Write as _;

use rayon::prelude::*;

use super::ExperimentConfig;
use crate::error::{ConfigError, TrainError};
use crate::nn::PolicyParams;
use crate::rl::{evaluate, train, Algo, EvalSummary, PolicyController};
use crate::scenario::ScenarioConfig;

/// Evaluation episodes use a stream disjoint from the training episodes.
const EVAL_STREAM: u64 = 0x0E7A_1000_5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Number of vehicles; the policy is retrained for each value.
    Vehicles,
    /// System bandwidth in Hz.
    Bandwidth,
    /// Upper end of the task size range in bits.
    TaskSize,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vehicles" => Ok(SweepAxis::Vehicles),
            "bandwidth" => Ok(SweepAxis::Bandwidth),
            "task_size" => Ok(SweepAxis::TaskSize),
            other => Err(format!("unknown axis `{other}` (expected vehicles, bandwidth or task_size)")),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Vehicles => "vehicles",
            SweepAxis::Bandwidth => "bandwidth",
            SweepAxis::TaskSize => "task_size",
        })
    }
}

pub fn apply_axis(base: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<ScenarioConfig, ConfigError> {
    let mut c = base.clone();
    match axis {
        SweepAxis::Vehicles => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(ConfigError::invalid("num_vehicles", format!("sweep value {value} is not a positive integer")));
            }
            c.num_vehicles = value as usize;
        }
        SweepAxis::Bandwidth => c.bandwidth = value,
        SweepAxis::TaskSize => c.task_bits_range[1] = value,
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub seed: u64,
    pub result: Result<EvalSummary, String>,
}

/// Deterministic evaluation of one fixed policy at each axis value.
pub fn evaluate_axis(
    params: &PolicyParams,
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
    seed: u64,
    episodes: usize,
) -> Vec<Result<EvalSummary, String>> {
    values
        .iter()
        .map(|&v| {
            let c = apply_axis(base, axis, v).map_err(|e| e.to_string())?;
            evaluate(&mut PolicyController::new(params, true), &c, episodes, seed ^ EVAL_STREAM).map_err(|e| e.to_string())
        })
        .collect()
}

fn leg(exp: &ExperimentConfig, axis: SweepAxis, values: &[f64], seed: u64, eval_episodes: usize) -> Vec<SweepRow> {
    let mut tc = exp.train.clone();
    tc.seed = seed;
    let trained: Result<(ScenarioConfig, PolicyParams), String> = (|| {
        let scenario = match axis {
            SweepAxis::Vehicles => apply_axis(&exp.scenario, axis, values[0]).map_err(|e| e.to_string())?,
            _ => exp.scenario.clone(),
        };
        let (params, _) = train(&scenario, &tc, Algo::Ppo).map_err(|e: TrainError| e.to_string())?;
        Ok((scenario, params))
    })();
    match trained {
        Ok((scenario, params)) => {
            let base = if axis == SweepAxis::Vehicles { &scenario } else { &exp.scenario };
            values
                .iter()
                .zip(evaluate_axis(&params, base, axis, values, seed, eval_episodes))
                .map(|(&axis_value, result)| SweepRow { axis_value, seed, result })
                .collect()
        }
        Err(e) => values.iter().map(|&axis_value| SweepRow { axis_value, seed, result: Err(e.clone()) }).collect(),
    }
}

/// Train with PPO and evaluate every `(value, seed)` pair.
///
/// The vehicle count changes the network shapes, so that axis trains one
/// policy per value; the other axes train once per seed and re-evaluate.
/// Rows are ordered by value, then seed. A failing leg yields error rows.
pub fn run_sweep(
    exp: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    seeds: &[u64],
    jobs: usize,
    eval_episodes: usize,
) -> Vec<SweepRow> {
    let legs: Vec<(Vec<f64>, u64)> = match axis {
        SweepAxis::Vehicles => values.iter().flat_map(|&v| seeds.iter().map(move |&s| (vec![v], s))).collect(),
        _ => seeds.iter().map(|&s| (values.to_vec(), s)).collect(),
    };
    let run = || -> Vec<SweepRow> {
        legs.par_iter().flat_map_iter(|(vals, seed)| leg(exp, axis, vals, *seed, eval_episodes)).collect()
    };
    let mut rows = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    let position = |v: f64| values.iter().position(|&x| x == v).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (position(r.axis_value), seeds.iter().position(|&s| s == r.seed)));
    rows
}

pub const SWEEP_HEADER: &str =
    "axis,axis_value,seed,status,mean_cost,std_cost,energy_uav_compute,energy_rsu,energy_fly,penalty,violation_rate";

pub fn sweep_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{axis},{},{},", r.axis_value, r.seed);
        match &r.result {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "ok,{},{},{},{},{},{},{}",
                    s.mean_cost, s.std_cost, s.energy_uav_compute, s.energy_rsu, s.energy_fly, s.penalty, s.violation_rate
                );
            }
            Err(e) => {
                let msg: String = e.chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
                let _ = writeln!(out, "error: {msg},,,,,,,");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        let mut exp = ExperimentConfig::default();
        exp.scenario.num_vehicles = 2;
        exp.scenario.num_slots = 4;
        exp.train.episodes = 2;
        exp.train.episodes_per_update = 2;
        exp.train.hidden_sizes = vec![4];
        exp
    }

    #[test]
    fn axis_values_are_applied() {
        let base = ScenarioConfig::default();
        assert_eq!(apply_axis(&base, SweepAxis::Vehicles, 8.0).unwrap().num_vehicles, 8);
        assert_eq!(apply_axis(&base, SweepAxis::Bandwidth, 3e6).unwrap().bandwidth, 3e6);
        assert_eq!(apply_axis(&base, SweepAxis::TaskSize, 1.5e6).unwrap().task_bits_range, [0.2e6, 1.5e6]);
        assert!(apply_axis(&base, SweepAxis::Vehicles, 2.5).is_err());
        assert!(apply_axis(&base, SweepAxis::Bandwidth, -1.0).is_err());
        assert_eq!("task_size".parse::<SweepAxis>().unwrap(), SweepAxis::TaskSize);
        assert!("speed".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn one_row_per_value_and_seed() {
        let rows = run_sweep(&tiny(), SweepAxis::Vehicles, &[2.0, 3.0], &[0, 1], 2, 1);
        assert_eq!(rows.len(), 4);
        assert_eq!(
            rows.iter().map(|r| (r.axis_value, r.seed)).collect::<Vec<_>>(),
            vec![(2.0, 0), (2.0, 1), (3.0, 0), (3.0, 1)]
        );
        assert!(rows.iter().all(|r| r.result.is_ok()));
    }

    #[test]
    fn failed_leg_does_not_stop_the_sweep() {
        let rows = run_sweep(&tiny(), SweepAxis::Bandwidth, &[1e6, -5.0, 2e6], &[3], 1, 1);
        assert_eq!(rows.len(), 3);
        assert!(rows[0].result.is_ok() && rows[2].result.is_ok());
        assert!(rows[1].result.is_err());
        let csv = sweep_csv(SweepAxis::Bandwidth, &rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().all(|l| l.split(',').count() == SWEEP_HEADER.split(',').count()));
    }
}
