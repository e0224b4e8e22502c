use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::rl::{EpisodeMetrics, EvalSummary, TrajectoryPoint};

use super::RunError;

pub const METRICS_HEADER: &str =
    "episode,reward,cost,energy_uav_compute,energy_rsu,energy_fly,penalty,violation_count,wall_time";

/// One metrics line; floats use the shortest text that parses back exactly.
pub fn metrics_row(m: &EpisodeMetrics) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        m.episode,
        m.reward,
        m.cost,
        m.energy_uav_compute,
        m.energy_rsu,
        m.energy_fly,
        m.penalty,
        m.violation_count,
        m.sim_time
    )
}

pub fn metrics_csv(history: &[EpisodeMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for m in history {
        out.push_str(&metrics_row(m));
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let k = points.first().map_or(0, |p| p.vehicles.len());
    let mut out = String::from("slot,uav_x,uav_y");
    for i in 0..k {
        let _ = write!(out, ",vehicle{i}_x,vehicle{i}_y");
    }
    out.push('\n');
    for p in points {
        let _ = write!(out, "{},{},{}", p.slot, p.uav[0], p.uav[1]);
        for v in &p.vehicles {
            let _ = write!(out, ",{},{}", v[0], v[1]);
        }
        out.push('\n');
    }
    out
}

pub const SUMMARY_HEADER: &str = "policy,episodes,seed,mean_cost,std_cost,mean_reward,energy_uav_compute,energy_rsu,energy_fly,penalty,violation_rate,mean_centroid_distance";

pub fn summary_csv(policy: &str, seed: u64, s: &EvalSummary) -> String {
    format!(
        "{SUMMARY_HEADER}\n{policy},{},{seed},{},{},{},{},{},{},{},{},{}\n",
        s.episodes,
        s.mean_cost,
        s.std_cost,
        s.mean_reward,
        s.energy_uav_compute,
        s.energy_rsu,
        s.energy_fly,
        s.penalty,
        s.violation_rate,
        s.mean_centroid_distance()
    )
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn create_dir(path: &Path) -> Result<(), RunError> {
    fs::create_dir_all(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        let m = EpisodeMetrics { episode: 3, cost: 0.1 + 0.2, reward: -1.0 / 3.0, ..Default::default() };
        let row = metrics_row(&m);
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), METRICS_HEADER.split(',').count());
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(fields[1].parse::<f64>().unwrap(), -1.0 / 3.0);
    }

    #[test]
    fn trajectory_columns() {
        let p = TrajectoryPoint { slot: 1, uav: [1.5, -2.0], vehicles: vec![[0.0, 1.0], [2.0, 3.0]] };
        let text = trajectory_csv(&[p.clone(), TrajectoryPoint { slot: 2, ..p }]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "slot,uav_x,uav_y,vehicle0_x,vehicle0_y,vehicle1_x,vehicle1_y");
        assert_eq!(lines[1], "1,1.5,-2,0,1,2,3");
        assert_eq!(lines.len(), 3);
    }
}
