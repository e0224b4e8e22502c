//! Experiment orchestration behind the command line: training runs,
//! checkpoint evaluation and parameter sweeps, with their files on disk.
//!
//! | command | files written to `--out` |
//! |---------|--------------------------|
//! | train   | `config.resolved`, `metrics.csv`, `checkpoint.final`, `checkpoint.epN` |
//! | eval    | `eval_summary.csv`, `trajectory.csv` |
//! | sweep   | `sweep.csv` |

mod experiment;
mod output;
mod sweep;

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};

pub use crate::error::RunError;
pub use experiment::ExperimentConfig;
pub use output::{metrics_csv, metrics_row, summary_csv, trajectory_csv, METRICS_HEADER, SUMMARY_HEADER};
pub use sweep::{apply_axis, evaluate_axis, run_sweep, sweep_csv, SweepAxis, SweepRow, SWEEP_HEADER};

use crate::baselines::BaselineSpec;
use crate::error::TrainError;
use crate::nn::Checkpoint;
use crate::rl::{evaluate, Algo, BaselineController, EpisodeMetrics, EvalSummary, PolicyController, Trainer};
use crate::scenario::ScenarioConfig;

/// Orbit radius of the comparison policy.
pub const BASELINE_RADIUS: f64 = 300.0;

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub config: PathBuf,
    pub seed: u64,
    pub algo: Algo,
    pub out: PathBuf,
    /// Overrides `episodes` from the config file.
    pub episodes: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub history: Vec<EpisodeMetrics>,
    pub checkpoint: PathBuf,
}

pub fn checkpoint_path(out: &Path, label: &str) -> PathBuf {
    out.join(format!("checkpoint.{label}"))
}

fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), RunError> {
    ck.save(path).map_err(RunError::from)
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainReport, RunError> {
    let mut exp = ExperimentConfig::load(&args.config)?;
    exp.train.seed = args.seed;
    if let Some(e) = args.episodes {
        exp.train.episodes = e;
    }
    output::create_dir(&args.out)?;
    let resolved = format!("# algo = {}\n{}", args.algo, exp.to_toml_string());
    output::write(&args.out.join("config.resolved"), &resolved)?;

    let started = Instant::now();
    let mut trainer = Trainer::new(&exp.scenario, &exp.train, args.algo)?;
    let every = exp.train.checkpoint_every;
    let mut history = Vec::with_capacity(exp.train.episodes);
    while !trainer.is_finished() {
        let before = trainer.episodes_done();
        match trainer.step_update() {
            Ok(batch) => history.extend(batch),
            Err(err @ TrainError::NonFinite { .. }) => {
                let path = checkpoint_path(&args.out, "last_good");
                save_checkpoint(&Checkpoint::new(trainer.params(), &exp.scenario, before), &path)?;
                output::write(&args.out.join("metrics.csv"), &metrics_csv(&history))?;
                return Err(RunError::Diverged { source: err, checkpoint: path });
            }
            Err(err) => return Err(err.into()),
        }
        let done = trainer.episodes_done();
        if every > 0 && done / every > before / every {
            let label = format!("ep{}", done / every * every);
            save_checkpoint(&Checkpoint::new(trainer.params(), &exp.scenario, done), &checkpoint_path(&args.out, &label))?;
        }
        if let Some(m) = history.last() {
            let s = trainer.last_stats();
            info!(
                "episode {} cost {:.3} actor_loss {:.4} critic_loss {:.4} clip {:.3} kl {:.4} elapsed {:.1}s",
                m.episode,
                m.cost,
                s.actor_loss,
                s.critic_loss,
                s.clip_fraction,
                s.approx_kl,
                started.elapsed().as_secs_f64()
            );
        }
    }
    output::write(&args.out.join("metrics.csv"), &metrics_csv(&history))?;
    let path = checkpoint_path(&args.out, "final");
    save_checkpoint(&Checkpoint::new(trainer.params(), &exp.scenario, trainer.episodes_done()), &path)?;
    info!("trained {} episodes in {:.1}s", history.len(), started.elapsed().as_secs_f64());
    Ok(TrainReport { history, checkpoint: path })
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub checkpoint: Option<PathBuf>,
    /// Scenario override; must keep the checkpoint's dimensions.
    pub config: Option<PathBuf>,
    pub episodes: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub baseline: bool,
    /// Sample actions instead of using the actor mean.
    pub stochastic: bool,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalSummary, RunError> {
    let checkpoint = args.checkpoint.as_deref().map(Checkpoint::load).transpose()?;
    let override_scenario = args.config.as_deref().map(ExperimentConfig::load).transpose()?.map(|e| e.scenario);
    let scenario: ScenarioConfig = match (&checkpoint, override_scenario) {
        (Some(ck), Some(sc)) if !args.baseline => {
            if sc.observation_dim() != ck.scenario.observation_dim() {
                return Err(RunError::Usage(format!(
                    "config has {} vehicles but the checkpoint was trained with {}",
                    sc.num_vehicles, ck.scenario.num_vehicles
                )));
            }
            sc
        }
        (_, Some(sc)) => sc,
        (Some(ck), None) => ck.scenario.clone(),
        (None, None) => return Err(RunError::Usage("eval needs --checkpoint or --config".into())),
    };
    if args.episodes == 0 {
        return Err(RunError::Usage("--episodes must be at least 1".into()));
    }
    output::create_dir(&args.out)?;
    let (label, summary) = if args.baseline {
        let mut c = BaselineController::new(BaselineSpec::for_config(&scenario, BASELINE_RADIUS));
        ("random", evaluate(&mut c, &scenario, args.episodes, args.seed)?)
    } else {
        let ck = checkpoint.as_ref().ok_or_else(|| RunError::Usage("policy evaluation needs --checkpoint".into()))?;
        let mut c = PolicyController::new(&ck.params, !args.stochastic);
        ("trained", evaluate(&mut c, &scenario, args.episodes, args.seed)?)
    };
    output::write(&args.out.join("eval_summary.csv"), &summary_csv(label, args.seed, &summary))?;
    output::write(&args.out.join("trajectory.csv"), &trajectory_csv(&summary.trajectory))?;
    info!("{label}: mean cost {:.3} over {} episodes", summary.mean_cost, summary.episodes);
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub config: PathBuf,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub jobs: usize,
    pub episodes: Option<usize>,
    pub eval_episodes: usize,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>, RunError> {
    if args.values.is_empty() {
        return Err(RunError::Usage("--values must list at least one value".into()));
    }
    if args.seeds.is_empty() {
        return Err(RunError::Usage("--seeds must list at least one seed".into()));
    }
    if args.eval_episodes == 0 {
        return Err(RunError::Usage("--eval-episodes must be at least 1".into()));
    }
    let mut exp = ExperimentConfig::load(&args.config)?;
    if let Some(e) = args.episodes {
        exp.train.episodes = e;
    }
    output::create_dir(&args.out)?;
    let rows = run_sweep(&exp, args.axis, &args.values, &args.seeds, args.jobs, args.eval_episodes);
    output::write(&args.out.join("sweep.csv"), &sweep_csv(args.axis, &rows))?;
    let failures = rows.iter().filter(|r| r.result.is_err()).count();
    for r in rows.iter().filter(|r| r.result.is_err()) {
        warn!("leg {}={} seed {} failed: {}", args.axis, r.axis_value, r.seed, r.result.as_ref().unwrap_err());
    }
    if failures > 0 {
        return Err(RunError::SweepFailures(failures));
    }
    Ok(rows)
}
