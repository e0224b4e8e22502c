use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flexedge_core::runner::{self, EvalArgs, RunError, SweepArgs, SweepAxis, TrainArgs};
use flexedge_core::Algo;

/// UAV-aided vehicular edge computing simulator and PPO trainer.
#[derive(Parser, Debug)]
#[command(name = "flexedge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    Ppo,
    A2c,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BaselineArg {
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    Vehicles,
    Bandwidth,
    #[value(name = "task_size")]
    TaskSize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a policy and write metrics, checkpoints and the resolved config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "ppo")]
        algo: AlgoArg,
        #[arg(long)]
        out: PathBuf,
        /// Override the number of training episodes.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Evaluate a checkpoint or the random baseline.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Scenario override; required with --baseline when no checkpoint is given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        baseline: Option<BaselineArg>,
        /// Sample from the policy instead of acting at its mean.
        #[arg(long)]
        stochastic: bool,
    },
    /// Train and evaluate across one scenario axis.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long, default_value_t = 20)]
        eval_episodes: usize,
    },
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Train { config, seed, algo, out, episodes } => {
            let algo = match algo {
                AlgoArg::Ppo => Algo::Ppo,
                AlgoArg::A2c => Algo::A2c,
            };
            let report = runner::cmd_train(&TrainArgs { config, seed, algo, out, episodes })?;
            if let Some(m) = report.history.last() {
                println!("episode {} cost {}", m.episode, m.cost);
            }
            println!("checkpoint {}", report.checkpoint.display());
        }
        Command::Eval { checkpoint, config, episodes, seed, out, baseline, stochastic } => {
            let s = runner::cmd_eval(&EvalArgs {
                checkpoint,
                config,
                episodes,
                seed,
                out,
                baseline: baseline.is_some(),
                stochastic,
            })?;
            println!("mean cost {} (std {}) violation rate {}", s.mean_cost, s.std_cost, s.violation_rate);
        }
        Command::Sweep { config, axis, values, seeds, out, jobs, episodes, eval_episodes } => {
            let axis = match axis {
                AxisArg::Vehicles => SweepAxis::Vehicles,
                AxisArg::Bandwidth => SweepAxis::Bandwidth,
                AxisArg::TaskSize => SweepAxis::TaskSize,
            };
            let rows = runner::cmd_sweep(&SweepArgs { config, axis, values, seeds, out, jobs, episodes, eval_episodes })?;
            println!("{} sweep rows written", rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLEXEDGE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
