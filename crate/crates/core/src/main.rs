//! Command-line front end: simulate one policy, train the learned
//! balancer, compare policy bundles, or convert raw traces into the
//! canonical requests format.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use scalesim::harness::{
    compare_policies, load_config, run_scenario, trace_convert, train_command, HarnessError,
    RunOptions,
};

#[derive(Parser)]
#[command(name = "scalesim", version, about = "Deterministic cluster-scaling simulator")]
struct Cli {
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write a per-request event log.
    #[arg(long, global = true)]
    event_log: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario config (JSON).
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the first policy bundle and write metrics, summary, manifest.
    Simulate(ConfigArg),
    /// Train the learned balancer and checkpoint the best episode.
    Train(ConfigArg),
    /// Run every policy bundle on one workload and write comparison tables and charts.
    Compare(ConfigArg),
    /// Convert a raw resource trace CSV into a requests JSON file.
    TraceConvert {
        /// Input trace CSV with header timestamp_s,cpu_request,duration_s.
        input: PathBuf,
        /// Output requests JSON path.
        output: PathBuf,
        /// Multiplier applied to each request's cost.
        #[arg(long, default_value_t = 1.0)]
        cost_scale: f64,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let opts = RunOptions {
        seed_override: cli.seed,
        out_override: cli.out,
        event_log: cli.event_log,
    };
    match cli.command {
        Command::Simulate(cfg) => {
            let loaded = load_config(&cfg.config)?;
            let artifacts = run_scenario(&loaded, &opts)?;
            println!(
                "simulated policy {}: completed {}, rejected {}, rt_mean {:.4}s, artifacts in {}",
                artifacts.summary.policy,
                artifacts.summary.completed,
                artifacts.summary.rejected,
                artifacts.summary.overall_rt_mean(),
                artifacts.out_dir.display()
            );
        }
        Command::Train(cfg) => {
            let loaded = load_config(&cfg.config)?;
            let artifacts = train_command(&loaded, &opts)?;
            let reward_note = match (artifacts.episode_rewards.first(), artifacts.episode_rewards.last()) {
                (Some(first), Some(last)) => {
                    format!("episode reward {first:.4} -> {last:.4}")
                }
                _ => "no episodes requested".to_string(),
            };
            println!(
                "trained {} episode(s), {}; checkpoint at {}",
                artifacts.episode_rewards.len(),
                reward_note,
                artifacts.checkpoint.display()
            );
        }
        Command::Compare(cfg) => {
            let loaded = load_config(&cfg.config)?;
            let artifacts = compare_policies(&loaded, &opts)?;
            println!(
                "compared {} policies; tables and {} charts in {}",
                artifacts.summaries.len(),
                artifacts.chart_paths.len(),
                artifacts.out_dir.display()
            );
        }
        Command::TraceConvert { input, output, cost_scale } => {
            let (kept, malformed) = trace_convert(&input, &output, cost_scale)?;
            println!(
                "converted {kept} request(s) ({malformed} malformed row(s) skipped) into {}",
                output.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            // clap renders help to stdout and errors to stderr
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Validation(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e @ HarnessError::Runtime(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
