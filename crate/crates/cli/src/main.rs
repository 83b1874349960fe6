use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use pa2d::harness::{cli_eval, cli_report, cli_train, frontier_export, ExperimentConfig};
use pa2d::momdp::EnvConfig;

#[derive(Parser)]
#[command(name = "pa2d", version, about = "Multi-objective policy training and frontier analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one run directory per seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Train only this seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        /// Dotted-path override such as `evolution.M=2`; repeatable.
        #[arg(long = "override", short = 'o', value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Evaluate a checkpoint with the deterministic policy.
    Eval(EvalArgs),
    /// Summarize run directories by method.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Directory for the summary, curve and scatter CSV files.
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// Re-score a frontier document and flatten it to CSV.
    FrontierExport {
        frontier: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Take the environment from an experiment config.
    #[arg(long, conflicts_with = "env")]
    config: Option<PathBuf>,
    /// Environment name with default parameters.
    #[arg(long)]
    env: Option<String>,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 8)]
    episodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-episode CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn eval(args: EvalArgs) -> Result<()> {
    let env = match (&args.config, &args.env) {
        (Some(path), _) => ExperimentConfig::load(path, &[])?.build_env()?,
        (None, Some(name)) => EnvConfig::by_name(name)?.build(args.gamma)?,
        (None, None) => bail!("eval needs --config or --env"),
    };
    let ev = cli_eval(&args.checkpoint, env.as_ref(), args.episodes, args.seed, args.out.as_deref())?;
    println!("{}", ev.mean);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            seed,
            overrides,
        } => {
            for run in cli_train(&config, seed, &overrides)? {
                let sp = run
                    .final_metrics
                    .sp
                    .map_or_else(|| "undefined".to_string(), |v| format!("{v:.6e}"));
                println!(
                    "seed {} hv {:.6} sp {sp} archive {} -> {}",
                    run.seed,
                    run.final_metrics.hv,
                    run.final_metrics.archive_size,
                    run.dir.display()
                );
            }
        }
        Command::Eval(args) => eval(args)?,
        Command::Report { runs, out } => {
            let report = cli_report(&runs, &out)?;
            print!("{}", report.table());
        }
        Command::FrontierExport { frontier, out } => {
            let s = frontier_export(&frontier, &out)?;
            let sp = s.sp.map_or_else(|| "undefined".to_string(), |v| v.to_string());
            println!("entries {} hv {} sp {sp}", s.entries, s.hv);
        }
    }
    Ok(())
}
