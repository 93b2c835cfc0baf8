use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entangle_cli::config::PRESETS;
use entangle_cli::{load_scenario, load_schedule, resolve_out_dir, run_optimize, run_simulate, Overrides, OUT_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "entangle",
    version,
    about = "Time-optimal bang-bang control for two-qubit entanglement"
)]
struct Cli {
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    n_steps: Option<usize>,
    /// Fixed final time; replaces any search range.
    #[arg(long)]
    tf: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a fixed control schedule.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Schedule file (TOML).
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Solve for the optimal bang-bang schedule.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Built-in scenarios.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
}

fn load(common: &Common) -> anyhow::Result<(entangle_cli::ScenarioConfig, PathBuf)> {
    let mut cfg = load_scenario(&common.config)?;
    cfg.apply_overrides(&Overrides {
        n_steps: common.n_steps,
        tf: common.tf,
        gamma: common.gamma,
    })?;
    let out_dir = resolve_out_dir(common.out_dir.clone(), &cfg);
    Ok((cfg, out_dir))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Presets {
            action: PresetAction::List,
        } => {
            for (name, description) in PRESETS {
                println!("{name}\t{description}");
            }
        }
        Command::Simulate { common, schedule } => {
            let (cfg, out_dir) = load(&common)?;
            let sched = load_schedule(&schedule)?;
            let outcome = run_simulate(&cfg, &sched, &out_dir)?;
            log::info!(
                "wrote {} and {}",
                outcome.files.timeseries.display(),
                outcome.files.summary.display()
            );
        }
        Command::Optimize { common } => {
            let (cfg, out_dir) = load(&common)?;
            let outcome = run_optimize(&cfg, &out_dir)?;
            let s = &outcome.solution;
            log::info!(
                "tf = {:.6}, C = {:.9}, J = {:.9}, {} sweeps ({})",
                s.tf,
                s.concurrence_final,
                s.objective,
                s.sweeps_used,
                s.termination.as_str()
            );
            if !s.converged {
                log::warn!("sweep limit reached before the schedule settled");
            }
            log::info!(
                "wrote {} and {}",
                outcome.files.timeseries.display(),
                outcome.files.summary.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
