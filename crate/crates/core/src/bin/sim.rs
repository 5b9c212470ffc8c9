use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use coop_landing::harness::{
    audit_log, path_following_run, write_outputs, write_path_outputs, BatchSummary,
};
use coop_landing::hydrostatics::{
    buoyant_mass_capacity, float_check, payload_capacity, FloatBody, SEAWATER_DENSITY,
};
use coop_landing::{load_scenario, run_monte_carlo, run_trial, Execution};

#[derive(Parser)]
#[command(name = "sim", version, about = "UAV-USV cooperative landing simulator")]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// Print debug logging, including phase transitions.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one landing trial.
    Run {
        #[command(flatten)]
        io: ScenarioIo,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Run a Monte Carlo batch of landing trials.
    Montecarlo {
        #[command(flatten)]
        io: ScenarioIo,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Run trials on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Run USV path following over the scenario waypoints.
    Path {
        #[command(flatten)]
        io: ScenarioIo,
    },
    /// Buoyancy and payload calculator.
    Hydro {
        /// Displaced volume, m^3.
        #[arg(long)]
        volume: f64,
        /// Water density, kg/m^3.
        #[arg(long, default_value_t = SEAWATER_DENSITY)]
        density: f64,
        /// Dry mass of the floating body, kg.
        #[arg(long, default_value_t = 0.0)]
        dry_mass: f64,
        /// Payload to check against the capacity, kg.
        #[arg(long)]
        payload: Option<f64>,
    },
}

#[derive(Args)]
struct ScenarioIo {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn print_summary(summary: &BatchSummary) {
    println!(
        "trials {}  touchdown {}  on platform {}  within 0.20 m {}",
        summary.n_trials,
        summary.n_touchdown,
        summary.count_on_platform,
        summary.count_meets_paper_bound
    );
    println!(
        "dx mean {:+.4} std {:.4} max|.| {:.4}   dy mean {:+.4} std {:.4} max|.| {:.4}",
        summary.mean_delta_x,
        summary.std_delta_x,
        summary.max_abs_delta_x,
        summary.mean_delta_y,
        summary.std_delta_y,
        summary.max_abs_delta_y
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { io, seed, trial } => {
            let mut scenario = load_scenario(&io.scenario)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let log = run_trial(&scenario, trial).context("trial failed")?;
            for v in audit_log(&log, &scenario) {
                warn!("trial {trial}: {v}");
            }
            let summary = BatchSummary::from_logs(scenario.seed, std::slice::from_ref(&log));
            let files = write_outputs(std::slice::from_ref(&log), &summary, &io.out)?;
            info!("wrote {} files to {}", files.files.len(), io.out.display());
            match &log.landing {
                Some(o) => println!(
                    "touchdown at t={:.2} s  dx {:+.4} m  dy {:+.4} m  on platform {}  within 0.20 m {}",
                    o.touchdown_time, o.delta_x, o.delta_y, o.on_platform, o.meets_paper_bound
                ),
                None => println!("no touchdown ({:?})", log.termination),
            }
        }
        Command::Montecarlo {
            io,
            trials,
            seed,
            serial,
        } => {
            anyhow::ensure!(trials >= 1, "--trials must be at least 1");
            let mut scenario = load_scenario(&io.scenario)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let execution = if serial {
                Execution::Serial
            } else {
                Execution::Parallel
            };
            let start = Instant::now();
            let (summary, logs) =
                run_monte_carlo(&scenario, trials, execution).context("batch failed")?;
            info!("{trials} trials in {:.2} s", start.elapsed().as_secs_f64());
            for log in &logs {
                for v in audit_log(log, &scenario) {
                    warn!("trial {}: {v}", log.trial_index);
                }
            }
            let files = write_outputs(&logs, &summary, &io.out)?;
            info!("wrote {} files to {}", files.files.len(), io.out.display());
            print_summary(&summary);
        }
        Command::Path { io } => {
            let scenario = load_scenario(&io.scenario)?;
            let run = path_following_run(&scenario).context("path run failed")?;
            for v in audit_log(&run.log, &scenario) {
                warn!("path run: {v}");
            }
            let files = write_path_outputs(&run, &io.out)?;
            info!("wrote {} files to {}", files.files.len(), io.out.display());
            let r = &run.report;
            println!(
                "mission complete {} at {:?} s  converged (|xte| < 0.5 m) at {:?} s  final xte {:+.4} m",
                r.mission_complete, r.mission_complete_time, r.converged_time, r.final_cross_track
            );
        }
        Command::Hydro {
            volume,
            density,
            dry_mass,
            payload,
        } => {
            let capacity = buoyant_mass_capacity(volume, density)?;
            let body = FloatBody::new(volume, dry_mass, density)?;
            println!("buoyant mass capacity: {capacity:.4} kg");
            println!("payload capacity:      {:.4} kg", payload_capacity(&body));
            if let Some(payload) = payload {
                let check = float_check(&body, payload)?;
                println!(
                    "payload {payload:.4} kg: {} (margin {:+.4} kg)",
                    if check.floats { "floats" } else { "sinks" },
                    check.margin
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        "error"
    } else if cli.verbose {
        "debug"
    } else {
        "info"
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
