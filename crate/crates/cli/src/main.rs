mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;

#[derive(Debug, Parser)]
#[command(
    name = "pkslab",
    version,
    about = "Radial Keller-Segel simulations with a point source, a moment blow-up criterion and checks of the estimates behind it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the blow-up criterion on the configured initial profile.
    Criterion(Common),
    /// Run one simulation and write its snapshot table.
    Simulate(Common),
    /// Run the solver over a grid of masses or length scales.
    Sweep(Common),
    /// Scan the interaction kernel against its lower bound.
    VerifyKernel(Common),
    /// Simulate and check the moment inequalities along the trajectory.
    VerifyMoment(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file; every key has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "pkslab-out")]
    out: PathBuf,
    /// Concurrent runs for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override one config key, e.g. `--set grid.cells=1024`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

/// Exit status for a successfully executed verification that found a
/// violation.
const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Criterion(common)
    | Command::Simulate(common)
    | Command::Sweep(common)
    | Command::VerifyKernel(common)
    | Command::VerifyMoment(common)) = &cli.command;

    let config = match Config::load(common.config.as_deref(), &common.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if common.jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(EXIT_CONFIG);
    }

    let out = commands::Output::new(&common.out);
    let result = out.and_then(|out| {
        out.write("resolved.toml", config.to_toml().as_bytes())?;
        match &cli.command {
            Command::Criterion(_) => commands::criterion(&config, &out),
            Command::Simulate(_) => commands::simulate(&config, &out),
            Command::Sweep(_) => commands::sweep(&config, &out, common.jobs),
            Command::VerifyKernel(_) => commands::verify_kernel(&config, &out),
            Command::VerifyMoment(_) => commands::verify_moment(&config, &out),
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
