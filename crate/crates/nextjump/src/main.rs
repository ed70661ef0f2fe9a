use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nextjump::commands::{self, Command};
use nextjump::config::{PartialConfig, Units};
use nextjump::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "nextjump",
    version,
    about = "Next-jump statistics of a driven three-level atom"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Bright-level occupation after a reset (tau axis)
    Figure2(Opts),
    /// Overdamped dark-period shelving curves (tau' axis)
    Figure3(Opts),
    /// Overdamped occupations in seconds
    Figure4(Opts),
    /// Crossover occupations, numeric only
    Figure5(Opts),
    /// Exact and asymptotic eigenvalues
    Eigen(Opts),
    /// Monte Carlo interval histogram and summary
    Trajectories(Opts),
}

/// Every config key is also a flag; flags override the file.
#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
struct Opts {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    units: Option<String>,
    #[arg(long)]
    grid_start: Option<f64>,
    #[arg(long)]
    grid_stop: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    t0_prime: Option<f64>,
    #[arg(long)]
    t3_threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trajectory ensembles (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

impl Opts {
    fn partial(&self) -> Result<PartialConfig, CliError> {
        let file = match &self.config {
            Some(path) => PartialConfig::load(path)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            omega1: self.omega1,
            omega2: self.omega2,
            beta1: self.beta1,
            beta2: self.beta2,
            units: self.units.as_deref().map(str::parse::<Units>).transpose()?,
            grid_start: self.grid_start,
            grid_stop: self.grid_stop,
            grid_step: self.grid_step,
            seed: self.seed,
            n_traj: self.n_traj,
            horizon: self.horizon,
            t0_prime: self.t0_prime,
            t3_threshold: self.t3_threshold,
            out: self.out.clone(),
        };
        Ok(file.overridden_by(flags))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, opts) = match cli.command {
        Cmd::Figure2(o) => (Command::Figure2, o),
        Cmd::Figure3(o) => (Command::Figure3, o),
        Cmd::Figure4(o) => (Command::Figure4, o),
        Cmd::Figure5(o) => (Command::Figure5, o),
        Cmd::Eigen(o) => (Command::Eigen, o),
        Cmd::Trajectories(o) => (Command::Trajectories, o),
    };
    let cfg = command.resolve(opts.partial()?)?;
    log::info!("{} with {:?}", command.name(), cfg.params);
    let output = commands::run(command, &cfg, opts.threads)?;
    match &cfg.out {
        Some(path) => {
            fs::write(path, &output.body)?;
            if let Some(summary) = &output.summary {
                print!("{summary}");
            }
        }
        None => io::stdout().lock().write_all(output.body.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nextjump: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
