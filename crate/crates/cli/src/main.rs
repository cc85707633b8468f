//! `terragait`: batch front end for gait trial analysis.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 numerical or
//! contract failure inside the pipeline.

mod analyze;
mod commands;
mod compare;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use terragait_core::Terrain;

use config::{RunConfig, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(name = "terragait", version, about = "Gait analysis on solid ground and sand")]
struct Cli {
    /// Run config TOML (reference tables, analysis knobs, output directory).
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Override the terrain of every trial or profile.
    #[arg(long, global = true)]
    terrain: Option<Terrain>,
    /// Override the sand depth (cm).
    #[arg(long = "sand-depth", global = true)]
    sand_depth: Option<f64>,
    /// Calibration curve CSV, overriding the config.
    #[arg(long, global = true)]
    calibration: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a sand-layer force ratio curve from `depth_cm,f_surface_n,f_buried_n` samples.
    Calibrate { samples: PathBuf },
    /// Analyse trials given by their metadata TOML files.
    Analyze {
        #[arg(required = true)]
        trials: Vec<PathBuf>,
    },
    /// Paired comparison of two sets of analysed bundles.
    Compare {
        set_a: PathBuf,
        set_b: PathBuf,
        #[arg(long)]
        label_a: Option<String>,
        #[arg(long)]
        label_b: Option<String>,
    },
    /// Generate a synthetic trial with ground truth from a profile TOML
    /// (the default walking profile when omitted).
    Simulate { profile: Option<PathBuf> },
}

/// A failed command and its exit code.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Numerical(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<terragait_core::Error> for Failure {
    fn from(e: terragait_core::Error) -> Self {
        // The display already includes the module and the inner message.
        let err = anyhow::anyhow!("{e}");
        if e.is_input_error() {
            Failure::Input(err)
        } else {
            Failure::Numerical(err)
        }
    }
}

/// Flags shared by every command, merged over the config file.
pub struct Settings {
    pub config: RunConfig,
    pub terrain: Option<Terrain>,
    pub out: PathBuf,
}

fn settings(cli: &Cli) -> anyhow::Result<Settings> {
    let mut config = RunConfig::resolve(cli.config.as_deref())?;
    if let Some(c) = &cli.calibration {
        config.calibration = Some(c.clone());
    }
    if let Some(d) = cli.sand_depth {
        config.sand_depth_cm = Some(d);
    }
    config.validate()?;
    let out = cli
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("terragait_out"));
    Ok(Settings {
        config,
        terrain: cli.terrain,
        out,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let s = settings(&cli)?;
    match cli.command {
        Command::Calibrate { samples } => commands::calibrate(&samples, &s),
        Command::Analyze { trials } => analyze::run(&trials, &s),
        Command::Compare {
            set_a,
            set_b,
            label_a,
            label_b,
        } => compare::run(&set_a, &set_b, label_a, label_b, &s),
        Command::Simulate { profile } => commands::simulate(profile.as_deref(), &s),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (Failure::Input(e) | Failure::Numerical(e)) = f;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
