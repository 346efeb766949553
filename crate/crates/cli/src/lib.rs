//! Command-line front end: config handling, subcommands and artifact output.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] soc_sta::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scan incomplete: {0}")]
    Scan(String),
    #[error("validation failed for criteria {0}")]
    Validation(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for bad input or an infeasible request, 2 for numerical trouble.
    pub fn exit_code(&self) -> u8 {
        use soc_sta::Error as E;
        match self {
            CliError::Core(E::NumericalFailure { .. } | E::Accuracy { .. }) => 2,
            CliError::Scan(_) | CliError::Validation(_) => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "soc-sta",
    version,
    about = "Design and test shortcut pulses for spin-orbit-coupled atoms in a Morse trap"
)]
pub struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Seed for stochastic runs (overrides noise.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override a single config key, e.g. --set transfer.alpha=1.2.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Twolevel,
    Grid,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Twolevel => "twolevel",
            Engine::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKind {
    Systematic,
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print trap levels, matrix elements and the gap.
    Inspect,
    /// Design the pulse schedule and write it to schedule.csv.
    Design,
    /// Propagate the designed schedule.
    Simulate {
        #[arg(long, value_enum, default_value = "twolevel")]
        engine: Engine,
    },
    /// Fidelity against systematic error or dephasing noise.
    Scan {
        #[arg(value_enum)]
        kind: ScanKind,
        #[arg(long, value_enum, default_value = "twolevel")]
        engine: Engine,
    },
    /// Regenerate the data behind one of the standard figures.
    Reproduce {
        #[arg(long, value_enum)]
        figure: Figure,
    },
    /// Run the acceptance checks.
    Validate {
        #[arg(long)]
        criterion: Option<u8>,
    },
}

/// Assemble the run configuration: defaults, then file, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| soc_sta::Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<output::ResultManifest, CliError> {
    let ctx = commands::Context::new(resolve_config(&cli)?);
    match cli.command {
        Command::Inspect => commands::inspect(&ctx),
        Command::Design => commands::design_cmd(&ctx),
        Command::Simulate { engine } => commands::simulate(&ctx, engine),
        Command::Scan { kind, engine } => commands::scan(&ctx, kind, engine),
        Command::Reproduce { figure } => commands::reproduce(&ctx, figure),
        Command::Validate { criterion } => commands::validate(&ctx, criterion),
    }
}
