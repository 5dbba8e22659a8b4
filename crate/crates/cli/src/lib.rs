//! Command-line front end for opinion-lab: runs scenarios and presets,
//! writes trajectories, densities and distance series, and compares runs.
//!
//! Results only ever go to files under `--out`; standard output carries
//! progress notes.

pub mod compare;
pub mod manifest;
pub mod run;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opinion_lab::meanfield::MeanFieldError;
use opinion_lab::micro::EngineError;
use opinion_lab::scenarios::{preset, preset_names, EngineKind, ScenarioError};
use thiserror::Error;

pub use compare::{compare_runs, CompareReport};
pub use manifest::RunManifest;
pub use run::{run, RunOptions, Source};
pub use table::Format;

pub const THREADS_ENV: &str = "OPINION_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Data { path: PathBuf, message: String },
    #[error("runs are not comparable: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for numerical failures during integration, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario(ScenarioError::Engine(EngineError::DegenerateNeighborhood {
                ..
            }))
            | CliError::Scenario(ScenarioError::MeanField(
                MeanFieldError::Cfl { .. }
                | MeanFieldError::DegenerateDenominator { .. }
                | MeanFieldError::MassDrift { .. }
                | MeanFieldError::Negative { .. },
            )) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "opinion-lab",
    version,
    about = "Multi-population opinion dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file or a named preset.
    Run(RunArgs),
    /// Per-step W1 between the populations of two finished runs.
    Compare(CompareArgs),
    /// List or export the built-in presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Micro,
    Meanfield,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario TOML file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Overrides the scenario seed (which defaults to 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario engine.
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    #[arg(long, default_value = "comparison")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    /// Print the preset names.
    List,
    /// Write every preset as `<name>.toml` into a directory.
    Export {
        #[arg(long, default_value = "presets")]
        out: PathBuf,
    },
}

impl RunArgs {
    pub fn options(&self) -> RunOptions {
        let source = match (&self.scenario, &self.preset) {
            (Some(path), _) => Source::File(path.clone()),
            (None, Some(name)) => Source::Preset(name.clone()),
            (None, None) => unreachable!("clap requires a scenario or a preset"),
        };
        RunOptions {
            source,
            seed: self.seed,
            engine: self.engine.map(|e| match e {
                EngineArg::Micro => EngineKind::Micro,
                EngineArg::Meanfield => EngineKind::Meanfield,
            }),
            out: self.out.clone(),
            format: self.format,
        }
    }
}

/// Caps the rayon pool from `OPINION_LAB_THREADS` when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => {
            let manifest = run(&args.options())?;
            println!("run complete: {}", args.out.display());
            for f in &manifest.files {
                println!("  {}", f.path);
            }
        }
        Command::Compare(args) => {
            let report = compare_runs(&args.run_a, &args.run_b)?;
            compare::write_report(&report, &args.out, args.format)?;
            println!("comparison written to {}", args.out.display());
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for name in preset_names() {
                    println!("{name}");
                }
            }
            PresetAction::Export { out } => {
                std::fs::create_dir_all(out).map_err(|source| CliError::Io {
                    path: out.clone(),
                    source,
                })?;
                for name in preset_names() {
                    let text = preset(name)?.to_toml();
                    table::write_atomic(&out.join(format!("{name}.toml")), text.as_bytes())?;
                }
                println!("presets exported to {}", out.display());
            }
        },
    }
    Ok(())
}
