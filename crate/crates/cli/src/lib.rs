//! Experiment runner for the `alphagrad` estimators.
//!
//! ```text
//! alphagrad <estimate|sweep|optimize|landscape> --config <path> [--out <dir>] [--seed <u64>] [--plot <spec.json>]
//! ```
//!
//! Each command reads a JSON [`ExperimentConfig`], writes `<command>.csv`
//! to the output directory and, with `--plot`, `<command>.svg`. Exit codes:
//! 0 on success, 2 for invalid configs or plot specs, 3 when a rollout
//! diverged (partial results are still written). `ALPHAGRAD_THREADS` caps
//! the worker threads; outputs do not depend on it.

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use thiserror::Error;

pub use commands::{run_estimate, run_landscape, run_optimize, run_sweep, Outcome};
pub use config::{Command, ExperimentConfig};
pub use svg::{emit_svg, PlotSpec};
pub use table::{Cell, ResultTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("invalid config{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },
    #[error("invalid plot: {0}")]
    Plot(String),
    #[error("numeric divergence: {0}")]
    Diverged(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Plot(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CommandArg {
    Estimate,
    Sweep,
    Optimize,
    Landscape,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Estimate => Command::Estimate,
            CommandArg::Sweep => Command::Sweep,
            CommandArg::Optimize => Command::Optimize,
            CommandArg::Landscape => Command::Landscape,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "alphagrad", about = "Compare first-, zeroth- and alpha-order policy gradients")]
pub struct Cli {
    pub command: CommandArg,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON plot spec; writes `<command>.svg` next to the CSV.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// Files written by a successful or diverged run.
#[derive(Clone, Debug, PartialEq)]
pub struct Written {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub diverged: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config {
        line: None,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs one command. Nothing is written unless the config and plot spec
/// are valid.
pub fn execute(cli: &Cli) -> Result<Written, CliError> {
    let mut config = ExperimentConfig::parse(&read(&cli.config)?)?;
    let command = Command::from(cli.command);
    if config.command != command {
        return Err(CliError::Config {
            line: None,
            message: format!(
                "config is for `{}` but `{}` was requested",
                config.command.name(),
                command.name()
            ),
        });
    }
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    let plot: Option<PlotSpec> = match &cli.plot {
        Some(p) => Some(serde_json::from_str(&read(p)?).map_err(|e| CliError::Plot(e.to_string()))?),
        None => None,
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let outcome = commands::run(&config)?;
    let svg = plot.map(|spec| emit_svg(&outcome.table, &spec)).transpose()?;

    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let csv = dir.join(format!("{}.csv", command.name()));
    write(&csv, &outcome.table.to_csv()?)?;
    let svg = match svg {
        Some(text) => {
            let path = dir.join(format!("{}.svg", command.name()));
            write(&path, text.as_bytes())?;
            Some(path)
        }
        None => None,
    };
    Ok(Written { csv, svg, diverged: outcome.diverged })
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("ALPHAGRAD_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config {
                line: None,
                message: format!("ALPHAGRAD_THREADS must be a positive integer, got `{v}`"),
            }),
        },
    }
}

/// Runs `cli` under the thread cap and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = thread_cap().and_then(|cap| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cap {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
        pool.install(|| execute(cli))
    });
    match result {
        Ok(w) if w.diverged => {
            eprintln!("a rollout diverged; partial results in {}", w.csv.display());
            3
        }
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
