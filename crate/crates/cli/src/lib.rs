// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: model files in, deterministic reports out.

pub mod commands;
pub mod model;
pub mod plot;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use chiralwalk_core::Sign;
use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{CliError, Outcome};
pub use model::{load_model, parse_model, LoadedModel, ModelError, ModelKind};
pub use report::ReportEnvelope;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const IO: i32 = 3;
    pub const NOT_FREDHOLM: i32 = 4;
    pub const ZERO_INDEX: i32 = 5;
    pub const WINDOW: i32 = 6;
    pub const VERIFY_FAILED: i32 = 7;
}

#[derive(Debug, Parser)]
#[command(name = "chiralwalk", version, about = "Indices, essential spectra and protected eigenstates of split-step walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fredholm indices of U ∓ 1, or of a strictly local operator.
    Index {
        model: PathBuf,
        #[arg(long, env = "CHIRALWALK_SAMPLES", default_value_t = commands::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Essential spectrum as real-part bands and arcs on the unit circle.
    Spectrum {
        model: PathBuf,
        #[arg(long, env = "CHIRALWALK_SAMPLES", default_value_t = commands::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Symmetry-protected eigenstate of U at eigenvalue ±1 on [-W, W].
    Eigenstate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = SignArg::Plus)]
        sign: SignArg,
        #[arg(long, default_value_t = commands::DEFAULT_WINDOW)]
        window: i64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Runs the invariant and oracle checks on the model.
    Verify {
        model: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_ORACLE_CELLS)]
        oracle_cells: usize,
        #[arg(long, env = "CHIRALWALK_SAMPLES", default_value_t = commands::DEFAULT_SAMPLES)]
        samples: usize,
    },
}

impl Command {
    pub fn model_path(&self) -> &Path {
        match self {
            Command::Index { model, .. }
            | Command::Spectrum { model, .. }
            | Command::Eigenstate { model, .. }
            | Command::Verify { model, .. } => model,
        }
    }
}

/// Loads the model and runs the command, without touching the filesystem
/// beyond reading the model.
pub fn run(command: &Command) -> Result<Outcome, CliError> {
    let model = load_model(command.model_path())?;
    match command {
        Command::Index { samples, .. } => commands::index(&model, *samples),
        Command::Spectrum { samples, .. } => commands::spectrum(&model, *samples),
        Command::Eigenstate { sign, window, .. } => commands::eigenstate(&model, (*sign).into(), *window),
        Command::Verify { oracle_cells, samples, .. } => commands::verify(&model, *oracle_cells, *samples),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Output { path: path.display().to_string(), source })
}

/// Runs the command, writes requested files and the report, and returns the
/// process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = run(&cli.command).and_then(|outcome| {
        let (csv_path, svg_path) = match &cli.command {
            Command::Spectrum { csv, svg, .. } => (csv.as_deref(), svg.as_deref()),
            Command::Eigenstate { csv, .. } => (csv.as_deref(), None),
            _ => (None, None),
        };
        if let Some(path) = csv_path {
            write_file(path, outcome.csv.as_deref().unwrap_or_default())?;
        }
        if let Some(path) = svg_path {
            match &outcome.svg {
                Some(svg) => write_file(path, svg)?,
                None => eprintln!("warning: no arcs to draw for this model; {} not written", path.display()),
            }
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(outcome.report.to_json().as_bytes()).and_then(|_| out.flush()).is_err() {
                return exit::IO;
            }
            if outcome.exit_code != exit::OK {
                eprintln!("error: {}", exit_reason(outcome.exit_code));
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn exit_reason(code: i32) -> &'static str {
    match code {
        exit::NOT_FREDHOLM => "operator is not Fredholm (±1 lies in the essential spectrum)",
        exit::WINDOW => "window too small: the state leaks mass at the window edges",
        exit::VERIFY_FAILED => "one or more checks failed",
        _ => "command failed",
    }
}
