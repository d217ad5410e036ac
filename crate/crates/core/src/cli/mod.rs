//! The `walkwait` command line.
//!
//! Exit codes: 0 success, 1 parse or validation failure, 2 a modelling
//! assumption was violated, 3 the gated formula disagrees with simulation.

use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::engine::{EngineError, FormulaVariant};
use crate::model::StrategyKind;

pub mod commands;
pub mod config;
pub mod format;

pub use config::{ScenarioConfig, ScenarioFlags};
pub use commands::SweepSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("ValidationError: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("IoError: {0}")]
    Io(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Engine(EngineError::AssumptionViolated { .. }) => 2,
            _ => 1,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "walkwait", version, args_override_self = true, about = "Walk-or-wait bus problem: expected times, simulation, break-even")]
pub struct Cli {
    #[command(flatten)]
    pub flags: ScenarioFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    OriginalExpr,
    OriginalEq4,
    DistanceCorrected,
    FullyCorrected,
}

impl From<VariantArg> for FormulaVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::OriginalExpr => FormulaVariant::OriginalExpr,
            VariantArg::OriginalEq4 => FormulaVariant::OriginalEq4,
            VariantArg::DistanceCorrected => FormulaVariant::DistanceCorrectedOnly,
            VariantArg::FullyCorrected => FormulaVariant::FullyCorrected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    WalkThenWait,
    WaitAtStop1,
    WalkAll,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::WalkThenWait => StrategyKind::WalkThenWait,
            StrategyArg::WaitAtStop1 => StrategyKind::WaitAtStop1,
            StrategyArg::WalkAll => StrategyKind::WalkAll,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Tw,
    D2,
    Vb,
    Vw,
    Tb,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Tw => "tw",
            SweepParam::D2 => "d2",
            SweepParam::Vb => "vb",
            SweepParam::Vw => "vw",
            SweepParam::Tb => "tb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveFor {
    Tw,
    D2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one formula variant for walk-then-wait
    Eval {
        #[arg(long, value_enum, default_value = "fully-corrected")]
        variant: VariantArg,
        #[arg(long)]
        csv: bool,
    },
    /// Compare every formula variant against a Monte Carlo estimate
    Compare {
        /// Variant whose z-score decides the exit code
        #[arg(long, value_enum, default_value = "fully-corrected")]
        gate: VariantArg,
    },
    /// Sweep one parameter over a grid and write a CSV table
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Output CSV path (`-` for stdout)
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the corrected indifference equation
    Breakeven {
        #[arg(long, value_enum, default_value = "tw")]
        solve_for: SolveFor,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
    /// Residual-term diagnostics for a uniform headway
    Residual,
    /// Simulate one strategy
    Simulate {
        #[arg(long, value_enum, default_value = "walk-then-wait")]
        strategy: StrategyArg,
        #[arg(long)]
        csv: bool,
    },
}

/// Runs a parsed command line, writing results to `out`; returns the exit
/// code for successful runs.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let cfg = config::resolve(&cli.flags)?;
    match cli.command {
        Command::Eval { variant, csv } => commands::eval(&cfg, variant.into(), csv, out),
        Command::Compare { gate } => commands::compare(&cfg, gate.into(), out),
        Command::Sweep { param, from, to, steps, out: path } => {
            let spec = commands::SweepSpec::new(param, from, to, steps)?;
            commands::sweep(&cfg, &spec, &path, out)
        }
        Command::Breakeven { solve_for, lo, hi } => commands::breakeven(&cfg, solve_for, lo, hi, out),
        Command::Residual => commands::residual(&cfg, out),
        Command::Simulate { strategy, csv } => commands::simulate(&cfg, strategy.into(), csv, out),
    }
}
