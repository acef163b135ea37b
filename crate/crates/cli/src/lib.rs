//! Command-line harness for the quaternion pseudoinverse library: solver
//! benchmarks, residual-recurrence checks and the three application runs.
//!
//! Every command writes one CSV (stdout, or `--out`). Exit codes are 0 on
//! success, 1 on runtime failure and 2 on usage errors.

pub mod apps;
pub mod args;
pub mod bench;
pub mod output;
pub mod pool;

use args::Command;
use output::{Outputs, PlotKind};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub(crate) fn io(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<quatpinv::Error> for CliError {
    fn from(e: quatpinv::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs a parsed command without writing anything.
pub fn execute(cmd: &Command) -> Result<Outputs, CliError> {
    match cmd {
        Command::PinvBench(o) => bench::solver_bench(o, bench::PINV_METHODS),
        Command::RspBench(o) => bench::solver_bench(o, bench::RSP_METHODS),
        Command::RecurrenceCheck(o) => bench::recurrence_check(o),
        Command::CurComplete(o) => apps::cur_complete(o),
        Command::Lorenz(o) => apps::lorenz(o),
        Command::Deblur(o) => apps::deblur(o),
    }
}

/// Runs a command and writes its CSV and side files.
pub fn run(cmd: &Command) -> Result<(), CliError> {
    let out = execute(cmd)?;
    let plot = match cmd {
        Command::PinvBench(_) | Command::RspBench(_) => PlotKind::Bench,
        Command::CurComplete(_) | Command::Lorenz(_) => PlotKind::App,
        Command::Deblur(_) | Command::RecurrenceCheck(_) => PlotKind::None,
    };
    out.emit(cmd.opts().out.as_deref(), plot)
}
