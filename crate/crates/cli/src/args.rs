use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use quatpinv::solvers::Schedule;

#[derive(Debug, Parser)]
#[command(name = "quatpinv", version, about = "Quaternion pseudoinverse benchmarks and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every pseudoinverse method on random (n+20)×n matrices.
    PinvBench(Opts),
    /// Sketch-and-project and hybrid solvers on random (n+20)×n matrices.
    RspBench(Opts),
    /// Impute–reconstruct CUR completion with a residual history per round.
    CurComplete(Opts),
    /// Lorenz-attractor filter identification with Newton–Schulz.
    Lorenz(Opts),
    /// FFT deblurring with per-frequency Newton–Schulz against the closed form.
    Deblur(Opts),
    /// Deviation between computed residuals and their closed recurrences.
    RecurrenceCheck(Opts),
}

impl Command {
    pub fn opts(&self) -> &Opts {
        match self {
            Command::PinvBench(o)
            | Command::RspBench(o)
            | Command::CurComplete(o)
            | Command::Lorenz(o)
            | Command::Deblur(o)
            | Command::RecurrenceCheck(o) => o,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::PinvBench(_) => "pinv-bench",
            Command::RspBench(_) => "rsp-bench",
            Command::CurComplete(_) => "cur-complete",
            Command::Lorenz(_) => "lorenz",
            Command::Deblur(_) => "deblur",
            Command::RecurrenceCheck(_) => "recurrence-check",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Problem sizes, comma separated (meaning depends on the command).
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub sizes: Option<Vec<usize>>,
    /// RNG seeds, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0")]
    pub seeds: Vec<u64>,
    /// Methods to run, comma separated (command specific).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub method: Option<Vec<String>>,
    /// Damping γ for Newton–Schulz.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Hyperpower order p.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Neumann polynomial schedule: naive, binary-pow2 or paterson-stockmeyer.
    #[arg(long, default_value = "naive")]
    pub schedule: Schedule,
    /// Stopping tolerance; 0 runs exactly --maxit iterations.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap (rounds for cur-complete, cycles for the hybrid).
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Sketch block size r.
    #[arg(long, default_value_t = 8)]
    pub block_r: usize,
    /// Test-sketch width s.
    #[arg(long, default_value_t = 8)]
    pub test_s: usize,
    /// RSP steps per hybrid cycle.
    #[arg(long = "cycle-T", default_value_t = 5)]
    pub cycle_t: usize,
    /// Tikhonov weights λ, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.02,0.05")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub psf_radius: usize,
    #[arg(long, default_value_t = 1.0)]
    pub psf_sigma: f64,
    #[arg(long, default_value_t = 40.0)]
    pub snr_db: f64,
    /// Target rank for cur-complete.
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
    /// Fraction of entries removed for cur-complete.
    #[arg(long, default_value_t = 0.7)]
    pub missing: f64,
    /// Gaussian smoothing σ applied after every completion round.
    #[arg(long)]
    pub smooth_sigma: Option<f64>,
    /// Pseudoinverse used inside CUR: ns, normal-eq or qsvd.
    #[arg(long, default_value = "ns")]
    pub pinv: String,
    /// Relative channel noise for the Lorenz input.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// PPM image used instead of the synthetic one (deblur, cur-complete).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output CSV; history, gnuplot and PPM files are written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
