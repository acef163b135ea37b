use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("division by a zero quaternion")]
    DivisionByZero,
    #[error("input does not have quaternion adjoint-block structure: {0}")]
    StructureViolation(String),
    #[error("matrix is numerically rank deficient (pivot {pivot:e} at column {column})")]
    RankDeficient { column: usize, pivot: f64 },
    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive definite")]
    Indefinite,
    #[error("{what} did not converge after {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },
    #[error("iteration diverged at step {iteration} (residual {residual:e})")]
    Divergence { iteration: usize, residual: f64 },
    #[error("could not draw a full-rank sketch after {0} attempts")]
    SketchFailure(usize),
    #[error("CGNE breakdown at iteration {0}: search direction has zero image")]
    Breakdown(usize),
    #[error("invalid polynomial order {order} for schedule {schedule}")]
    InvalidOrder { order: usize, schedule: &'static str },
    #[error("transform length {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch { op, left, right }
    }
}
