//! Iterative Moore–Penrose solvers.
//!
//! Shapes follow one convention throughout: `A` is `m × n`, `X` is `n × m`,
//! `F = I_n − XA` is the right residual (driven to zero when `m ≥ n`) and
//! `E = I_m − AX` is the left residual (driven to zero when `m < n`).

mod cgne;
mod config;
mod hybrid;
mod ns;
mod poly;
mod report;
mod rsp;
mod trace;

pub use cgne::cgne_q;
pub use config::{Alpha, PinvPath, Schedule, SketchConfig, Side, SolverConfig};
pub use hybrid::hybrid_rsp_ns;
pub use ns::{ns_damped, ns_hyperpower};
pub use poly::{eval_neumann_poly, eval_neumann_poly_counted, PolySide};
pub use report::{penrose_residuals, Penrose, SolverReport, CSV_HEADER};
pub use rsp::{rsp_column, rsp_rate_check, rsp_row, RateCheck, RspColumn, RspRow};
pub use trace::{hyperpower_recurrence_trace, ns_recurrence_trace};

use crate::qmat::QMatrix;
use crate::scalar::Real;

/// Seed for the power method behind auto-α; fixed so solvers stay deterministic.
pub(crate) const NORM_EST_SEED: u64 = 0x9e37_79b9_7f4a_7c15;
pub(crate) const NORM_EST_ITERS: usize = 20;

/// `0.99 / est(‖A‖₂)²`, strictly inside `(0, 2/‖A‖₂²)`.
pub(crate) fn spectral_alpha<T: Real>(a: &QMatrix<T>) -> T {
    let est = a.op_norm_est(NORM_EST_ITERS, NORM_EST_SEED);
    if est > T::zero() {
        T::lit(0.99) / (est * est)
    } else {
        T::one()
    }
}

/// `1 / ‖A‖_F²`, the cheap start used by the sketching solvers.
pub(crate) fn frobenius_alpha<T: Real>(a: &QMatrix<T>) -> T {
    let f = a.fro_norm_sqr();
    if f > T::zero() {
        T::one() / f
    } else {
        T::one()
    }
}

/// Tracks the residual sequence and flags sustained growth.
pub(crate) struct DivergenceGuard {
    initial: f64,
    streak: usize,
}

impl DivergenceGuard {
    const FACTOR: f64 = 10.0;
    const PATIENCE: usize = 5;

    pub(crate) fn new(initial: f64) -> Self {
        Self { initial, streak: 0 }
    }

    pub(crate) fn check(&mut self, iteration: usize, residual: f64) -> crate::Result<()> {
        if !residual.is_finite() {
            return Err(crate::Error::Divergence { iteration, residual });
        }
        if residual >= Self::FACTOR * self.initial && self.initial > 0.0 {
            self.streak += 1;
            if self.streak >= Self::PATIENCE {
                return Err(crate::Error::Divergence { iteration, residual });
            }
        } else {
            self.streak = 0;
        }
        Ok(())
    }
}
