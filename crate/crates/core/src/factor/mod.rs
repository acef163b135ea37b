//! Direct factorizations: oracles and micro-solvers for the iterative methods.

mod hpd;
mod pinv;
mod qr;
mod svd;

pub use hpd::{hpd_solve, Cholesky, DEFAULT_RIDGE};
pub use pinv::{pinv_normal_eq, pinv_qsvd, DEFAULT_RANK_TOL};
pub use qr::{solve_upper, thin_qr, QrFactors};
pub use svd::{jacobi_svd, qsvd, ComplexSvd, QsvdFactors, MAX_JACOBI_SWEEPS};
