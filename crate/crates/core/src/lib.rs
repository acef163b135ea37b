//! Quaternion-native dense linear algebra with iterative Moore–Penrose
//! pseudoinverse solvers.
//!
//! All numerical code is generic over the real scalar (`f32` or `f64`, see
//! [`Real`]); the aliases at the crate root fix it to `f64`, which is what the
//! solvers, applications, and the CLI use.
//!
//! ```
//! use quatpinv::{QMat, solvers::{ns_damped, SolverConfig}};
//!
//! let a = QMat::randn(12, 8, 7);
//! let (x, report) = ns_damped(&a, &SolverConfig::default()).unwrap();
//! assert!(report.converged);
//! assert_eq!((x.rows(), x.cols()), (8, 12));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod apps;
pub mod error;
pub mod factor;
pub mod io;
pub mod qmat;
pub mod quaternion;
pub mod rng;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use qmat::{ComplexMatrix, Mask, QMatrix};
pub use quaternion::Quaternion;
pub use scalar::Real;

/// Double-precision quaternion.
pub type Quat = Quaternion<f64>;
/// Double-precision quaternion matrix.
pub type QMat = QMatrix<f64>;
/// Double-precision complex matrix (adjoint embedding).
pub type CMat = ComplexMatrix<f64>;

/// Single-precision quaternion.
pub type Quat32 = Quaternion<f32>;
/// Single-precision quaternion matrix.
pub type QMat32 = QMatrix<f32>;
