use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Scaling of the start `X₀ = α Aᴴ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    /// Solver default: spectral for NS, hyperpower and CGNE; `1/‖A‖_F²` for
    /// the sketching solvers.
    Auto,
    Fixed(f64),
}

/// Evaluation schedule for `Σ_{i<p} Rⁱ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Naive,
    BinaryPow2,
    PatersonStockmeyer,
}

/// Which identity the iteration enforces. `Right` drives `XA → I_n` (tall),
/// `Left` drives `AX → I_m` (wide); `Auto` picks `Right` iff `m ≥ n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Auto,
    Left,
    Right,
}

impl Side {
    pub(crate) fn resolve(self, m: usize, n: usize) -> Side {
        match self {
            Side::Auto if m >= n => Side::Right,
            Side::Auto => Side::Left,
            s => s,
        }
    }
}

/// How the sketched pseudoinverse `Y†` is built in the column RSP step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinvPath {
    ThinQr,
    Gram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub alpha: Alpha,
    pub gamma: f64,
    pub order: usize,
    pub schedule: Schedule,
    /// `0` disables the residual test and runs exactly `maxit` iterations.
    pub tol: f64,
    pub maxit: usize,
    pub side: Side,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: Alpha::Auto,
            gamma: 1.0,
            order: 2,
            schedule: Schedule::Naive,
            tol: 1e-8,
            maxit: 200,
            side: Side::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if self.order < 2 {
            return Err(Error::InvalidConfig(format!("order must be at least 2, got {}", self.order)));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be nonnegative, got {}", self.tol)));
        }
        if let Alpha::Fixed(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidConfig(format!("alpha must be positive, got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SketchConfig {
    pub block_r: usize,
    pub test_s: usize,
    pub cycle_t: usize,
    pub seed: u64,
    /// Relaxation `γ ∈ (0, 2)` of the projection step.
    pub relaxation: f64,
    pub path: PinvPath,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self { block_r: 8, test_s: 8, cycle_t: 5, seed: 0, relaxation: 1.0, path: PinvPath::ThinQr }
    }
}

impl SketchConfig {
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.block_r == 0 || self.block_r > m.min(n) {
            return Err(Error::InvalidConfig(format!(
                "block size {} must lie in 1..={}",
                self.block_r,
                m.min(n)
            )));
        }
        if self.test_s == 0 {
            return Err(Error::InvalidConfig("test sketch width must be at least 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidConfig(format!("relaxation must lie in (0, 2), got {}", self.relaxation)));
        }
        Ok(())
    }
}

impl FromStr for Schedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "naive" => Ok(Schedule::Naive),
            "binarypow2" | "binary" | "pow2" => Ok(Schedule::BinaryPow2),
            "patersonstockmeyer" | "ps" => Ok(Schedule::PatersonStockmeyer),
            _ => Err(Error::Parse(format!("unknown schedule '{s}'"))),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Naive => "naive",
            Schedule::BinaryPow2 => "binary-pow2",
            Schedule::PatersonStockmeyer => "paterson-stockmeyer",
        })
    }
}

impl FromStr for PinvPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qr" | "thin-qr" => Ok(PinvPath::ThinQr),
            "gram" | "spd" | "hpd" => Ok(PinvPath::Gram),
            _ => Err(Error::Parse(format!("unknown pseudoinverse path '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { gamma: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { gamma: 1.5, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { order: 1, ..Default::default() }.validate().is_err());
        assert!(SketchConfig::default().validate(10, 10).is_ok());
        assert!(SketchConfig { block_r: 11, ..Default::default() }.validate(20, 10).is_err());
        assert!(SketchConfig { relaxation: 2.0, ..Default::default() }.validate(20, 10).is_err());
    }

    #[test]
    fn parse_schedules() {
        assert_eq!("binary-pow2".parse::<Schedule>().unwrap(), Schedule::BinaryPow2);
        assert_eq!("PS".parse::<Schedule>().unwrap(), Schedule::PatersonStockmeyer);
        assert!("horner".parse::<Schedule>().is_err());
        for s in [Schedule::Naive, Schedule::BinaryPow2, Schedule::PatersonStockmeyer] {
            assert_eq!(s.to_string().parse::<Schedule>().unwrap(), s);
        }
    }

    #[test]
    fn side_resolution() {
        assert_eq!(Side::Auto.resolve(5, 3), Side::Right);
        assert_eq!(Side::Auto.resolve(3, 3), Side::Right);
        assert_eq!(Side::Auto.resolve(3, 5), Side::Left);
        assert_eq!(Side::Left.resolve(5, 3), Side::Left);
    }
}
