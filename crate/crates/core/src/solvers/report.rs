use std::time::Duration;

use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::scalar::Real;

pub const CSV_HEADER: &str = "method,m,n,seed,iters,wall_s,e1,e2,e3,e4,final_residual";

/// The four Penrose residuals in Frobenius norm.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Penrose {
    /// `‖XAX − X‖`
    pub e1: f64,
    /// `‖AXA − A‖`
    pub e2: f64,
    /// `‖(XA)ᴴ − XA‖`
    pub e3: f64,
    /// `‖(AX)ᴴ − AX‖`
    pub e4: f64,
}

impl Penrose {
    pub fn max(&self) -> f64 {
        self.e1.max(self.e2).max(self.e3).max(self.e4)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.e1, self.e2, self.e3, self.e4]
    }
}

pub fn penrose_residuals<T: Real>(a: &QMatrix<T>, x: &QMatrix<T>) -> Result<Penrose> {
    if x.shape() != (a.cols(), a.rows()) {
        return Err(Error::dims("penrose_residuals", a.shape(), x.shape()));
    }
    let xa = x.matmul(a)?;
    let ax = a.matmul(x)?;
    let e1 = xa.matmul(x)?.sub(x)?.fro_norm().as_f64();
    let e2 = a.matmul(&xa)?.sub(a)?.fro_norm().as_f64();
    let e3 = xa.hermitian_defect()?.as_f64();
    let e4 = ax.hermitian_defect()?.as_f64();
    Ok(Penrose { e1, e2, e3, e4 })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverReport {
    pub method: String,
    pub shape: (usize, usize),
    pub seed: Option<u64>,
    pub iterations: usize,
    /// `(iteration, monitored residual)`, starting with iteration 0.
    pub residual_history: Vec<(usize, f64)>,
    pub wall_time: Duration,
    pub penrose: Penrose,
    pub converged: bool,
    /// Products among `s × s` residual powers spent in polynomial evaluation.
    pub square_products: usize,
}

impl SolverReport {
    pub(crate) fn new(method: impl Into<String>, shape: (usize, usize), seed: Option<u64>) -> Self {
        Self { method: method.into(), shape, seed, ..Default::default() }
    }

    /// Report for a non-iterative method: zero iterations, the Penrose
    /// residuals of `x`, and `e1` as the final residual.
    pub fn direct<T: Real>(
        method: impl Into<String>,
        a: &QMatrix<T>,
        x: &QMatrix<T>,
        seed: Option<u64>,
        elapsed: Duration,
    ) -> Result<Self> {
        let mut r = Self::new(method, a.shape(), seed);
        r.finish(a, x, elapsed)?;
        r.push(0, r.penrose.e1);
        r.converged = true;
        Ok(r)
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().map_or(f64::NAN, |&(_, r)| r)
    }

    /// One row matching [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let p = &self.penrose;
        format!(
            "{},{},{},{},{},{:.6},{:e},{:e},{:e},{:e},{:e}",
            self.method,
            self.shape.0,
            self.shape.1,
            self.seed.map_or_else(String::new, |s| s.to_string()),
            self.iterations,
            self.wall_time.as_secs_f64(),
            p.e1,
            p.e2,
            p.e3,
            p.e4,
            self.final_residual()
        )
    }

    pub(crate) fn push(&mut self, iteration: usize, residual: f64) {
        self.residual_history.push((iteration, residual));
    }

    pub(crate) fn finish<T: Real>(&mut self, a: &QMatrix<T>, x: &QMatrix<T>, elapsed: Duration) -> Result<()> {
        self.wall_time = elapsed;
        self.penrose = penrose_residuals(a, x)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = QMatrix<f64>;

    #[test]
    fn identity_is_exact() {
        let p = penrose_residuals(&M::identity(3), &M::identity(3)).unwrap();
        assert_eq!(p, Penrose::default());
    }

    #[test]
    fn hand_computed_column() {
        let a = M::from_real(2, 1, &[1.0, 0.0]).unwrap();
        let x = M::zeros(1, 2);
        let p = penrose_residuals(&a, &x).unwrap();
        assert_eq!(p.e2, 1.0);
        assert_eq!((p.e1, p.e3, p.e4), (0.0, 0.0, 0.0));
    }

    #[test]
    fn shape_mismatch() {
        assert!(penrose_residuals(&M::zeros(2, 3), &M::zeros(2, 3)).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let mut r = SolverReport::new("ns", (4, 3), Some(7));
        r.iterations = 2;
        r.push(0, 0.5);
        r.push(2, 1e-9);
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("ns,4,3,7,2,"));
        assert!(row.ends_with("1e-9"));
    }
}
