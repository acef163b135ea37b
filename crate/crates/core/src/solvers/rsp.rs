//! Randomized sketch-and-project (block Kaczmarz) for `XA = I_n` and `AX = I_m`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::factor::{hpd_solve, pinv_qsvd, qsvd, thin_qr, DEFAULT_RANK_TOL, DEFAULT_RIDGE};
use crate::qmat::QMatrix;
use crate::rng::GaussianStream;
use crate::scalar::Real;
use crate::solvers::config::{Alpha, PinvPath, SketchConfig, SolverConfig};
use crate::solvers::frobenius_alpha;
use crate::solvers::report::SolverReport;

/// Attempts at drawing a usable sketch before giving up.
pub const MAX_REDRAWS: usize = 10;

/// Column-variant stepper: projects `X` onto `{X : X A Ω = Ω}` for fresh
/// Gaussian `Ω ∈ ℍ^{n×r}`.
pub struct RspColumn<'a, T> {
    a: &'a QMatrix<T>,
    x: QMatrix<T>,
    gamma: T,
    block_r: usize,
    path: PinvPath,
    stream: GaussianStream,
}

impl<'a, T: Real> RspColumn<'a, T> {
    pub fn new(a: &'a QMatrix<T>, x0: QMatrix<T>, sk: &SketchConfig, stream: GaussianStream) -> Self {
        Self { a, x: x0, gamma: T::lit(sk.relaxation), block_r: sk.block_r, path: sk.path, stream }
    }

    pub fn x(&self) -> &QMatrix<T> {
        &self.x
    }

    pub fn set_x(&mut self, x: QMatrix<T>) {
        self.x = x;
    }

    pub fn into_x(self) -> QMatrix<T> {
        self.x
    }

    /// One step with a freshly drawn sketch; rank-deficient draws are redrawn.
    pub fn step(&mut self) -> Result<()> {
        let n = self.a.cols();
        for _ in 0..MAX_REDRAWS {
            let omega = QMatrix::randn_from(n, self.block_r, &mut self.stream);
            match self.step_with_sketch(&omega) {
                Err(Error::RankDeficient { .. }) | Err(Error::Indefinite) => continue,
                other => return other,
            }
        }
        Err(Error::SketchFailure(MAX_REDRAWS))
    }

    /// `X ← X + γ(Ω − XY)Y†` with `Y = AΩ`.
    pub fn step_with_sketch(&mut self, omega: &QMatrix<T>) -> Result<()> {
        let y = self.a.matmul(omega)?;
        let y_pinv = match self.path {
            PinvPath::ThinQr => thin_qr(&y)?.pinv()?,
            PinvPath::Gram => {
                let yh = y.adjoint();
                hpd_solve(&yh.matmul(&y)?, &yh, T::lit(DEFAULT_RIDGE))?
            }
        };
        let resid = omega.sub(&self.x.matmul(&y)?)?;
        self.x.axpy(self.gamma, &resid.matmul(&y_pinv)?)
    }
}

/// Row-variant stepper: projects `X` onto `{X : SᴴAX = Sᴴ}` for fresh
/// Gaussian `S ∈ ℍ^{m×r}`, solving `(ZZᴴ)W = Sᴴ − ZX` with `Z = SᴴA`.
pub struct RspRow<'a, T> {
    a: &'a QMatrix<T>,
    x: QMatrix<T>,
    gamma: T,
    block_r: usize,
    stream: GaussianStream,
}

impl<'a, T: Real> RspRow<'a, T> {
    pub fn new(a: &'a QMatrix<T>, x0: QMatrix<T>, sk: &SketchConfig, stream: GaussianStream) -> Self {
        Self { a, x: x0, gamma: T::lit(sk.relaxation), block_r: sk.block_r, stream }
    }

    pub fn x(&self) -> &QMatrix<T> {
        &self.x
    }

    pub fn into_x(self) -> QMatrix<T> {
        self.x
    }

    pub fn step(&mut self) -> Result<()> {
        let m = self.a.rows();
        for _ in 0..MAX_REDRAWS {
            let s = QMatrix::randn_from(m, self.block_r, &mut self.stream);
            match self.step_with_sketch(&s) {
                Err(Error::RankDeficient { .. }) | Err(Error::Indefinite) => continue,
                other => return other,
            }
        }
        Err(Error::SketchFailure(MAX_REDRAWS))
    }

    pub fn step_with_sketch(&mut self, s: &QMatrix<T>) -> Result<()> {
        let sh = s.adjoint();
        let z = sh.matmul(self.a)?;
        let rhs = sh.sub(&z.matmul(&self.x)?)?;
        let g = z.matmul(&z.adjoint())?;
        let w = hpd_solve(&g, &rhs, T::lit(DEFAULT_RIDGE))?;
        self.x.axpy(self.gamma, &z.adjoint().matmul(&w)?)
    }
}

/// Fixed test sketch `Π` with `AΠ` precomputed; estimates `‖I_n − XA‖_F`.
pub(crate) struct TestSketch<T> {
    pi: QMatrix<T>,
    a_pi: QMatrix<T>,
    pi_norm: T,
}

impl<T: Real> TestSketch<T> {
    pub(crate) fn column(a: &QMatrix<T>, s: usize, stream: &mut GaussianStream) -> Result<Self> {
        let pi = QMatrix::randn_from(a.cols(), s, stream);
        let a_pi = a.matmul(&pi)?;
        let pi_norm = pi.fro_norm();
        Ok(Self { pi, a_pi, pi_norm })
    }

    /// `‖Π − X(AΠ)‖_F / ‖Π‖_F`.
    pub(crate) fn residual(&self, x: &QMatrix<T>) -> Result<f64> {
        Ok((self.pi.sub(&x.matmul(&self.a_pi)?)?.fro_norm() / self.pi_norm).as_f64())
    }
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidConfig(what.to_string()))
    }
}

pub(crate) fn sketch_start<T: Real>(a: &QMatrix<T>, alpha: Alpha) -> QMatrix<T> {
    let alpha = match alpha {
        Alpha::Auto => frobenius_alpha(a),
        Alpha::Fixed(v) => T::lit(v),
    };
    a.adjoint().scale(alpha)
}

/// Column RSP from `X₀ = αAᴴ` (auto-α is `1/‖A‖_F²`), stopping when the test
/// sketch residual `‖Π − X(AΠ)‖_F/‖Π‖_F` reaches `tol`. Needs `m ≥ n`.
pub fn rsp_column<T: Real>(a: &QMatrix<T>, cfg: &SolverConfig, sk: &SketchConfig) -> Result<(QMatrix<T>, SolverReport)> {
    let (m, n) = a.shape();
    require(m >= n, "rsp_column needs rows >= cols")?;
    cfg.validate()?;
    sk.validate(m, n)?;
    let start = Instant::now();
    let mut report = SolverReport::new("rsp", (m, n), Some(sk.seed));
    let mut stream = GaussianStream::new(sk.seed);
    let test = TestSketch::column(a, sk.test_s, &mut stream)?;
    let mut stepper = RspColumn::new(a, sketch_start(a, cfg.alpha), sk, stream);
    let done = |r: f64| cfg.tol > 0.0 && r <= cfg.tol;
    let r0 = test.residual(stepper.x())?;
    report.push(0, r0);
    report.converged = done(r0);
    let mut k = 0;
    while !report.converged && k < cfg.maxit {
        k += 1;
        stepper.step()?;
        let r = test.residual(stepper.x())?;
        report.push(k, r);
        report.converged = done(r);
    }
    report.iterations = k;
    let x = stepper.into_x();
    report.finish(a, &x, start.elapsed())?;
    Ok((x, report))
}

/// Row RSP from `X₀ = 0`, stopping on `‖Πᴴ − (ΠᴴA)X‖_F/‖Π‖_F ≤ tol`. Needs `m ≤ n`.
pub fn rsp_row<T: Real>(a: &QMatrix<T>, cfg: &SolverConfig, sk: &SketchConfig) -> Result<(QMatrix<T>, SolverReport)> {
    let (m, n) = a.shape();
    require(m <= n, "rsp_row needs rows <= cols")?;
    cfg.validate()?;
    sk.validate(m, n)?;
    let start = Instant::now();
    let mut report = SolverReport::new("rsp", (m, n), Some(sk.seed));
    let mut stream = GaussianStream::new(sk.seed);
    // Πᴴ − (ΠᴴA)X is the adjoint of the column test for Aᴴ and Xᴴ.
    let ah = a.adjoint();
    let test = TestSketch::column(&ah, sk.test_s, &mut stream)?;
    let mut stepper = RspRow::new(a, QMatrix::zeros(n, m), sk, stream);
    let done = |r: f64| cfg.tol > 0.0 && r <= cfg.tol;
    let r0 = test.residual(&stepper.x().adjoint())?;
    report.push(0, r0);
    report.converged = done(r0);
    let mut k = 0;
    while !report.converged && k < cfg.maxit {
        k += 1;
        stepper.step()?;
        let r = test.residual(&stepper.x().adjoint())?;
        report.push(k, r);
        report.converged = done(r);
    }
    report.iterations = k;
    let x = stepper.into_x();
    report.finish(a, &x, start.elapsed())?;
    Ok((x, report))
}

/// Monte Carlo estimate of the one-step contraction `‖X₁ − A†‖²/‖X₀ − A†‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateCheck {
    pub mean: f64,
    pub std_err: f64,
    /// `1 − r σ_min(A)² / ‖A‖_F²`
    pub bound: f64,
    pub trials: usize,
}

impl RateCheck {
    /// `mean ≤ bound + 3·SE`.
    pub fn holds(&self) -> bool {
        self.mean <= self.bound + 3.0 * self.std_err
    }
}

/// Averages the squared error contraction of single column steps taken from
/// `X₀ = Aᴴ/‖A‖_F²` with independent sketches.
pub fn rsp_rate_check<T: Real>(a: &QMatrix<T>, sk: &SketchConfig, trials: usize) -> Result<RateCheck> {
    let (m, n) = a.shape();
    require(m >= n, "rsp_rate_check needs rows >= cols")?;
    require(trials >= 2, "rsp_rate_check needs at least two trials")?;
    sk.validate(m, n)?;
    let svd = qsvd(a)?;
    let smin = svd.s.last().copied().unwrap_or(T::zero()).as_f64();
    let fro2 = a.fro_norm_sqr().as_f64();
    let bound = 1.0 - sk.block_r as f64 * smin * smin / fro2;
    let xstar = pinv_qsvd(a, T::lit(DEFAULT_RANK_TOL))?;
    let x0 = sketch_start(a, Alpha::Auto);
    let d0 = x0.sub(&xstar)?.fro_norm_sqr().as_f64();
    let mut stepper = RspColumn::new(a, x0.clone(), sk, GaussianStream::new(sk.seed));
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        stepper.set_x(x0.clone());
        stepper.step()?;
        ratios.push(stepper.x().sub(&xstar)?.fro_norm_sqr().as_f64() / d0);
    }
    let t = trials as f64;
    let mean = ratios.iter().sum::<f64>() / t;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (t - 1.0);
    Ok(RateCheck { mean, std_err: (var / t).sqrt(), bound, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::pinv_normal_eq;

    type M = QMatrix<f64>;

    fn sk(r: usize, seed: u64) -> SketchConfig {
        SketchConfig { block_r: r, test_s: 4, seed, ..Default::default() }
    }

    #[test]
    fn full_identity_sketch_is_exact() {
        let a = M::randn(9, 5, 1);
        for path in [PinvPath::ThinQr, PinvPath::Gram] {
            let cfg = SketchConfig { path, ..sk(5, 0) };
            let mut st = RspColumn::new(&a, a.adjoint().scale(0.01), &cfg, GaussianStream::new(0));
            st.step_with_sketch(&M::identity(5)).unwrap();
            let f = st.x().matmul(&a).unwrap().identity_minus().unwrap();
            assert!(f.fro_norm() < 1e-9, "{path:?}");
        }
    }

    #[test]
    fn pseudoinverse_is_a_fixed_point() {
        let a = M::randn(9, 5, 2);
        let xs = pinv_normal_eq(&a, 0.0).unwrap();
        let mut st = RspColumn::new(&a, xs.clone(), &sk(3, 0), GaussianStream::new(1));
        st.step().unwrap();
        assert!(st.x().rel_diff(&xs).unwrap() < 1e-12);

        let w = M::randn(5, 9, 3);
        let ws = pinv_normal_eq(&w, 0.0).unwrap();
        let mut st = RspRow::new(&w, ws.clone(), &sk(3, 0), GaussianStream::new(1));
        st.step().unwrap();
        assert!(st.x().rel_diff(&ws).unwrap() < 1e-9);
    }

    #[test]
    fn row_full_sketch_is_exact() {
        let a = M::randn(4, 7, 5);
        let mut st = RspRow::new(&a, M::zeros(7, 4), &sk(4, 0), GaussianStream::new(0));
        st.step_with_sketch(&M::identity(4)).unwrap();
        let e = a.matmul(st.x()).unwrap().identity_minus().unwrap();
        assert!(e.fro_norm() < 1e-8);
    }

    #[test]
    fn row_variant_on_a_unit_row() {
        let a = M::from_real(1, 2, &[1.0, 0.0]).unwrap();
        let cfg = SolverConfig { tol: 1e-3, maxit: 50, ..Default::default() };
        let (x, rep) = rsp_row(&a, &cfg, &sk(1, 4)).unwrap();
        assert!(rep.converged);
        let want = pinv_normal_eq(&a, 0.0).unwrap();
        assert!(x.sub(&want).unwrap().fro_norm() < 1e-8);
    }

    #[test]
    fn error_is_monotone() {
        let a = M::randn(60, 30, 7);
        let xs = pinv_normal_eq(&a, 0.0).unwrap();
        let mut st = RspColumn::new(&a, sketch_start(&a, Alpha::Auto), &sk(8, 11), GaussianStream::new(11));
        let mut prev = st.x().sub(&xs).unwrap().fro_norm();
        for k in 0..200 {
            st.step().unwrap();
            let d = st.x().sub(&xs).unwrap().fro_norm();
            assert!(d <= prev * (1.0 + 1e-12), "step {k}: {d} > {prev}");
            prev = d;
        }
    }

    #[test]
    fn deterministic_reports() {
        let a = M::randn(20, 10, 3);
        let cfg = SolverConfig { tol: 1e-3, maxit: 500, ..Default::default() };
        let (x1, r1) = rsp_column(&a, &cfg, &sk(4, 9)).unwrap();
        let (x2, r2) = rsp_column(&a, &cfg, &sk(4, 9)).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(r1.residual_history, r2.residual_history);
        assert!(r1.converged);
    }

    #[test]
    fn rate_bound_examples() {
        let a = M::randn(30, 10, 5);
        let full = rsp_rate_check(&a, &sk(10, 1), 4).unwrap();
        assert!(full.mean < 1e-20 && full.holds());
        let id = M::identity(6);
        let c = rsp_rate_check(&id, &sk(1, 2), 20).unwrap();
        assert!((c.bound - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
        let c = rsp_rate_check(&a, &sk(4, 3), 100).unwrap();
        assert!(c.holds(), "{c:?}");
    }

    #[test]
    fn shape_guards() {
        let cfg = SolverConfig::default();
        assert!(rsp_column(&M::randn(3, 5, 0), &cfg, &sk(2, 0)).is_err());
        assert!(rsp_row(&M::randn(5, 3, 0), &cfg, &sk(2, 0)).is_err());
    }
}
