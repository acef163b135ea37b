use std::time::Instant;

use crate::error::{Error, Result};
use crate::factor::{hpd_solve, thin_qr, QrFactors};
use crate::qmat::QMatrix;
use crate::rng::GaussianStream;
use crate::scalar::Real;
use crate::solvers::config::{Side, SketchConfig, SolverConfig};
use crate::solvers::ns::initial_iterate;
use crate::solvers::report::SolverReport;
use crate::solvers::rsp::MAX_REDRAWS;
use crate::solvers::DivergenceGuard;

/// Right preconditioner `M = Q(RRᴴ)⁻¹Qᴴ + μ(I − QQᴴ)` from the thin QR of
/// `Y = AΩ`, with `μ = λ_max((RRᴴ)⁻¹)`. On `range(Y)` it is `(YYᴴ)†`.
struct Precond<T> {
    q: QMatrix<T>,
    kinv: QMatrix<T>,
    mu: T,
}

impl<T: Real> Precond<T> {
    fn build(a: &QMatrix<T>, sk: &SketchConfig) -> Result<Self> {
        let (m, n) = a.shape();
        sk.validate(m, n)?;
        let mut stream = GaussianStream::new(sk.seed);
        let mut qr: Option<QrFactors<T>> = None;
        for _ in 0..MAX_REDRAWS {
            let omega = QMatrix::randn_from(n, sk.block_r, &mut stream);
            match thin_qr(&a.matmul(&omega)?) {
                Ok(f) => {
                    qr = Some(f);
                    break;
                }
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let QrFactors { q, r } = qr.ok_or(Error::SketchFailure(MAX_REDRAWS))?;
        let rrh = r.matmul(&r.adjoint())?;
        let kinv = hpd_solve(&rrh, &QMatrix::identity(r.rows()), T::zero())?;
        let mu = kinv.op_norm_est(30, sk.seed ^ 0x5bd1_e995);
        Ok(Self { q, kinv, mu })
    }

    /// `Z ↦ Z M`.
    fn apply(&self, z: &QMatrix<T>) -> Result<QMatrix<T>> {
        let zq = z.matmul(&self.q)?;
        let qh = self.q.adjoint();
        let mut out = z.sub(&zq.matmul(&qh)?)?.scale(self.mu);
        out.axpy(T::one(), &zq.matmul(&self.kinv)?.matmul(&qh)?)?;
        Ok(out)
    }
}

/// Conjugate gradients on `f(X) = ½‖XA − I_n‖_F²` from `X₀ = αAᴴ`.
///
/// Keeps `R = I − XA`, `Z = RAᴴ`, `W = DA`, steps `α = ⟨Z, ZM⟩/‖W‖²` and updates
/// directions with the Fletcher–Reeves ratio (`M = I` without a sketch). Every
/// direction has the form `(·)Aᴴ`, so the limit is `A†`. For `m < n` the same
/// iteration runs on `Aᴴ` and the result is transposed back, which is the
/// row form for `g(X) = ½‖AX − I_m‖_F²`. Stops when `‖R‖_F ≤ tol`.
pub fn cgne_q<T: Real>(
    a: &QMatrix<T>,
    cfg: &SolverConfig,
    precond: Option<&SketchConfig>,
) -> Result<(QMatrix<T>, SolverReport)> {
    cfg.validate()?;
    let (m, n) = a.shape();
    let start = Instant::now();
    let method = if precond.is_some() { "cgne-pre" } else { "cgne" };
    let mut report = SolverReport::new(method, (m, n), precond.map(|s| s.seed));
    let x = match cfg.side.resolve(m, n) {
        Side::Left => {
            let b = a.adjoint();
            let pc = precond.map(|s| Precond::build(&b, s)).transpose()?;
            column_cg(&b, cfg, pc.as_ref(), &mut report)?.adjoint()
        }
        _ => {
            let pc = precond.map(|s| Precond::build(a, s)).transpose()?;
            column_cg(a, cfg, pc.as_ref(), &mut report)?
        }
    };
    report.finish(a, &x, start.elapsed())?;
    Ok((x, report))
}

fn column_cg<T: Real>(
    a: &QMatrix<T>,
    cfg: &SolverConfig,
    pc: Option<&Precond<T>>,
    report: &mut SolverReport,
) -> Result<QMatrix<T>> {
    let ah = a.adjoint();
    let precondition = |z: &QMatrix<T>| match pc {
        Some(p) => p.apply(z),
        None => Ok(z.clone()),
    };
    let mut x = initial_iterate(a, cfg.alpha);
    let mut r = x.matmul(a)?.identity_minus()?;
    let r0 = r.fro_norm().as_f64();
    report.push(0, r0);
    let mut guard = DivergenceGuard::new(r0);
    let done = |res: f64| cfg.tol > 0.0 && res <= cfg.tol;
    report.converged = done(r0);

    let mut z = r.matmul(&ah)?;
    let mut zt = precondition(&z)?;
    let mut rho = z.re_inner(&zt)?;
    let mut d = zt.clone();
    let mut k = 0;
    while !report.converged && k < cfg.maxit {
        if rho == T::zero() {
            // Zero gradient: X already minimizes f.
            report.converged = true;
            break;
        }
        k += 1;
        let w = d.matmul(a)?;
        let wn = w.fro_norm_sqr();
        if wn == T::zero() {
            return Err(Error::Breakdown(k));
        }
        let step = rho / wn;
        x.axpy(step, &d)?;
        r.axpy(-step, &w)?;
        let res = r.fro_norm().as_f64();
        report.push(k, res);
        guard.check(k, res)?;
        report.converged = done(res);
        if report.converged {
            break;
        }
        z = r.matmul(&ah)?;
        zt = precondition(&z)?;
        let rho_next = z.re_inner(&zt)?;
        let beta = rho_next / rho;
        rho = rho_next;
        let mut next = zt.clone();
        next.axpy(beta, &d)?;
        d = next;
    }
    report.iterations = k;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::pinv_normal_eq;
    use crate::solvers::config::Alpha;

    type M = QMatrix<f64>;

    #[test]
    fn orthonormal_columns_take_one_step() {
        let y = M::randn(9, 4, 3);
        let q = thin_qr(&y).unwrap().q;
        for alpha in [0.1, 0.5, 0.9] {
            let cfg = SolverConfig { alpha: Alpha::Fixed(alpha), ..Default::default() };
            let (x, rep) = cgne_q(&q, &cfg, None).unwrap();
            assert_eq!(rep.iterations, 1);
            assert!(x.sub(&q.adjoint()).unwrap().fro_norm() <= 1e-12);
        }
    }

    #[test]
    fn scalar_case() {
        let a = M::from_real(1, 1, &[2.0]).unwrap();
        let cfg = SolverConfig { alpha: Alpha::Fixed(0.1), ..Default::default() };
        let (x, rep) = cgne_q(&a, &cfg, None).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!((x[(0, 0)].a - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_tall_matches_closed_form_and_decreases() {
        let a = M::randn(40, 20, 8);
        let cfg = SolverConfig { maxit: 200, ..Default::default() };
        let (x, rep) = cgne_q(&a, &cfg, None).unwrap();
        assert!(rep.converged);
        assert!(rep.final_residual() / 20f64.sqrt() <= 1e-8);
        assert!(rep.residual_history.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(x.rel_diff(&pinv_normal_eq(&a, 0.0).unwrap()).unwrap() <= 1e-6);
    }

    #[test]
    fn iterates_stay_in_the_row_space() {
        let a = M::randn(12, 5, 4);
        let cfg = SolverConfig { tol: 0.0, maxit: 3, ..Default::default() };
        let (x, _) = cgne_q(&a, &cfg, None).unwrap();
        // X(I − AA†) vanishes when X = (·)Aᴴ.
        let p = a.matmul(&pinv_normal_eq(&a, 0.0).unwrap()).unwrap().identity_minus().unwrap();
        assert!(x.matmul(&p).unwrap().fro_norm() < 1e-12 * x.fro_norm());
    }

    #[test]
    fn wide_and_preconditioned() {
        let w = M::randn(15, 25, 2);
        let (x, rep) = cgne_q(&w, &SolverConfig::default(), None).unwrap();
        assert!(rep.converged);
        assert!(x.rel_diff(&pinv_normal_eq(&w, 0.0).unwrap()).unwrap() <= 1e-6);

        let a = M::randn(40, 20, 5);
        let sk = SketchConfig { block_r: 10, seed: 3, ..Default::default() };
        let (xp, rp) = cgne_q(&a, &SolverConfig::default(), Some(&sk)).unwrap();
        assert!(rp.converged);
        assert!(xp.rel_diff(&pinv_normal_eq(&a, 0.0).unwrap()).unwrap() <= 1e-6);
    }

    #[test]
    fn rank_deficient_input_breaks_down_or_stalls() {
        let b = M::randn(6, 2, 1);
        let a = b.matmul(&M::randn(2, 4, 2)).unwrap();
        let cfg = SolverConfig { maxit: 50, ..Default::default() };
        match cgne_q(&a, &cfg, None) {
            Err(Error::Breakdown(_)) => {}
            Ok((_, rep)) => assert!(!rep.converged),
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
