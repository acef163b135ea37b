use std::time::Instant;

use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::rng::GaussianStream;
use crate::scalar::Real;
use crate::solvers::config::{Schedule, SketchConfig, SolverConfig};
use crate::solvers::poly::{eval_neumann_poly_counted, PolySide};
use crate::solvers::report::SolverReport;
use crate::solvers::rsp::{sketch_start, RspColumn, TestSketch};

/// Cycles of `T` column RSP steps followed by one hyperpower correction
/// `X ← (Σ_{i<p} Fⁱ)X`, `F = I_n − XA`, evaluated by Paterson–Stockmeyer.
/// The test-sketch residual is checked after every cycle; `maxit` bounds the
/// number of cycles. Column case only (`m ≥ n`).
pub fn hybrid_rsp_ns<T: Real>(a: &QMatrix<T>, cfg: &SolverConfig, sk: &SketchConfig) -> Result<(QMatrix<T>, SolverReport)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::InvalidConfig("hybrid_rsp_ns needs rows >= cols".into()));
    }
    cfg.validate()?;
    sk.validate(m, n)?;
    let start = Instant::now();
    let mut report = SolverReport::new("hybrid", (m, n), Some(sk.seed));
    let mut stream = GaussianStream::new(sk.seed);
    let test = TestSketch::column(a, sk.test_s, &mut stream)?;
    let mut stepper = RspColumn::new(a, sketch_start(a, cfg.alpha), sk, stream);
    let done = |r: f64| cfg.tol > 0.0 && r <= cfg.tol;
    let r0 = test.residual(stepper.x())?;
    report.push(0, r0);
    report.converged = done(r0);
    let mut cycles = 0;
    while !report.converged && cycles < cfg.maxit {
        cycles += 1;
        for _ in 0..sk.cycle_t {
            stepper.step()?;
        }
        let x = stepper.x();
        let f = x.matmul(a)?.identity_minus()?;
        let (next, products) =
            eval_neumann_poly_counted(&f, x, cfg.order, Schedule::PatersonStockmeyer, PolySide::Right)?;
        report.square_products += products;
        stepper.set_x(next);
        let r = test.residual(stepper.x())?;
        if !r.is_finite() {
            return Err(Error::Divergence { iteration: cycles, residual: r });
        }
        report.push(cycles, r);
        report.converged = done(r);
    }
    report.iterations = cycles;
    let x = stepper.into_x();
    report.finish(a, &x, start.elapsed())?;
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::config::Alpha;
    use crate::solvers::ns::ns_hyperpower;
    use crate::solvers::rsp::rsp_column;

    type M = QMatrix<f64>;

    #[test]
    fn zero_cycle_length_is_pure_hyperpower() {
        let a = M::randn(14, 8, 2);
        let alpha = 1.0 / a.fro_norm_sqr();
        for k in 1..6 {
            let cfg = SolverConfig {
                alpha: Alpha::Fixed(alpha),
                order: 4,
                schedule: Schedule::PatersonStockmeyer,
                tol: 0.0,
                maxit: k,
                ..Default::default()
            };
            let sk = SketchConfig { block_r: 3, cycle_t: 0, ..Default::default() };
            let (xh, _) = hybrid_rsp_ns(&a, &cfg, &sk).unwrap();
            let (xp, _) = ns_hyperpower(&a, &cfg).unwrap();
            assert!(xh.rel_diff(&xp).unwrap() <= 1e-12, "cycle {k}");
        }
    }

    #[test]
    fn correction_raises_residual_to_the_order() {
        let a = M::randn(20, 10, 4);
        let sk = SketchConfig { block_r: 4, ..Default::default() };
        for p in [2, 3, 4] {
            let mut st = RspColumn::new(&a, sketch_start(&a, Alpha::Auto), &sk, GaussianStream::new(3));
            let mut checked = 0;
            for _ in 0..12 {
                for _ in 0..5 {
                    st.step().unwrap();
                }
                let f_old = st.x().matmul(&a).unwrap().identity_minus().unwrap();
                let (next, _) =
                    eval_neumann_poly_counted(&f_old, st.x(), p, Schedule::PatersonStockmeyer, PolySide::Right)
                        .unwrap();
                let f_new = next.matmul(&a).unwrap().identity_minus().unwrap();
                let old = f_old.fro_norm();
                if old < 1.0 {
                    assert!(f_new.fro_norm() <= old.powi(p as i32) + 1e-10);
                    checked += 1;
                }
                st.set_x(next);
            }
            assert!(checked > 0, "p={p}: residual never entered the unit ball");
        }
    }

    #[test]
    fn converges_and_beats_plain_rsp() {
        let a = M::randn(80, 40, 1);
        let cfg = SolverConfig { order: 4, tol: 1e-3, maxit: 5000, ..Default::default() };
        let (mut t_h, mut t_r) = (0.0, 0.0);
        for seed in 0..5 {
            let sk = SketchConfig { block_r: 8, seed, ..Default::default() };
            let (_, h) = hybrid_rsp_ns(&a, &cfg, &sk).unwrap();
            let (_, r) = rsp_column(&a, &cfg, &sk).unwrap();
            assert!(h.converged && r.converged);
            t_h += h.wall_time.as_secs_f64();
            t_r += r.wall_time.as_secs_f64();
        }
        assert!(t_h < t_r, "hybrid {t_h}s vs rsp {t_r}s");
    }
}
