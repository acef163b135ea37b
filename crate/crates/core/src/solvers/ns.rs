use std::time::Instant;

use crate::error::Result;
use crate::qmat::QMatrix;
use crate::scalar::Real;
use crate::solvers::config::{Alpha, Side, SolverConfig};
use crate::solvers::poly::{eval_neumann_poly_counted, PolySide};
use crate::solvers::report::SolverReport;
use crate::solvers::{spectral_alpha, DivergenceGuard};

/// `F = I_n − XA` on the right side, `E = I_m − AX` on the left.
pub(crate) fn residual<T: Real>(a: &QMatrix<T>, x: &QMatrix<T>, side: Side) -> Result<QMatrix<T>> {
    match side {
        Side::Left => a.matmul(x)?.identity_minus(),
        _ => x.matmul(a)?.identity_minus(),
    }
}

pub(crate) fn initial_iterate<T: Real>(a: &QMatrix<T>, alpha: Alpha) -> QMatrix<T> {
    let alpha = match alpha {
        Alpha::Auto => spectral_alpha(a),
        Alpha::Fixed(v) => T::lit(v),
    };
    a.adjoint().scale(alpha)
}

/// Damped Newton–Schulz: `X ← X + γ F X` (tall) or `X ← X + γ X E` (wide),
/// started from `X₀ = α Aᴴ`. The right residual obeys
/// `F_{k+1} = (1 − γ)F_k + γF_k²`.
pub fn ns_damped<T: Real>(a: &QMatrix<T>, cfg: &SolverConfig) -> Result<(QMatrix<T>, SolverReport)> {
    cfg.validate()?;
    let gamma = T::lit(cfg.gamma);
    run(a, cfg, "ns", |x, r, side| {
        let step = match side {
            Side::Left => x.matmul(r)?,
            _ => r.matmul(x)?,
        };
        let mut next = x.clone();
        next.axpy(gamma, &step)?;
        Ok((next, 0))
    })
}

/// Order-`p` hyperpower: `X ← S(F)X` (tall) or `X ← X S(E)` (wide) with
/// `S(R) = Σ_{i<p} Rⁱ`, so the residual is raised to the `p`-th power each step.
/// With `p = 2` and the naive schedule the iterates equal undamped NS bitwise.
pub fn ns_hyperpower<T: Real>(a: &QMatrix<T>, cfg: &SolverConfig) -> Result<(QMatrix<T>, SolverReport)> {
    cfg.validate()?;
    let method = format!("hyperpower-{}", cfg.order);
    run(a, cfg, &method, |x, r, side| {
        let ps = if side == Side::Left { PolySide::Left } else { PolySide::Right };
        eval_neumann_poly_counted(r, x, cfg.order, cfg.schedule, ps)
    })
}

fn run<T: Real>(
    a: &QMatrix<T>,
    cfg: &SolverConfig,
    method: &str,
    mut update: impl FnMut(&QMatrix<T>, &QMatrix<T>, Side) -> Result<(QMatrix<T>, usize)>,
) -> Result<(QMatrix<T>, SolverReport)> {
    let (m, n) = a.shape();
    let side = cfg.side.resolve(m, n);
    let start = Instant::now();
    let mut report = SolverReport::new(method, (m, n), None);
    let mut x = initial_iterate(a, cfg.alpha);
    let mut r = residual(a, &x, side)?;
    let r0 = r.fro_norm().as_f64();
    report.push(0, r0);
    let mut guard = DivergenceGuard::new(r0);
    let done = |res: f64| cfg.tol > 0.0 && res <= cfg.tol;
    report.converged = done(r0);
    let mut k = 0;
    while !report.converged && k < cfg.maxit {
        k += 1;
        let (next, products) = update(&x, &r, side)?;
        x = next;
        report.square_products += products;
        r = residual(a, &x, side)?;
        let res = r.fro_norm().as_f64();
        report.push(k, res);
        guard.check(k, res)?;
        report.converged = done(res);
    }
    report.iterations = k;
    report.finish(a, &x, start.elapsed())?;
    Ok((x, report))
}
