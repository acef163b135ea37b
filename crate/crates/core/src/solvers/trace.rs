use crate::error::Result;
use crate::qmat::QMatrix;
use crate::scalar::Real;
use crate::solvers::config::{Alpha, Schedule, Side, SolverConfig};
use crate::solvers::ns::{initial_iterate, residual};
use crate::solvers::poly::{eval_neumann_poly, PolySide};

/// Per-iteration `max |F_{k+1} − ((1 − γ)F_k + γF_k²)|` for damped NS from
/// the auto-α start, on the side chosen by shape.
pub fn ns_recurrence_trace<T: Real>(a: &QMatrix<T>, gamma: f64, iters: usize) -> Result<Vec<f64>> {
    let cfg = SolverConfig { gamma, ..Default::default() };
    cfg.validate()?;
    let side = Side::Auto.resolve(a.rows(), a.cols());
    let g = T::lit(gamma);
    let mut x = initial_iterate(a, Alpha::Auto);
    let mut f = residual(a, &x, side)?;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        let step = if side == Side::Left { x.matmul(&f)? } else { f.matmul(&x)? };
        x.axpy(g, &step)?;
        let next = residual(a, &x, side)?;
        let mut predicted = f.scale(T::one() - g);
        predicted.axpy(g, &f.matmul(&f)?)?;
        out.push(next.max_abs_diff(&predicted)?.as_f64());
        f = next;
    }
    Ok(out)
}

/// Per-iteration `max |F_{k+1} − F_kᵖ|` for the order-`p` hyperpower step.
pub fn hyperpower_recurrence_trace<T: Real>(
    a: &QMatrix<T>,
    order: usize,
    schedule: Schedule,
    iters: usize,
) -> Result<Vec<f64>> {
    let cfg = SolverConfig { order, schedule, ..Default::default() };
    cfg.validate()?;
    let side = Side::Auto.resolve(a.rows(), a.cols());
    let ps = if side == Side::Left { PolySide::Left } else { PolySide::Right };
    let mut x = initial_iterate(a, Alpha::Auto);
    let mut f = residual(a, &x, side)?;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        x = eval_neumann_poly(&f, &x, order, schedule, ps)?;
        let next = residual(a, &x, side)?;
        let mut predicted = f.clone();
        for _ in 1..order {
            predicted = predicted.matmul(&f)?;
        }
        out.push(next.max_abs_diff(&predicted)?.as_f64());
        f = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrences_hold_on_both_sides() {
        for (m, n) in [(10, 6), (6, 10)] {
            let a = QMatrix::<f64>::randn(m, n, 42);
            for g in [0.5, 1.0] {
                let t = ns_recurrence_trace(&a, g, 12).unwrap();
                assert!(t.iter().all(|&d| d <= 1e-11), "{m}x{n} γ={g}: {t:?}");
            }
            for p in [2, 3, 4, 8] {
                let t = hyperpower_recurrence_trace(&a, p, Schedule::Naive, 6).unwrap();
                assert!(t.iter().all(|&d| d <= 1e-11), "{m}x{n} p={p}: {t:?}");
            }
        }
    }
}
