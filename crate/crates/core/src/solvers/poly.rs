use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::scalar::Real;
use crate::solvers::config::Schedule;

/// Side on which `S(R) = Σ_{i<p} Rⁱ` multiplies the iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolySide {
    /// `S(R) · X`
    Right,
    /// `X · S(R)`
    Left,
}

/// `S(R)·X` or `X·S(R)` with `S(R) = I + R + … + R^{p−1}`.
pub fn eval_neumann_poly<T: Real>(
    r: &QMatrix<T>,
    x: &QMatrix<T>,
    p: usize,
    schedule: Schedule,
    side: PolySide,
) -> Result<QMatrix<T>> {
    eval_neumann_poly_counted(r, x, p, schedule, side).map(|(y, _)| y)
}

/// As [`eval_neumann_poly`], also returning the number of `s × s` products
/// among powers of `R` (products with `X` are not counted).
///
/// Naive spends `p − 2`, BinaryPow2 spends `log₂p − 1`, and Paterson–Stockmeyer
/// with `a = ⌈√p⌉`, `b = ⌈p/a⌉` spends `a − 1 + b − 1` (one fewer when `b = 1`).
pub fn eval_neumann_poly_counted<T: Real>(
    r: &QMatrix<T>,
    x: &QMatrix<T>,
    p: usize,
    schedule: Schedule,
    side: PolySide,
) -> Result<(QMatrix<T>, usize)> {
    let name = match schedule {
        Schedule::Naive => "naive",
        Schedule::BinaryPow2 => "binary-pow2",
        Schedule::PatersonStockmeyer => "paterson-stockmeyer",
    };
    if p < 2 {
        return Err(Error::InvalidOrder { order: p, schedule: name });
    }
    let inner = match side {
        PolySide::Right => x.rows(),
        PolySide::Left => x.cols(),
    };
    if !r.is_square() || r.rows() != inner {
        return Err(Error::dims("eval_neumann_poly", r.shape(), x.shape()));
    }
    let apply = |pw: &QMatrix<T>, y: &QMatrix<T>| match side {
        PolySide::Right => pw.matmul(y),
        PolySide::Left => y.matmul(pw),
    };
    match schedule {
        Schedule::Naive => {
            let mut out = x.clone();
            let mut pw = r.clone();
            let mut count = 0;
            for i in 1..p {
                if i > 1 {
                    pw = pw.matmul(r)?;
                    count += 1;
                }
                out.axpy(T::one(), &apply(&pw, x)?)?;
            }
            Ok((out, count))
        }
        Schedule::BinaryPow2 => {
            if !p.is_power_of_two() {
                return Err(Error::InvalidOrder { order: p, schedule: name });
            }
            let q = p.trailing_zeros() as usize;
            let mut y = x.clone();
            let mut pw = r.clone();
            let mut count = 0;
            for j in 0..q {
                if j > 0 {
                    pw = pw.matmul(&pw)?;
                    count += 1;
                }
                let step = apply(&pw, &y)?;
                y.axpy(T::one(), &step)?;
            }
            Ok((y, count))
        }
        Schedule::PatersonStockmeyer => {
            let a = (p as f64).sqrt().ceil() as usize;
            let b = p.div_ceil(a);
            let s = r.rows();
            let mut count = 0;
            // powers[i] = R^i for i < a.
            let mut powers = vec![QMatrix::identity(s), r.clone()];
            while powers.len() < a {
                let next = powers.last().expect("nonempty").matmul(r)?;
                count += 1;
                powers.push(next);
            }
            let block = |j: usize| -> Result<QMatrix<T>> {
                let mut acc = QMatrix::zeros(s, s);
                for (i, pw) in powers.iter().enumerate().take(a) {
                    if j * a + i < p {
                        acc.axpy(T::one(), pw)?;
                    }
                }
                Ok(acc)
            };
            let mut poly = block(b - 1)?;
            if b > 1 {
                let ra = powers[a - 1].matmul(r)?;
                count += 1;
                for j in (0..b - 1).rev() {
                    poly = poly.matmul(&ra)?.add(&block(j)?)?;
                    count += 1;
                }
            }
            Ok((apply(&poly, x)?, count))
        }
    }
}
