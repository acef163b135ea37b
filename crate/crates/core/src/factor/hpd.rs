use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::quaternion::Quaternion;
use crate::scalar::Real;

/// Ridge added to sketched Gram matrices before solving.
pub const DEFAULT_RIDGE: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-10;
const SOLVE_TOL: f64 = 1e-10;

/// `base`, raised to `1000·ε` for scalars too coarse to reach it.
fn precision_tol<T: Real>(base: f64) -> T {
    T::lit(base).max(T::epsilon() * T::lit(1e3))
}
const REFINE_STEPS: usize = 2;
const NS_FALLBACK_STEPS: usize = 100;

/// `G = L Lᴴ` with `L` lower triangular and real positive diagonal.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: QMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors the lower triangle of `g`; `None` when a pivot is not positive.
    pub fn factor(g: &QMatrix<T>) -> Option<Self> {
        let n = g.rows();
        let mut l = QMatrix::zeros(n, n);
        for j in 0..n {
            let mut s = g[(j, j)].a;
            for k in 0..j {
                s -= l[(j, k)].norm_sqr();
            }
            if !(s > T::zero()) || !s.is_finite() {
                return None;
            }
            let djj = s.sqrt();
            l[(j, j)] = Quaternion::real(djj);
            let inv = T::one() / djj;
            for i in j + 1..n {
                let mut acc = g[(i, j)];
                for k in 0..j {
                    acc -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = acc.scale(inv);
            }
        }
        Some(Self { l })
    }

    pub fn factor_l(&self) -> &QMatrix<T> {
        &self.l
    }

    /// Solves `L Lᴴ Z = B`.
    pub fn solve(&self, b: &QMatrix<T>) -> Result<QMatrix<T>> {
        let l = &self.l;
        let n = l.rows();
        if b.rows() != n {
            return Err(Error::dims("cholesky solve", l.shape(), b.shape()));
        }
        let k = b.cols();
        let mut y = QMatrix::zeros(n, k);
        for i in 0..n {
            let inv = T::one() / l[(i, i)].a;
            for c in 0..k {
                let mut acc = b[(i, c)];
                for j in 0..i {
                    acc -= l[(i, j)] * y[(j, c)];
                }
                y[(i, c)] = acc.scale(inv);
            }
        }
        let mut z = QMatrix::zeros(n, k);
        for i in (0..n).rev() {
            let inv = T::one() / l[(i, i)].a;
            for c in 0..k {
                let mut acc = y[(i, c)];
                for j in i + 1..n {
                    acc -= l[(j, i)].conj() * z[(j, c)];
                }
                z[(i, c)] = acc.scale(inv);
            }
        }
        Ok(z)
    }
}

/// Solves `(G + ridge·I) Z = B` for Hermitian positive definite `G`.
///
/// Cholesky with two steps of iterative refinement is tried first. If a pivot
/// is not positive the solve falls back to matrix conjugate gradients (at most
/// `4r` iterations), and if CG stalls to a Newton–Schulz inverse started from
/// `I/‖G‖_F`, which only contracts for positive definite `G`. Returns
/// `Indefinite` when every route misses `‖(G + ridge·I)Z − B‖_F ≤ tol·‖B‖_F`,
/// `tol = max(1e-10, 1000ε)`; the Hermitian check uses the same floor.
pub fn hpd_solve<T: Real>(g: &QMatrix<T>, b: &QMatrix<T>, ridge: T) -> Result<QMatrix<T>> {
    let n = g.rows();
    if !g.is_square() || b.rows() != n {
        return Err(Error::dims("hpd_solve", g.shape(), b.shape()));
    }
    let gnorm = g.fro_norm();
    let defect = g.hermitian_defect()?;
    if defect > precision_tol::<T>(HERMITIAN_TOL) * gnorm {
        let rel = if gnorm > T::zero() { defect / gnorm } else { defect };
        return Err(Error::NotHermitian(rel.as_f64()));
    }
    let mut shifted = g.clone();
    shifted.shift_diag(ridge);
    let bnorm = b.fro_norm();
    if bnorm == T::zero() {
        return Ok(QMatrix::zeros(n, b.cols()));
    }
    let tol = precision_tol::<T>(SOLVE_TOL) * bnorm;

    if let Some(chol) = Cholesky::factor(&shifted) {
        let mut z = chol.solve(b)?;
        for _ in 0..REFINE_STEPS {
            let r = b.sub(&shifted.matmul(&z)?)?;
            if r.fro_norm() <= tol {
                break;
            }
            z = z.add(&chol.solve(&r)?)?;
        }
        return Ok(z);
    }

    let (z, res) = conjugate_gradient(&shifted, b, 4 * n.max(1))?;
    if res <= tol {
        return Ok(z);
    }
    if let Some(z) = newton_schulz_inverse_apply(&shifted, b, tol)? {
        return Ok(z);
    }
    Err(Error::Indefinite)
}

/// Matrix CG for `G Z = B` under the inner product `Re tr(Uᴴ V)`; returns the
/// iterate and its residual norm.
fn conjugate_gradient<T: Real>(g: &QMatrix<T>, b: &QMatrix<T>, cap: usize) -> Result<(QMatrix<T>, T)> {
    let mut z = QMatrix::zeros(b.rows(), b.cols());
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs = r.fro_norm_sqr();
    for _ in 0..cap {
        let gp = g.matmul(&p)?;
        let curv = p.re_inner(&gp)?;
        if !(curv > T::zero()) {
            break;
        }
        let alpha = rs / curv;
        z.axpy(alpha, &p)?;
        r.axpy(-alpha, &gp)?;
        let rs_new = r.fro_norm_sqr();
        if rs_new.sqrt() <= precision_tol::<T>(SOLVE_TOL) * b.fro_norm() {
            rs = rs_new;
            break;
        }
        let beta = rs_new / rs;
        rs = rs_new;
        let mut next = r.clone();
        next.axpy(beta, &p)?;
        p = next;
    }
    let res = b.sub(&g.matmul(&z)?)?.fro_norm();
    debug_assert!(res.is_finite() || rs.is_nan());
    Ok((z, res))
}

fn newton_schulz_inverse_apply<T: Real>(g: &QMatrix<T>, b: &QMatrix<T>, tol: T) -> Result<Option<QMatrix<T>>> {
    let n = g.rows();
    let mut x = QMatrix::identity(n).scale(T::one() / g.fro_norm());
    for _ in 0..NS_FALLBACK_STEPS {
        let e = g.matmul(&x)?.identity_minus()?;
        let en = e.fro_norm();
        if !en.is_finite() || en > T::lit(1e3) {
            return Ok(None);
        }
        let z = x.matmul(b)?;
        if b.sub(&g.matmul(&z)?)?.fro_norm() <= tol {
            return Ok(Some(z));
        }
        x = x.add(&x.matmul(&e)?)?;
    }
    Ok(None)
}
