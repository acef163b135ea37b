use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::quaternion::Quaternion;
use crate::scalar::Real;

/// Thin QR factors: `Q` is `m × r` with orthonormal columns, `R` is `r × r`
/// upper triangular with a real positive diagonal.
#[derive(Clone, Debug)]
pub struct QrFactors<T> {
    pub q: QMatrix<T>,
    pub r: QMatrix<T>,
}

impl<T: Real> QrFactors<T> {
    /// `Y† = R⁻¹ Qᴴ`.
    pub fn pinv(&self) -> Result<QMatrix<T>> {
        solve_upper(&self.r, &self.q.adjoint())
    }
}

/// Householder QR with quaternion reflectors `H = I − 2vvᴴ/(vᴴv)`.
///
/// Each reflector maps the active column onto `−u‖x‖e₁` with `u = x₁/|x₁|`;
/// the unit phases are then moved from `R` into `Q` so the diagonal of `R` is
/// real and positive. Fails with `RankDeficient` when a diagonal entry falls
/// below `1e-12 · ‖Y‖_F`.
pub fn thin_qr<T: Real>(y: &QMatrix<T>) -> Result<QrFactors<T>> {
    let (m, r) = y.shape();
    if m < r {
        return Err(Error::dims("thin_qr (needs rows >= cols)", (m, r), (r, r)));
    }
    let mut work = y.clone();
    let mut reflectors: Vec<Option<(Vec<Quaternion<T>>, T)>> = Vec::with_capacity(r);
    let mut phases = Vec::with_capacity(r);
    let mut diag = Vec::with_capacity(r);

    for k in 0..r {
        let x: Vec<Quaternion<T>> = (k..m).map(|i| work[(i, k)]).collect();
        let normx = x.iter().map(|q| q.norm_sqr()).sum::<T>().sqrt();
        if normx == T::zero() {
            reflectors.push(None);
            phases.push(Quaternion::one());
            diag.push(T::zero());
            continue;
        }
        let x1 = x[0];
        let x1_abs = x1.norm();
        let u = if x1_abs > T::zero() { x1.scale(T::one() / x1_abs) } else { Quaternion::one() };
        let mut v = x;
        v[0] = x1 + u.scale(normx);
        let vnorm2 = (normx + normx) * (normx + x1_abs);
        let two_over = (T::one() + T::one()) / vnorm2;
        for j in k..r {
            apply_reflector(&mut work, &v, two_over, k, j);
        }
        // The reflected column is exactly −u‖x‖e₁.
        work[(k, k)] = -u.scale(normx);
        for i in k + 1..m {
            work[(i, k)] = Quaternion::zero();
        }
        reflectors.push(Some((v, two_over)));
        phases.push(-u);
        diag.push(normx);
    }

    let mut rmat = QMatrix::zeros(r, r);
    for k in 0..r {
        let dc = phases[k].conj();
        for j in k..r {
            rmat[(k, j)] = dc * work[(k, j)];
        }
        rmat[(k, k)] = Quaternion::real(diag[k]);
    }

    let mut q = QMatrix::zeros(m, r);
    for k in 0..r {
        q[(k, k)] = Quaternion::one();
    }
    for k in (0..r).rev() {
        if let Some((v, two_over)) = &reflectors[k] {
            for j in 0..r {
                apply_reflector(&mut q, v, *two_over, k, j);
            }
        }
    }
    for k in 0..r {
        for i in 0..m {
            q[(i, k)] *= phases[k];
        }
    }

    let floor = T::lit(1e-12) * y.fro_norm();
    if let Some((column, &pivot)) = diag.iter().enumerate().find(|(_, &d)| !(d > floor)) {
        return Err(Error::RankDeficient { column, pivot: pivot.as_f64() });
    }
    Ok(QrFactors { q, r: rmat })
}

/// Applies `I − (2/vᴴv)·v vᴴ` to rows `k..` of column `j`.
fn apply_reflector<T: Real>(a: &mut QMatrix<T>, v: &[Quaternion<T>], two_over: T, k: usize, j: usize) {
    let mut s = Quaternion::zero();
    for (i, vi) in v.iter().enumerate() {
        s.mul_add_assign(vi.conj(), a[(k + i, j)]);
    }
    let coef = s.scale(two_over);
    for (i, &vi) in v.iter().enumerate() {
        a[(k + i, j)] -= vi * coef;
    }
}

/// Solves `R Z = B` for upper-triangular `R` by back substitution (inverse
/// diagonal applied from the left).
pub fn solve_upper<T: Real>(r: &QMatrix<T>, b: &QMatrix<T>) -> Result<QMatrix<T>> {
    let n = r.rows();
    if !r.is_square() || b.rows() != n {
        return Err(Error::dims("solve_upper", r.shape(), b.shape()));
    }
    let k = b.cols();
    let mut z = QMatrix::zeros(n, k);
    for i in (0..n).rev() {
        let inv = r[(i, i)].inv()?;
        for c in 0..k {
            let mut acc = b[(i, c)];
            for j in i + 1..n {
                acc -= r[(i, j)] * z[(j, c)];
            }
            z[(i, c)] = inv * acc;
        }
    }
    Ok(z)
}
