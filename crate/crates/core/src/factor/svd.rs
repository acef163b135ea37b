use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, QMatrix};
use crate::quaternion::Quaternion;
use crate::scalar::Real;

pub const MAX_JACOBI_SWEEPS: usize = 60;

/// Thin SVD of a tall complex matrix: `C = U diag(s) Vᴴ` with `U` of size
/// `rows × cols` and `V` square. Columns of `U` for zero singular values are zero.
#[derive(Clone, Debug)]
pub struct ComplexSvd<T> {
    pub u: ComplexMatrix<T>,
    pub s: Vec<T>,
    pub v: ComplexMatrix<T>,
    pub sweeps: usize,
}

/// `A = U Σ Vᴴ` with `U`, `V` unitary and `s` nonincreasing.
#[derive(Clone, Debug)]
pub struct QsvdFactors<T> {
    pub u: QMatrix<T>,
    pub s: Vec<T>,
    pub v: QMatrix<T>,
}

impl<T: Real> QsvdFactors<T> {
    /// Rebuilds `U Σ Vᴴ`.
    pub fn reconstruct(&self) -> Result<QMatrix<T>> {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut sigma = QMatrix::zeros(m, n);
        for (k, &s) in self.s.iter().enumerate() {
            sigma[(k, k)] = Quaternion::real(s);
        }
        self.u.matmul(&sigma)?.matmul(&self.v.adjoint())
    }
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// One-sided (Hestenes) Jacobi SVD for `rows ≥ cols`.
///
/// Sweeps cyclically over column pairs, rotating each pair until
/// `|c_pᴴ c_q| ≤ ε·√rows·‖c_p‖‖c_q‖`. A sweep without rotations ends the run.
pub fn jacobi_svd<T: Real>(c: &ComplexMatrix<T>) -> Result<ComplexSvd<T>> {
    let (m, n) = (c.rows(), c.cols());
    if m < n {
        return Err(Error::dims("jacobi_svd (needs rows >= cols)", (m, n), (n, n)));
    }
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| (0..m).map(|i| c[(i, j)]).collect()).collect();
    let mut vcols: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { Complex::new(T::one(), T::zero()) } else { czero() }).collect())
        .collect();
    let rel_tol = T::epsilon() * T::lit(m.max(1) as f64).sqrt();
    let abs_floor = T::lit(1e-30) * c.fro_norm().powi(2);

    let mut sweeps = 0;
    loop {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::ConvergenceFailure { what: "jacobi_svd", iterations: sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut g: Complex<T> = czero();
                    let (mut a, mut b) = (T::zero(), T::zero());
                    for i in 0..m {
                        g += cp[i].conj() * cq[i];
                        a += cp[i].norm_sqr();
                        b += cq[i].norm_sqr();
                    }
                    (a, b, g)
                };
                let g_abs = gamma.norm();
                if g_abs <= rel_tol * (alpha * beta).sqrt() || g_abs <= abs_floor {
                    continue;
                }
                rotated = true;
                let phase: Complex<T> = (gamma * (T::one() / g_abs)).conj();
                let two = T::one() + T::one();
                let zeta = (beta - alpha) / (two * g_abs);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut cols, p, q, phase, cs, sn);
                rotate(&mut vcols, p, q, phase, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = cols.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        if sigma > T::zero() {
            let inv = T::one() / sigma;
            for i in 0..m {
                u[(i, k)] = cols[j][i] * inv;
            }
        }
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
    }
    Ok(ComplexSvd { u, s, v, sweeps })
}

/// `p ← c·p − s·(q·φ)`, `q ← s·p + c·(q·φ)` with `φ` the unit phase that makes
/// the pair's inner product real.
fn rotate<T: Real>(cols: &mut [Vec<Complex<T>>], p: usize, q: usize, phase: Complex<T>, cs: T, sn: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * cs - yq * sn;
        *y = xp * sn + yq * cs;
    }
}

/// Reads the quaternion vector whose complex adjoint has `w` as first column.
fn quaternion_from_first_column<T: Real>(w: &[Complex<T>]) -> Vec<Quaternion<T>> {
    w.chunks_exact(2)
        .map(|pair| {
            let z1 = pair[0];
            let z2 = -pair[1].conj();
            Quaternion::new(z1.re, z1.im, z2.re, z2.im)
        })
        .collect()
}

fn vec_norm<T: Real>(x: &[Quaternion<T>]) -> T {
    x.iter().map(|q| q.norm_sqr()).sum::<T>().sqrt()
}

/// Removes the components of `x` along `basis` (right-module projection,
/// `x ← x − b (bᴴx)`), twice for stability.
fn orthogonalize<T: Real>(x: &mut [Quaternion<T>], basis: &[Vec<Quaternion<T>>]) {
    for _ in 0..2 {
        for b in basis {
            let mut coef = Quaternion::zero();
            for (bi, xi) in b.iter().zip(x.iter()) {
                coef.mul_add_assign(bi.conj(), *xi);
            }
            for (bi, xi) in b.iter().zip(x.iter_mut()) {
                *xi -= *bi * coef;
            }
        }
    }
}

/// Extends `basis` greedily with the canonical vectors of largest residual
/// until it has `dim` orthonormal members.
fn complete_basis<T: Real>(basis: &mut Vec<Vec<Quaternion<T>>>, dim: usize) {
    while basis.len() < dim {
        let mut best: Option<(T, Vec<Quaternion<T>>)> = None;
        for e in 0..dim {
            let mut x = vec![Quaternion::zero(); dim];
            x[e] = Quaternion::one();
            orthogonalize(&mut x, basis);
            let nx = vec_norm(&x);
            if best.as_ref().is_none_or(|(b, _)| nx > *b) {
                best = Some((nx, x));
            }
        }
        let (nx, mut x) = best.expect("dim > 0");
        let inv = T::one() / nx;
        x.iter_mut().for_each(|q| *q = q.scale(inv));
        basis.push(x);
    }
}

fn columns_to_matrix<T: Real>(rows: usize, cols: &[Vec<Quaternion<T>>]) -> QMatrix<T> {
    QMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Quaternion SVD through the complex adjoint.
///
/// Each quaternion singular value appears twice among the singular values of
/// the `2m × 2n` embedding. Right singular vectors are read back from the
/// complex ones in descending order and kept when they add a new quaternion
/// direction; `U` is formed from `A v / σ` and completed to a unitary matrix.
pub fn qsvd<T: Real>(a: &QMatrix<T>) -> Result<QsvdFactors<T>> {
    let (m, n) = a.shape();
    if m < n {
        let t = qsvd(&a.adjoint())?;
        return Ok(QsvdFactors { u: t.v, s: t.s, v: t.u });
    }
    if n == 0 {
        let mut basis = Vec::new();
        complete_basis(&mut basis, m);
        return Ok(QsvdFactors { u: columns_to_matrix(m, &basis), s: Vec::new(), v: QMatrix::zeros(0, 0) });
    }
    let csvd = jacobi_svd(&a.to_complex_adjoint())?;

    let mut vbasis: Vec<Vec<Quaternion<T>>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let half = T::lit(0.5);
    for k in 0..2 * n {
        if vbasis.len() == n {
            break;
        }
        let w: Vec<Complex<T>> = (0..2 * n).map(|i| csvd.v[(i, k)]).collect();
        let mut x = quaternion_from_first_column(&w);
        orthogonalize(&mut x, &vbasis);
        let nx = vec_norm(&x);
        if nx > half {
            let inv = T::one() / nx;
            x.iter_mut().for_each(|q| *q = q.scale(inv));
            vbasis.push(x);
            s.push(csvd.s[k]);
        }
    }
    // Numerically degenerate extraction; fill from canonical directions.
    if vbasis.len() < n {
        complete_basis(&mut vbasis, n);
        s.resize(n, T::zero());
    }
    let v = columns_to_matrix(n, &vbasis);

    let smax = s.first().copied().unwrap_or(T::zero());
    let floor = T::epsilon() * T::lit(m as f64) * smax;
    let av = a.matmul(&v)?;
    let mut ubasis: Vec<Vec<Quaternion<T>>> = Vec::with_capacity(m);
    for (k, &sk) in s.iter().enumerate() {
        if !(sk > floor) {
            break;
        }
        let mut x: Vec<Quaternion<T>> = (0..m).map(|i| av[(i, k)].scale(T::one() / sk)).collect();
        orthogonalize(&mut x, &ubasis);
        let nx = vec_norm(&x);
        let inv = T::one() / nx;
        x.iter_mut().for_each(|q| *q = q.scale(inv));
        ubasis.push(x);
    }
    complete_basis(&mut ubasis, m);
    let u = columns_to_matrix(m, &ubasis);
    Ok(QsvdFactors { u, s, v })
}
