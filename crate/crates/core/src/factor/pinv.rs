use crate::error::Result;
use crate::factor::hpd::hpd_solve;
use crate::factor::svd::qsvd;
use crate::qmat::QMatrix;
use crate::quaternion::Quaternion;
use crate::scalar::Real;

/// Singular values at or below `rank_tol · σ_max` are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// `A† = V Σ† Uᴴ` from the quaternion SVD.
pub fn pinv_qsvd<T: Real>(a: &QMatrix<T>, rank_tol: T) -> Result<QMatrix<T>> {
    let (m, n) = a.shape();
    let f = qsvd(a)?;
    let smax = f.s.first().copied().unwrap_or(T::zero());
    let cut = rank_tol * smax;
    // V Σ† has columns v_k / σ_k for the retained k.
    let vs = QMatrix::from_fn(n, m, |i, k| match f.s.get(k) {
        Some(&s) if s > cut && s > T::zero() => f.v[(i, k)].scale(T::one() / s),
        _ => Quaternion::zero(),
    });
    vs.matmul(&f.u.adjoint())
}

/// Closed forms `(AᴴA)⁻¹Aᴴ` for `m ≥ n` and `Aᴴ(AAᴴ)⁻¹` for `m < n`.
pub fn pinv_normal_eq<T: Real>(a: &QMatrix<T>, ridge: T) -> Result<QMatrix<T>> {
    let ah = a.adjoint();
    if a.rows() >= a.cols() {
        let g = ah.matmul(a)?;
        hpd_solve(&g, &ah, ridge)
    } else {
        // Aᴴ(AAᴴ)⁻¹ = ((AAᴴ)⁻¹A)ᴴ since AAᴴ is Hermitian.
        let g = a.matmul(&ah)?;
        Ok(hpd_solve(&g, a, ridge)?.adjoint())
    }
}
