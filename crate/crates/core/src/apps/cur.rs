//! CUR low-rank reconstruction and impute–reconstruct matrix completion.

use crate::apps::image::gaussian_smooth;
use crate::error::{Error, Result};
use crate::factor::thin_qr;
use crate::qmat::Mask;
use crate::rng::GaussianStream;
use crate::QMat;

/// Middle factor of `C U R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurMode {
    /// `U = C† A R†`
    UOpt,
    /// `U = W†` with `W = A[I, J]`
    WPinv,
}

/// `C U R` with `C = A[:, J]`, `R = A[I, :]`; pseudoinverses come from `pinv`.
pub fn cur_reconstruct(
    a: &QMat,
    rows: &[usize],
    cols: &[usize],
    mode: CurMode,
    pinv: &dyn Fn(&QMat) -> Result<QMat>,
) -> Result<QMat> {
    if rows.len() != cols.len() {
        return Err(Error::InvalidConfig(format!(
            "CUR needs as many rows as columns, got {} and {}",
            rows.len(),
            cols.len()
        )));
    }
    let c = a.select_cols(cols)?;
    let r = a.select_rows(rows)?;
    let u = match mode {
        CurMode::UOpt => pinv(&c)?.matmul(a)?.matmul(&pinv(&r)?)?,
        CurMode::WPinv => pinv(&r.select_cols(cols)?)?,
    };
    c.matmul(&u)?.matmul(&r)
}

#[derive(Clone, Debug)]
pub struct CompletionProblem {
    /// Observed data with unobserved entries zero.
    pub observed: QMat,
    pub mask: Mask,
    pub rank: usize,
    pub iters: usize,
    pub row_idx: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub smoothing_sigma: Option<f64>,
    pub mode: CurMode,
}

fn full_column_rank(m: &QMat) -> bool {
    if m.rows() >= m.cols() {
        thin_qr(m).is_ok()
    } else {
        false
    }
}

impl CompletionProblem {
    /// Samples `rank` row and column indices uniformly with replacement. A draw
    /// whose `C` or `R` is numerically rank deficient on the zero-filled data is
    /// redrawn once; the second draw is kept either way.
    pub fn new(observed: QMat, mask: Mask, rank: usize, iters: usize, seed: u64) -> Result<Self> {
        let (m, n) = observed.shape();
        if mask.shape() != (m, n) {
            return Err(Error::dims("completion mask", mask.shape(), (m, n)));
        }
        if rank == 0 || rank > m.min(n) {
            return Err(Error::InvalidConfig(format!("rank {rank} must lie in 1..={}", m.min(n))));
        }
        let observed = mask.apply(&observed)?;
        let mut g = GaussianStream::new(seed);
        let mut draw = || -> (Vec<usize>, Vec<usize>) {
            let rows = (0..rank).map(|_| g.index(m)).collect();
            let cols = (0..rank).map(|_| g.index(n)).collect();
            (rows, cols)
        };
        let (mut row_idx, mut col_idx) = draw();
        let usable = |r: &[usize], c: &[usize]| -> Result<bool> {
            Ok(full_column_rank(&observed.select_cols(c)?) && full_column_rank(&observed.select_rows(r)?.adjoint()))
        };
        if !usable(&row_idx, &col_idx)? {
            (row_idx, col_idx) = draw();
        }
        Ok(Self { observed, mask, rank, iters, row_idx, col_idx, smoothing_sigma: None, mode: CurMode::UOpt })
    }
}

/// Alternates `X ← L(C)` (CUR reconstruction, optionally smoothed) with
/// `C ← Ω⊛M + (1 − Ω)⊛X`, starting from `C = Ω⊛M`. Returns the last `X` and
/// `‖Ω⊛(X − M)‖_F` after every round.
pub fn complete(problem: &CompletionProblem, pinv: &dyn Fn(&QMat) -> Result<QMat>) -> Result<(QMat, Vec<f64>)> {
    let mut history = Vec::with_capacity(problem.iters);
    let x = complete_with(problem, pinv, |_, _, r| history.push(r))?;
    Ok((x, history))
}

/// [`complete`] with `observe(round, X, residual)` called after every round,
/// rounds counted from 1.
pub fn complete_with(
    problem: &CompletionProblem,
    pinv: &dyn Fn(&QMat) -> Result<QMat>,
    mut observe: impl FnMut(usize, &QMat, f64),
) -> Result<QMat> {
    let p = problem;
    let mut filled = p.observed.clone();
    let mut x = filled.clone();
    for round in 1..=p.iters {
        x = cur_reconstruct(&filled, &p.row_idx, &p.col_idx, p.mode, pinv)?;
        if let Some(sigma) = p.smoothing_sigma {
            x = gaussian_smooth(&x, sigma)?;
        }
        observe(round, &x, p.mask.apply(&x.sub(&p.observed)?)?.fro_norm());
        filled = p.mask.blend(&p.observed, &x)?;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{pinv_normal_eq, DEFAULT_RIDGE};

    fn pinv(a: &QMat) -> Result<QMat> {
        pinv_normal_eq(a, DEFAULT_RIDGE)
    }

    fn low_rank(m: usize, n: usize, r: usize, seed: u64) -> QMat {
        QMat::randn(m, r, seed).matmul(&QMat::randn(r, n, seed + 1000).adjoint().adjoint()).unwrap()
    }

    #[test]
    fn exact_rank_reconstruction() {
        let a = low_rank(30, 25, 4, 1);
        let rows = [3, 7, 11, 20];
        let cols = [0, 5, 9, 17];
        let x = cur_reconstruct(&a, &rows, &cols, CurMode::UOpt, &pinv).unwrap();
        assert!(x.sub(&a).unwrap().fro_norm() <= 1e-8 * a.fro_norm());
        let y = cur_reconstruct(&a, &rows, &cols, CurMode::WPinv, &pinv).unwrap();
        assert!(y.rel_diff(&x).unwrap() <= 1e-6);
    }

    #[test]
    fn identity_with_all_indices() {
        let idx: Vec<usize> = (0..5).collect();
        let exact = |a: &QMat| pinv_normal_eq(a, 0.0);
        let x = cur_reconstruct(&QMat::identity(5), &idx, &idx, CurMode::UOpt, &exact).unwrap();
        assert!(x.sub(&QMat::identity(5)).unwrap().max_abs() < 1e-12);
        assert!(cur_reconstruct(&QMat::identity(5), &idx[..2], &idx, CurMode::UOpt, &pinv).is_err());
    }

    #[test]
    fn full_mask_reduces_to_one_reconstruction() {
        let a = QMat::randn(12, 10, 3);
        let mut prob = CompletionProblem::new(a.clone(), Mask::full(12, 10), 3, 2, 5).unwrap();
        prob.iters = 1;
        let (x, h) = complete(&prob, &pinv).unwrap();
        let direct = cur_reconstruct(&a, &prob.row_idx, &prob.col_idx, CurMode::UOpt, &pinv).unwrap();
        assert_eq!(x, direct);
        assert!((h[0] - direct.sub(&a).unwrap().fro_norm()).abs() <= 1e-12 * h[0]);
    }

    #[test]
    fn smoothing_changes_output_but_not_observed_entries() {
        let a = low_rank(20, 20, 3, 4);
        let mask = Mask::random(20, 20, 0.5, 9);
        let mut prob = CompletionProblem::new(a.clone(), mask.clone(), 3, 3, 2).unwrap();
        let (plain, _) = complete(&prob, &pinv).unwrap();
        prob.smoothing_sigma = Some(0.5);
        let (smooth, _) = complete(&prob, &pinv).unwrap();
        assert_ne!(plain, smooth);
        let next = mask.blend(&prob.observed, &smooth).unwrap();
        assert_eq!(mask.apply(&next).unwrap(), mask.apply(&a).unwrap());
    }

    #[test]
    fn rejects_bad_rank() {
        let a = QMat::randn(4, 4, 1);
        assert!(CompletionProblem::new(a.clone(), Mask::full(4, 4), 0, 1, 0).is_err());
        assert!(CompletionProblem::new(a, Mask::full(4, 3), 2, 1, 0).is_err());
    }
}
