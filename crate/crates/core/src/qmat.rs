//! Dense quaternion matrices.
//!
//! Storage is row-major `Vec<Quaternion<T>>`. Products keep the left/right
//! order of their operands; `lscale` and `rscale` are distinct on purpose.

use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;
use crate::rng::GaussianStream;
use crate::scalar::Real;

/// Upper bound on worker threads for `matmul`, from `QUATPINV_THREADS` (default 1).
pub fn thread_limit() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("QUATPINV_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or(1)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion<T>>,
}

impl<T: Real> QMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Quaternion::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Quaternion::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Quaternion<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims("from_vec", (rows, cols), (data.len(), 1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from row-major values.
    pub fn from_real(rows: usize, cols: usize, values: &[T]) -> Result<Self> {
        Self::from_vec(rows, cols, values.iter().map(|&x| Quaternion::real(x)).collect())
    }

    pub fn from_diag(diag: &[Quaternion<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &q) in diag.iter().enumerate() {
            m.data[i * n + i] = q;
        }
        m
    }

    /// Matrix with i.i.d. quaternion standard normal entries (each of the four
    /// components is N(0, 1)), drawn row-major from [`GaussianStream`].
    pub fn randn(rows: usize, cols: usize, seed: u64) -> Self {
        let mut g = GaussianStream::new(seed);
        Self::randn_from(rows, cols, &mut g)
    }

    pub fn randn_from(rows: usize, cols: usize, g: &mut GaussianStream) -> Self {
        let data = (0..rows * cols).map(|_| g.quaternion()).collect();
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Quaternion<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Quaternion<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Quaternion<T>> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Quaternion<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn cast<U: Real>(&self) -> QMatrix<U> {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.cast()).collect() }
    }

    /// Quaternionic conjugate transpose `Aᴴ`.
    pub fn adjoint(&self) -> Self {
        let (m, n) = self.shape();
        let mut out = Self::zeros(n, m);
        for i in 0..m {
            for j in 0..n {
                out.data[j * m + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// `C = A·B`, `C[i,j] = Σₗ A[i,l]·B[l,j]`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims("matmul", self.shape(), rhs.shape()));
        }
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = Self::zeros(m, n);
        if m == 0 || n == 0 {
            return Ok(out);
        }
        let planes = Planes::split(rhs);
        let threads = thread_limit().min(m);
        if threads <= 1 || m * n * k < 32_768 {
            matmul_rows(&self.data, k, &planes, 0, &mut out.data);
        } else {
            let chunk_rows = m.div_ceil(threads);
            std::thread::scope(|s| {
                for (c, chunk) in out.data.chunks_mut(chunk_rows * n).enumerate() {
                    let planes = &planes;
                    let a = &self.data;
                    s.spawn(move || matmul_rows(a, k, planes, c * chunk_rows, chunk));
                }
            });
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(Quaternion<T>, Quaternion<T>) -> Quaternion<T>) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::dims(op, self.shape(), rhs.shape()));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&x, &y)| f(x, y)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |x, y| x + y)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |x, y| x - y)
    }

    /// Entrywise quaternion product `A ⊛ B` (left operand first).
    pub fn hadamard(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "hadamard", |x, y| x * y)
    }

    /// `self += t · rhs`.
    pub fn axpy(&mut self, t: T, rhs: &Self) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::dims("axpy", self.shape(), rhs.shape()));
        }
        for (x, &y) in self.data.iter_mut().zip(&rhs.data) {
            *x += y.scale(t);
        }
        Ok(())
    }

    pub fn scale(&self, t: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|q| q.scale(t)).collect() }
    }

    /// `q · A`.
    pub fn lscale(&self, q: Quaternion<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| q * x).collect() }
    }

    /// `A · q`.
    pub fn rscale(&self, q: Quaternion<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * q).collect() }
    }

    /// `I − A` for square `A`.
    pub fn identity_minus(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::dims("identity_minus", self.shape(), self.shape()));
        }
        let n = self.rows;
        let mut out = self.scale(-T::one());
        for i in 0..n {
            out.data[i * n + i] += Quaternion::one();
        }
        Ok(out)
    }

    /// Adds `t` to every diagonal entry of a square matrix.
    pub fn shift_diag(&mut self, t: T) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i].a += t;
        }
    }

    pub fn fro_norm_sqr(&self) -> T {
        self.data.iter().map(|q| q.norm_sqr()).sum()
    }

    pub fn fro_norm(&self) -> T {
        // Scaled accumulation avoids overflow for large entries.
        let scale = self.max_abs();
        if scale == T::zero() || !scale.is_finite() {
            return scale;
        }
        let inv = T::one() / scale;
        let s: T = self.data.iter().map(|q| q.scale(inv).norm_sqr()).sum();
        scale * s.sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|q| q.norm()).fold(T::zero(), T::max)
    }

    /// Frobenius inner product `Re tr(Aᴴ B)`.
    pub fn re_inner(&self, rhs: &Self) -> Result<T> {
        if self.shape() != rhs.shape() {
            return Err(Error::dims("re_inner", self.shape(), rhs.shape()));
        }
        Ok(self.data.iter().zip(&rhs.data).map(|(x, y)| x.re_dot(*y)).sum())
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Result<T> {
        Ok(self.sub(rhs)?.max_abs())
    }

    /// `‖A − B‖_F / ‖B‖_F` (absolute difference when `B = 0`).
    pub fn rel_diff(&self, reference: &Self) -> Result<T> {
        let d = self.sub(reference)?.fro_norm();
        let r = reference.fro_norm();
        Ok(if r > T::zero() { d / r } else { d })
    }

    /// `‖A − Aᴴ‖_F` for square matrices.
    pub fn hermitian_defect(&self) -> Result<T> {
        Ok(self.sub(&self.adjoint())?.fro_norm())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.rows) {
            return Err(Error::dims("select_rows", self.shape(), (bad, 0)));
        }
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Ok(Self { rows: idx.len(), cols: self.cols, data })
    }

    pub fn select_cols(&self, idx: &[usize]) -> Result<Self> {
        if let Some(&bad) = idx.iter().find(|&&j| j >= self.cols) {
            return Err(Error::dims("select_cols", self.shape(), (0, bad)));
        }
        Ok(Self::from_fn(self.rows, idx.len(), |i, c| self[(i, idx[c])]))
    }

    /// Column `j` as an `m × 1` matrix.
    pub fn column(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    /// Estimate of `‖A‖₂` by `iters` power iterations on `AᴴA` from a seeded
    /// Gaussian start; returns the square root of the final Rayleigh quotient.
    pub fn op_norm_est(&self, iters: usize, seed: u64) -> T {
        let n = self.cols;
        if n == 0 || self.rows == 0 || self.max_abs() == T::zero() {
            return T::zero();
        }
        let ah = self.adjoint();
        let mut v = Self::randn(n, 1, seed);
        let mut est = T::zero();
        for _ in 0..iters.max(1) {
            let nv = v.fro_norm();
            if nv == T::zero() {
                break;
            }
            v = v.scale(T::one() / nv);
            let av = self.matmul(&v).expect("shapes checked");
            est = av.fro_norm();
            v = ah.matmul(&av).expect("shapes checked");
        }
        est
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    /// Complex adjoint embedding: each entry `q = a + bi + cj + dk` becomes the
    /// block `[[a+bi, c+di], [−c+di, a−bi]]`, blocks laid out row-major.
    pub fn to_complex_adjoint(&self) -> ComplexMatrix<T> {
        let (m, n) = self.shape();
        let mut out = ComplexMatrix::zeros(2 * m, 2 * n);
        for i in 0..m {
            for j in 0..n {
                let q = self[(i, j)];
                out[(2 * i, 2 * j)] = Complex::new(q.a, q.b);
                out[(2 * i, 2 * j + 1)] = Complex::new(q.c, q.d);
                out[(2 * i + 1, 2 * j)] = Complex::new(-q.c, q.d);
                out[(2 * i + 1, 2 * j + 1)] = Complex::new(q.a, -q.b);
            }
        }
        out
    }

    /// Inverse of [`to_complex_adjoint`](Self::to_complex_adjoint). Reads `a, b`
    /// from each block's top-left and `c, d` from its top-right entry after
    /// checking the bottom row against the required symmetry.
    pub fn from_complex_adjoint(c: &ComplexMatrix<T>) -> Result<Self> {
        if !c.rows().is_multiple_of(2) || !c.cols().is_multiple_of(2) {
            return Err(Error::StructureViolation(format!(
                "embedding must have even dimensions, got {}x{}",
                c.rows(),
                c.cols()
            )));
        }
        let (m, n) = (c.rows() / 2, c.cols() / 2);
        let tol = T::lit(1e-8) * c.fro_norm();
        let mut defect = T::zero();
        let out = Self::from_fn(m, n, |i, j| {
            let z1 = c[(2 * i, 2 * j)];
            let z2 = c[(2 * i, 2 * j + 1)];
            let lo_left = c[(2 * i + 1, 2 * j)];
            let lo_right = c[(2 * i + 1, 2 * j + 1)];
            let d1 = lo_left + z2.conj();
            let d2 = lo_right - z1.conj();
            defect += d1.norm_sqr() + d2.norm_sqr();
            Quaternion::new(z1.re, z1.im, z2.re, z2.im)
        });
        let defect = defect.sqrt();
        if defect > tol {
            return Err(Error::StructureViolation(format!(
                "block symmetry defect {} exceeds tolerance {}",
                defect, tol
            )));
        }
        Ok(out)
    }
}

/// Right operand split into four component planes so the inner product loop
/// runs over contiguous reals.
struct Planes<T> {
    cols: usize,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> Planes<T> {
    fn split(m: &QMatrix<T>) -> Self {
        let len = m.data.len();
        let mut p = Planes {
            cols: m.cols,
            a: Vec::with_capacity(len),
            b: Vec::with_capacity(len),
            c: Vec::with_capacity(len),
            d: Vec::with_capacity(len),
        };
        for q in &m.data {
            p.a.push(q.a);
            p.b.push(q.b);
            p.c.push(q.c);
            p.d.push(q.d);
        }
        p
    }
}

/// Fills `out` (whole output rows starting at `first_row`) with rows of `A·B`.
/// Each output row is computed independently in a fixed order, so the result
/// does not depend on how rows are partitioned across threads.
fn matmul_rows<T: Real>(a: &[Quaternion<T>], k: usize, b: &Planes<T>, first_row: usize, out: &mut [Quaternion<T>]) {
    let n = b.cols;
    let mut ca = vec![T::zero(); n];
    let mut cb = vec![T::zero(); n];
    let mut cc = vec![T::zero(); n];
    let mut cd = vec![T::zero(); n];
    for (r, out_row) in out.chunks_mut(n).enumerate() {
        let i = first_row + r;
        ca.iter_mut().for_each(|x| *x = T::zero());
        cb.iter_mut().for_each(|x| *x = T::zero());
        cc.iter_mut().for_each(|x| *x = T::zero());
        cd.iter_mut().for_each(|x| *x = T::zero());
        for l in 0..k {
            let p = a[i * k + l];
            let (ba, bb, bc, bd) = (
                &b.a[l * n..(l + 1) * n],
                &b.b[l * n..(l + 1) * n],
                &b.c[l * n..(l + 1) * n],
                &b.d[l * n..(l + 1) * n],
            );
            for j in 0..n {
                ca[j] += p.a * ba[j] - p.b * bb[j] - p.c * bc[j] - p.d * bd[j];
            }
            for j in 0..n {
                cb[j] += p.a * bb[j] + p.b * ba[j] + p.c * bd[j] - p.d * bc[j];
            }
            for j in 0..n {
                cc[j] += p.a * bc[j] - p.b * bd[j] + p.c * ba[j] + p.d * bb[j];
            }
            for j in 0..n {
                cd[j] += p.a * bd[j] + p.b * bc[j] - p.c * bb[j] + p.d * ba[j];
            }
        }
        for (j, q) in out_row.iter_mut().enumerate() {
            *q = Quaternion::new(ca[j], cb[j], cc[j], cd[j]);
        }
    }
}

impl<T> Index<(usize, usize)> for QMatrix<T> {
    type Output = Quaternion<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for QMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Binary sampling mask Ω.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    keep: Vec<bool>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize, keep: Vec<bool>) -> Result<Self> {
        if keep.len() != rows * cols {
            return Err(Error::dims("mask", (rows, cols), (keep.len(), 1)));
        }
        Ok(Self { rows, cols, keep })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self { rows, cols, keep: vec![true; rows * cols] }
    }

    /// Keeps each entry independently with probability `1 − missing`.
    pub fn random(rows: usize, cols: usize, missing: f64, seed: u64) -> Self {
        let mut g = GaussianStream::new(seed);
        let keep = (0..rows * cols).map(|_| g.uniform() >= missing).collect();
        Self { rows, cols, keep }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.keep[i * self.cols + j]
    }

    pub fn observed_fraction(&self) -> f64 {
        self.keep.iter().filter(|&&k| k).count() as f64 / self.keep.len().max(1) as f64
    }

    /// `Ω ⊛ A`.
    pub fn apply<T: Real>(&self, a: &QMatrix<T>) -> Result<QMatrix<T>> {
        if a.shape() != self.shape() {
            return Err(Error::dims("mask.apply", self.shape(), a.shape()));
        }
        let data = a
            .data
            .iter()
            .zip(&self.keep)
            .map(|(&q, &k)| if k { q } else { Quaternion::zero() })
            .collect();
        Ok(QMatrix { rows: a.rows, cols: a.cols, data })
    }

    /// `Ω ⊛ observed + (1 − Ω) ⊛ fill`, copying observed entries verbatim.
    pub fn blend<T: Real>(&self, observed: &QMatrix<T>, fill: &QMatrix<T>) -> Result<QMatrix<T>> {
        if observed.shape() != self.shape() || fill.shape() != self.shape() {
            return Err(Error::dims("mask.blend", observed.shape(), fill.shape()));
        }
        let data = observed
            .data
            .iter()
            .zip(&fill.data)
            .zip(&self.keep)
            .map(|((&m, &x), &k)| if k { m } else { x })
            .collect();
        Ok(QMatrix { rows: observed.rows, cols: observed.cols, data })
    }
}

/// Dense complex matrix, used only by the adjoint embedding and the SVD route.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims("complex from_vec", (rows, cols), (data.len(), 1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn fro_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dims("complex matmul", (self.rows, self.cols), (rhs.rows, rhs.cols)));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                for j in 0..rhs.cols {
                    let b = rhs[(l, j)];
                    out[(i, j)] += a * b;
                }
            }
        }
        Ok(out)
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}
