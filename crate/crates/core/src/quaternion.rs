//! Scalar quaternion arithmetic over a real field.
//!
//! `q = a + b·i + c·j + d·k` with `i² = j² = k² = ijk = −1`. Multiplication is
//! associative but not commutative, so every product in this crate keeps its
//! operand order explicit.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A quaternion stored as four contiguous reals in `(a, b, c, d)` order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[repr(C)]
pub struct Quaternion<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Quaternion<T> {
    #[inline]
    pub const fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn one() -> Self {
        Self::real(T::one())
    }

    #[inline]
    pub fn real(a: T) -> Self {
        Self::new(a, T::zero(), T::zero(), T::zero())
    }

    pub fn i() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn j() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn k() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    /// Conjugate `a − bi − cj − dk`.
    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    /// `|q|² = a² + b² + c² + d²`.
    #[inline]
    pub fn norm_sqr(self) -> T {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Euclidean norm, computed without overflow for large components.
    #[inline]
    pub fn norm(self) -> T {
        self.a.hypot(self.b).hypot(self.c.hypot(self.d))
    }

    /// `q⁻¹ = q̄ / |q|²`.
    pub fn inv(self) -> Result<Self> {
        let floor = T::lit(1e-300).max(T::min_positive_value());
        let n = self.norm();
        if !(n >= floor) {
            return Err(Error::DivisionByZero);
        }
        // Scale first so |q|² cannot underflow for tiny but valid q.
        let s = self.scale(T::one() / n);
        Ok(s.conj().scale(T::one() / n))
    }

    #[inline]
    pub fn scale(self, t: T) -> Self {
        Self::new(self.a * t, self.b * t, self.c * t, self.d * t)
    }

    /// Real part of `self · conj(other)`, the real inner product on ℍ ≅ ℝ⁴.
    #[inline]
    pub fn re_dot(self, other: Self) -> T {
        self.a * other.a + self.b * other.b + self.c * other.c + self.d * other.d
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Accumulates `self += p · q` without materialising the product.
    #[inline(always)]
    pub fn mul_add_assign(&mut self, p: Self, q: Self) {
        self.a += p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d;
        self.b += p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c;
        self.c += p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b;
        self.d += p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a;
    }

    pub fn cast<U: Real>(self) -> Quaternion<U> {
        let f = |x: T| U::lit(x.as_f64());
        Quaternion::new(f(self.a), f(self.b), f(self.c), f(self.d))
    }
}

impl<T: Real> Add for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl<T: Real> Sub for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl<T: Real> Neg for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

/// Hamilton product.
impl<T: Real> Mul for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn mul(self, q: Self) -> Self {
        let p = self;
        Self::new(
            p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
            p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
            p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
            p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
        )
    }
}

impl<T: Real> Mul<T> for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn mul(self, t: T) -> Self {
        self.scale(t)
    }
}

impl<T: Real> Div<T> for Quaternion<T> {
    type Output = Self;
    #[inline]
    fn div(self, t: T) -> Self {
        Self::new(self.a / t, self.b / t, self.c / t, self.d / t)
    }
}

impl<T: Real> AddAssign for Quaternion<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Quaternion<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Quaternion<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Sum for Quaternion<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, q| acc + q)
    }
}

impl<T: Real> From<T> for Quaternion<T> {
    fn from(a: T) -> Self {
        Self::real(a)
    }
}

impl<T: Real> fmt::Display for Quaternion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |x: T| if x.is_sign_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{}i{}{}j{}{}k",
            self.a,
            sign(self.b),
            self.b.abs(),
            sign(self.c),
            self.c.abs(),
            sign(self.d),
            self.d.abs()
        )
    }
}
