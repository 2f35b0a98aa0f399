//! Scalar abstraction: plain complex numbers and forward-mode dual numbers.
//!
//! The coefficient systems (Toeplitz and dense solves, interpolation data,
//! η₀, …) are written generically over [`Scalar`] so that they can be
//! evaluated either on plain values or on dual numbers carrying a directional
//! derivative. The dual path gives the exact derivative of the gauge matrix
//! along a deformation without finite differences.

use num_complex::Complex;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// The base complex scalar used everywhere.
pub type C = Complex<f64>;

/// Shorthand constructor.
#[inline(always)]
pub fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

/// Field operations needed by the generic solvers and gauge evaluators.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_c(z: C) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    /// Magnitude of the underlying value, used for pivot selection and
    /// singularity detection.
    fn mag(&self) -> f64;

    #[inline(always)]
    fn from_f(x: f64) -> Self {
        Self::from_c(C::new(x, 0.0))
    }

    /// Integer power (n may be negative).
    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Self::one() / self.powi(-n);
        }
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for C {
    #[inline(always)]
    fn from_c(z: C) -> Self {
        z
    }
    #[inline(always)]
    fn zero() -> Self {
        C::new(0.0, 0.0)
    }
    #[inline(always)]
    fn one() -> Self {
        C::new(1.0, 0.0)
    }
    #[inline(always)]
    fn mag(&self) -> f64 {
        self.norm()
    }
}

/// Forward-mode dual number over ℂ: value plus one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub val: C,
    pub dot: C,
}

impl Dual {
    #[inline(always)]
    pub fn new(val: C, dot: C) -> Self {
        Dual { val, dot }
    }
    /// A constant (zero derivative).
    #[inline(always)]
    pub fn constant(val: C) -> Self {
        Dual { val, dot: C::new(0.0, 0.0) }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline(always)]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.val + rhs.val, self.dot + rhs.dot)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline(always)]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.val - rhs.val, self.dot - rhs.dot)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline(always)]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.val * rhs.val, self.dot * rhs.val + self.val * rhs.dot)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline(always)]
    fn div(self, rhs: Dual) -> Dual {
        let v = self.val / rhs.val;
        Dual::new(v, (self.dot - v * rhs.dot) / rhs.val)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline(always)]
    fn neg(self) -> Dual {
        Dual::new(-self.val, -self.dot)
    }
}

impl Scalar for Dual {
    #[inline(always)]
    fn from_c(z: C) -> Self {
        Dual::constant(z)
    }
    #[inline(always)]
    fn zero() -> Self {
        Dual::constant(C::new(0.0, 0.0))
    }
    #[inline(always)]
    fn one() -> Self {
        Dual::constant(C::new(1.0, 0.0))
    }
    #[inline(always)]
    fn mag(&self) -> f64 {
        self.val.norm()
    }
}
