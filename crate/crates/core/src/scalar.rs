//! Scalar abstraction shared by the matrix and Born-rule code.
//!
//! The protocol path only ever uses [`Dyadic`], but the quantum model, the
//! Kronecker oracle and the validation residuals are written once over any
//! ring-like scalar so the same code can run exactly (dyadic or rational) or
//! in floating point for quick diagnostics.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dyadic::Dyadic;

/// A real scalar closed under `+`, `-`, `*` with a total-enough order.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
{
    /// Converts an exact dyadic into this scalar type (rounding for floats).
    fn from_dyadic(d: &Dyadic) -> Self;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_f64()
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_dyadic(d: &Dyadic) -> Self {
        d.to_f64() as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Dyadic {
    fn from_dyadic(d: &Dyadic) -> Self {
        d.clone()
    }

    fn to_f64(&self) -> f64 {
        Dyadic::to_f64(self)
    }

    fn abs(&self) -> Self {
        Dyadic::abs(self)
    }
}

impl Scalar for BigRational {
    fn from_dyadic(d: &Dyadic) -> Self {
        let e = d.exponent();
        let m = d.mantissa().clone();
        if e >= 0 {
            BigRational::from_integer(m << (e as usize))
        } else {
            BigRational::new(m, BigInt::one() << ((-e) as usize))
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Complex number over a [`Scalar`]. Arithmetic is exact whenever `S` is.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Complex<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> Complex<S> {
    pub fn new(re: S, im: S) -> Self {
        Self { re, im }
    }

    pub fn real(re: S) -> Self {
        Self { re, im: S::zero() }
    }

    pub fn zero() -> Self {
        Self::real(S::zero())
    }

    pub fn one() -> Self {
        Self::real(S::one())
    }

    pub fn i() -> Self {
        Self::new(S::zero(), S::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> S {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn scale(&self, k: &S) -> Self {
        Self::new(self.re.clone() * k.clone(), self.im.clone() * k.clone())
    }

    /// Largest of the absolute real and imaginary parts.
    pub fn max_part_abs(&self) -> S {
        let a = self.re.abs();
        let b = self.im.abs();
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Complex<T> {
        Complex::new(f(&self.re), f(&self.im))
    }
}

impl<S: Scalar> Add for Complex<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<'a, S: Scalar> Add<&'a Complex<S>> for &'a Complex<S> {
    type Output = Complex<S>;
    fn add(self, rhs: Self) -> Complex<S> {
        Complex::new(
            self.re.clone() + rhs.re.clone(),
            self.im.clone() + rhs.im.clone(),
        )
    }
}

impl<S: Scalar> Sub for Complex<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<'a, S: Scalar> Sub<&'a Complex<S>> for &'a Complex<S> {
    type Output = Complex<S>;
    fn sub(self, rhs: Self) -> Complex<S> {
        Complex::new(
            self.re.clone() - rhs.re.clone(),
            self.im.clone() - rhs.im.clone(),
        )
    }
}

impl<S: Scalar> Neg for Complex<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl<'a, S: Scalar> Mul<&'a Complex<S>> for &'a Complex<S> {
    type Output = Complex<S>;
    fn mul(self, rhs: Self) -> Complex<S> {
        // (ac - bd) + (ad + bc)i
        let ac = self.re.clone() * rhs.re.clone();
        let bd = self.im.clone() * rhs.im.clone();
        let ad = self.re.clone() * rhs.im.clone();
        let bc = self.im.clone() * rhs.re.clone();
        Complex::new(ac - bd, ad + bc)
    }
}

impl<S: Scalar> Mul for Complex<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}
