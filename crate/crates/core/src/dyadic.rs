//! Exact dyadic rationals (`mantissa · 2^exponent`) and the t-bit
//! truncation / approximation algebra used on the protocol path.
//!
//! Nothing in this module rounds implicitly: `+`, `-`, `*` and comparisons
//! are exact. The only lossy operations are [`truncate`] and [`clamp_unit`],
//! both of which are explicit.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Complex;

/// Number of fractional bits `t` of an approximation; the error radius is `2^-t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(pub u32);

impl Precision {
    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn next(self) -> Self {
        Precision(self.0 + 1)
    }

    /// The error radius `2^-t` as an exact dyadic.
    pub fn radius(self) -> Dyadic {
        Dyadic::pow2(-(self.0 as i64))
    }

    /// `self - loss`, or `None` when that would go negative.
    pub fn checked_sub(self, loss: u32) -> Option<Self> {
        self.0.checked_sub(loss).map(Precision)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DyadicError {
    #[error("{k}-bit inputs cannot certify a product of {factors} factors (need at least {needed} bits)")]
    InsufficientPrecision { k: u32, factors: usize, needed: u32 },
    #[error("malformed dyadic encoding: {0}")]
    Malformed(String),
}

/// Exact binary fixed-point value `mantissa · 2^exponent`.
///
/// Canonical form: the mantissa is odd, or the value is zero with exponent 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

/// Complex value with exact dyadic parts.
pub type CDyadic = Complex<Dyadic>;

fn add_exp(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("dyadic exponent overflow")
}

/// `⌈lg n⌉` for `n ≥ 1` (0 for `n = 1`).
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1, "ceil_log2 of zero");
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        let mut d = Dyadic { mantissa, exponent };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        match self.mantissa.trailing_zeros() {
            None => self.exponent = 0,
            Some(0) => {}
            Some(tz) => {
                self.mantissa >>= tz as usize;
                self.exponent = add_exp(self.exponent, tz as i64);
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic { mantissa: BigInt::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mantissa: BigInt::one(), exponent: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { mantissa: BigInt::one(), exponent: e }
    }

    /// `num / 2^shift`.
    pub fn from_ratio_pow2(num: i64, shift: u32) -> Self {
        Self::new(BigInt::from(num), -(shift as i64))
    }

    /// Exact conversion; every finite `f64` is a dyadic rational.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Self::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        Some(Self::new(BigInt::from(m) * sign, e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    /// Exact multiplication by `2^e`.
    pub fn shl(&self, e: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic { mantissa: self.mantissa.clone(), exponent: add_exp(self.exponent, e) }
    }

    /// Number of fractional bits needed to write the value exactly (0 for integers).
    pub fn fractional_bits(&self) -> u64 {
        if self.exponent >= 0 {
            0
        } else {
            self.exponent.unsigned_abs()
        }
    }

    /// `⌊|x| · 2^t⌋` as a non-negative integer.
    pub fn scaled_magnitude(&self, t: Precision) -> BigUint {
        let mag = self.mantissa.magnitude().clone();
        let e = add_exp(self.exponent, t.0 as i64);
        if e >= 0 {
            mag << (e as usize)
        } else {
            mag >> (e.unsigned_abs() as usize)
        }
    }

    /// Rebuilds `sign · magnitude · 2^-t`.
    pub fn from_sign_magnitude(negative: bool, magnitude: BigUint, t: Precision) -> Self {
        let sign = if magnitude.is_zero() {
            Sign::NoSign
        } else if negative {
            Sign::Minus
        } else {
            Sign::Plus
        };
        Self::new(BigInt::from_biguint(sign, magnitude), -(t.0 as i64))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits();
        let (m, e) = if bits > 60 {
            let shift = bits - 60;
            (&self.mantissa >> (shift as usize), add_exp(self.exponent, shift as i64))
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        let e = e.clamp(-2200, 2200) as i32;
        // split the power to avoid intermediate under/overflow
        let half = e / 2;
        mf * 2f64.powi(half) * 2f64.powi(e - half)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}p{} (~{})", self.mantissa, self.exponent, self.to_f64())
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}*2^{}", self.mantissa, self.exponent)
        }
    }
}

fn aligned<'a>(a: &'a Dyadic, b: &'a Dyadic) -> (BigInt, BigInt, i64) {
    match a.exponent.cmp(&b.exponent) {
        Ordering::Equal => (a.mantissa.clone(), b.mantissa.clone(), a.exponent),
        Ordering::Less => {
            let shift = (b.exponent - a.exponent) as usize;
            (a.mantissa.clone(), &b.mantissa << shift, a.exponent)
        }
        Ordering::Greater => {
            let shift = (a.exponent - b.exponent) as usize;
            (&a.mantissa << shift, b.mantissa.clone(), b.exponent)
        }
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (x, y, e) = aligned(self, rhs);
        Dyadic::new(x + y, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        let (x, y, e) = aligned(self, rhs);
        Dyadic::new(x - y, e)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // odd * odd is odd, so the product is already canonical
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: add_exp(self.exponent, rhs.exponent),
        }
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mantissa: -&self.mantissa, exponent: self.exponent }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let (x, y, _) = aligned(self, other);
        x.cmp(&y)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }
    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic::one()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

/// Sign-magnitude `t`-bit truncation `sign(x)·⌊|x|·2^t⌋ / 2^t`.
pub fn truncate(x: &Dyadic, t: Precision) -> Dyadic {
    if x.exponent >= -(t.0 as i64) {
        return x.clone();
    }
    Dyadic::from_sign_magnitude(x.is_negative(), x.scaled_magnitude(t), t)
}

/// Closed clamping interval. Passed explicitly so that matrix entries and
/// probabilities can snap to different ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct ClampRange {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl ClampRange {
    /// `[-1, 1]`, the range of real and imaginary parts of bounded entries.
    pub fn symmetric() -> Self {
        ClampRange { lo: Dyadic::from_int(-1), hi: Dyadic::one() }
    }

    /// `[0, 1]`, the range of probabilities.
    pub fn probability() -> Self {
        ClampRange { lo: Dyadic::zero(), hi: Dyadic::one() }
    }
}

/// `min(max(x, lo), hi)`.
pub fn clamp_unit(x: &Dyadic, range: &ClampRange) -> Dyadic {
    if *x < range.lo {
        range.lo.clone()
    } else if *x > range.hi {
        range.hi.clone()
    } else {
        x.clone()
    }
}

/// Clamps real and imaginary parts to `[-1, 1]` independently.
pub fn clamp_parts(z: &CDyadic) -> CDyadic {
    let r = ClampRange::symmetric();
    CDyadic::new(clamp_unit(&z.re, &r), clamp_unit(&z.im, &r))
}

/// Component-wise truncation of a complex value.
pub fn ctruncate(z: &CDyadic, t: Precision) -> CDyadic {
    CDyadic::new(truncate(&z.re, t), truncate(&z.im, t))
}

/// Exact complex product.
pub fn cmul(a: &CDyadic, b: &CDyadic) -> CDyadic {
    a * b
}

/// Multiplies k-bit approximations of unit-norm-bounded complex numbers up a
/// padded binary tree, clamping real and imaginary parts to `[-1, 1]` at every
/// level.
///
/// Returns the product together with its certified precision `k - 2⌈lg m⌉`.
pub fn approx_product_tree(factors: &[CDyadic], k: Precision) -> Result<(CDyadic, Precision), DyadicError> {
    let m = factors.len().max(1);
    let levels = ceil_log2(m as u64);
    let out = k.checked_sub(2 * levels).ok_or(DyadicError::InsufficientPrecision {
        k: k.0,
        factors: m,
        needed: 2 * levels,
    })?;
    if factors.is_empty() {
        return Ok((CDyadic::one(), k));
    }
    let width = 1usize << levels;
    let mut layer: Vec<CDyadic> = Vec::with_capacity(width);
    layer.extend(factors.iter().map(clamp_parts));
    layer.resize(width, CDyadic::one());
    while layer.len() > 1 {
        layer = layer.chunks(2).map(|pair| clamp_parts(&(&pair[0] * &pair[1]))).collect();
    }
    Ok((layer.pop().expect("non-empty layer"), out))
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    sign: i8,
    magnitude_bits: String,
    exponent: i64,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DyadicRepr {
            sign: self.signum() as i8,
            magnitude_bits: self.mantissa.magnitude().to_str_radix(16),
            exponent: self.exponent,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DyadicRepr::deserialize(deserializer)?;
        let mag = BigUint::parse_bytes(repr.magnitude_bits.as_bytes(), 16)
            .ok_or_else(|| serde::de::Error::custom("magnitude_bits is not hex"))?;
        let sign = match repr.sign {
            -1 => Sign::Minus,
            0 => Sign::NoSign,
            1 => Sign::Plus,
            s => return Err(serde::de::Error::custom(format!("bad sign {s}"))),
        };
        if (sign == Sign::NoSign) != mag.is_zero() {
            return Err(serde::de::Error::custom("sign and magnitude disagree"));
        }
        Ok(Dyadic::new(BigInt::from_biguint(sign, mag), repr.exponent))
    }
}

/// Metered bit-length of a serialized `t`-bit truncation in `[-1, 1]`: the
/// magnitude bits plus one sign bit.
pub fn serialized_bits(t: Precision) -> u64 {
    t.0 as u64 + 1
}
