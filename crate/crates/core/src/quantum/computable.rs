//! Reals that can be approximated to any requested precision but not, in
//! general, truncated: trigonometric expressions of rational multiples of π.
//!
//! Custodians holding such parameters can answer "give me a k-bit
//! approximation" for every `k`, but cannot always produce a prefix-consistent
//! binary expansion (think `cos θ` with `θ` sitting exactly on a breakpoint).

use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{ceil_log2, truncate, Dyadic, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// `cos(π·num/den)` or `sin(π·num/den)`.
#[derive(Clone, Serialize, Deserialize)]
pub struct TrigFactor {
    #[serde(rename = "fn")]
    pub kind: TrigKind,
    /// Angle as a fraction of π: `[num, den]`.
    pub pi_frac: (i64, u64),
    #[serde(skip)]
    cache: Arc<TrigCache>,
}

/// Shared between clones, so every copy of a scenario benefits.
#[derive(Default)]
struct TrigCache {
    exact: OnceLock<Option<Dyadic>>,
    approx: Mutex<Option<(u32, Dyadic)>>,
}

impl fmt::Debug for TrigFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}(pi*{}/{})", self.kind, self.pi_frac.0, self.pi_frac.1)
    }
}

impl PartialEq for TrigFactor {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.ratio() == other.ratio()
    }
}

impl TrigFactor {
    pub fn new(kind: TrigKind, num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator in angle");
        TrigFactor { kind, pi_frac: (num, den), cache: Arc::default() }
    }

    pub fn cos_pi(num: i64, den: u64) -> Self {
        Self::new(TrigKind::Cos, num, den)
    }

    pub fn sin_pi(num: i64, den: u64) -> Self {
        Self::new(TrigKind::Sin, num, den)
    }

    fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.pi_frac.0), BigInt::from(self.pi_frac.1))
    }

    /// Angle expressed as `cos(π·r)` with `r ∈ [0, 2)`.
    fn cos_turns(&self) -> BigRational {
        let mut r = self.ratio();
        if self.kind == TrigKind::Sin {
            // sin(πr) = cos(π(r - 1/2))
            r -= BigRational::new(BigInt::one(), BigInt::from(2));
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let q = (&r / &two).floor();
        r - q * two
    }

    /// The exact value when it is rational (hence dyadic): 0, ±1/2, ±1.
    pub fn exact_value(&self) -> Option<Dyadic> {
        self.cache.exact.get_or_init(|| self.rational_value()).clone()
    }

    fn rational_value(&self) -> Option<Dyadic> {
        let r = self.cos_turns();
        let six = &r * BigRational::from_integer(BigInt::from(6));
        if !six.is_integer() {
            return None;
        }
        let v = match six.to_integer().to_i64()? {
            0 => Dyadic::one(),
            2 | 10 => Dyadic::from_ratio_pow2(1, 1),
            3 | 9 => Dyadic::zero(),
            4 | 8 => Dyadic::from_ratio_pow2(-1, 1),
            6 => Dyadic::from_int(-1),
            _ => return None,
        };
        Some(v)
    }

    /// A `w`-bit approximation of the factor.
    pub fn approx(&self, w: u32) -> Dyadic {
        if let Some(v) = self.exact_value() {
            return v;
        }
        let mut guard = self.cache.approx.lock().expect("trig cache poisoned");
        if let Some((p, v)) = guard.as_ref() {
            if *p >= w + 2 {
                return truncate(v, Precision(w + 1));
            }
        }
        let p = (2 * w).max(w + 64);
        let v = cos_pi_fixed(&self.cos_turns(), p);
        *guard = Some((p, v.clone()));
        truncate(&v, Precision(w + 1))
    }
}

/// `offset + coef · Π factors`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigExpr {
    pub offset: Dyadic,
    pub coef: Dyadic,
    pub factors: Vec<TrigFactor>,
}

impl TrigExpr {
    pub fn new(offset: Dyadic, coef: Dyadic, factors: Vec<TrigFactor>) -> Self {
        TrigExpr { offset, coef, factors }
    }

    pub fn exact_value(&self) -> Option<Dyadic> {
        let mut prod = self.coef.clone();
        for f in &self.factors {
            prod = &prod * &f.exact_value()?;
        }
        Some(&self.offset + &prod)
    }

    /// A `k`-bit approximation: `|result - value| ≤ 2^-k`.
    pub fn approx(&self, k: Precision) -> Dyadic {
        if let Some(v) = self.exact_value() {
            return v;
        }
        let coef_bits = self.coef.abs().to_f64().log2().ceil().max(0.0) as u32;
        let n = self.factors.len().max(1) as u64;
        let w = k.0 + coef_bits + ceil_log2(n) + 4;
        let mut prod = Dyadic::one();
        for f in &self.factors {
            // each factor has |f| ≤ 1; errors compound additively to first order
            prod = truncate(&(&prod * &f.approx(w)), Precision(w + 2));
        }
        truncate(&(&self.offset + &(&self.coef * &prod)), Precision(k.0 + 2))
    }
}

/// Fixed-point helper: values are integers scaled by `2^bits`.
struct Fixed {
    bits: u32,
}

impl Fixed {
    fn one(&self) -> BigInt {
        BigInt::one() << self.bits as usize
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits as usize
    }

    /// `atan(1/x)` by its alternating series.
    fn atan_inv(&self, x: u64) -> BigInt {
        let x = BigInt::from(x);
        let x2 = &x * &x;
        let mut power = self.one() / &x;
        let mut sum = BigInt::zero();
        let mut k = 0u64;
        while !power.is_zero() {
            let term = &power / BigInt::from(2 * k + 1);
            if k.is_multiple_of(2) {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &x2;
            k += 1;
        }
        sum
    }

    fn pi(&self) -> BigInt {
        // Machin: π = 16 atan(1/5) - 4 atan(1/239)
        self.atan_inv(5) * 16 - self.atan_inv(239) * 4
    }

    /// `(cos y, sin y)` for `0 ≤ y ≤ π/4` by Taylor series.
    fn cos_sin(&self, y: &BigInt) -> (BigInt, BigInt) {
        let mut cos = BigInt::zero();
        let mut sin = BigInt::zero();
        let mut term = self.one(); // y^j / j!
        let mut j = 0u64;
        loop {
            match j % 4 {
                0 => cos += &term,
                1 => sin += &term,
                2 => cos -= &term,
                _ => sin -= &term,
            }
            j += 1;
            term = self.mul(&term, y) / BigInt::from(j);
            if term.is_zero() {
                break;
            }
        }
        (cos, sin)
    }
}

/// `cos(π·r)` for `r ∈ [0, 2)`, to within `2^-p`.
fn cos_pi_fixed(r: &BigRational, p: u32) -> Dyadic {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));

    // fold into [0, 1/4] using cos symmetries
    let mut r = r.clone();
    let mut negate = false;
    if r > one {
        r = &two - &r;
    }
    if r > half {
        r = &one - &r;
        negate = true;
    }
    let use_sin = r > quarter;
    if use_sin {
        r = &half - &r;
    }

    let guard = 32 + ceil_log2(p as u64 + 1);
    let fx = Fixed { bits: p + guard };
    let pi = fx.pi();
    let y = (&pi * r.numer()) / r.denom();
    let (c, s) = fx.cos_sin(&y);
    let mut v = if use_sin { s } else { c };
    if negate {
        v = -v;
    }
    truncate(&Dyadic::new(v, -((p + guard) as i64)), Precision(p))
}
