//! Parameter-sourced matrix entries and the scenario file format.
//!
//! A real component is one of:
//!
//! - `{"bits": "<signed hex mantissa>", "exp": <int>}`: the exact dyadic
//!   `bits · 2^exp`;
//! - `"<decimal>"`: a decimal string, kept exact when it happens to be dyadic
//!   and otherwise truncated to the ingestion precision and flagged inexact;
//! - `{"trig": {"offset": D, "coef": D, "factors": [{"fn": "cos", "pi_frac": [a, b]}, ...]}}`:
//!   `offset + coef · Π f(π·a/b)`, approximable to any precision.
//!
//! A complex entry is `{"re": R, "im": R}` with `im` optional.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::computable::TrigExpr;
use super::QuantumError;
use crate::dyadic::{Dyadic, Precision};
use crate::scalar::{Complex, Scalar};

/// A real parameter: exact, or computable to arbitrary precision.
#[derive(Clone, Debug, PartialEq)]
pub enum RealEntry {
    Exact(Dyadic),
    Computed(TrigExpr),
}

impl RealEntry {
    pub fn zero() -> Self {
        RealEntry::Exact(Dyadic::zero())
    }

    pub fn exact(&self) -> Option<&Dyadic> {
        match self {
            RealEntry::Exact(d) => Some(d),
            RealEntry::Computed(_) => None,
        }
    }

    /// `|result - value| ≤ 2^-k`; exact entries are returned unchanged.
    pub fn approx(&self, k: Precision) -> Dyadic {
        match self {
            RealEntry::Exact(d) => d.clone(),
            RealEntry::Computed(e) => e.approx(k),
        }
    }

    /// Collapses computed entries whose value happens to be dyadic.
    pub fn simplified(self) -> Self {
        match self {
            RealEntry::Computed(e) => match e.exact_value() {
                Some(v) => RealEntry::Exact(v),
                None => RealEntry::Computed(e),
            },
            exact => exact,
        }
    }
}

impl From<Dyadic> for RealEntry {
    fn from(d: Dyadic) -> Self {
        RealEntry::Exact(d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexEntry {
    pub re: RealEntry,
    pub im: RealEntry,
}

impl ComplexEntry {
    pub fn new(re: RealEntry, im: RealEntry) -> Self {
        ComplexEntry { re, im }
    }

    pub fn real(re: RealEntry) -> Self {
        ComplexEntry { re, im: RealEntry::zero() }
    }

    pub fn is_exact(&self) -> bool {
        self.re.exact().is_some() && self.im.exact().is_some()
    }

    pub fn approx<S: Scalar>(&self, k: Precision) -> Complex<S> {
        Complex::new(S::from_dyadic(&self.re.approx(k)), S::from_dyadic(&self.im.approx(k)))
    }
}

impl From<Complex<Dyadic>> for ComplexEntry {
    fn from(z: Complex<Dyadic>) -> Self {
        ComplexEntry::new(RealEntry::Exact(z.re), RealEntry::Exact(z.im))
    }
}

/// Square matrix of parameter-sourced entries, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryMatrix {
    dim: usize,
    data: Vec<ComplexEntry>,
}

impl EntryMatrix {
    pub fn new(dim: usize, data: Vec<ComplexEntry>) -> Result<Self, QuantumError> {
        if data.len() != dim * dim {
            return Err(QuantumError::Structure(format!(
                "matrix has {} entries, expected {}x{}",
                data.len(),
                dim,
                dim
            )));
        }
        Ok(EntryMatrix { dim, data })
    }

    pub fn from_exact(m: &super::CMatrix<Dyadic>) -> Self {
        EntryMatrix { dim: m.dim(), data: m.entries().iter().cloned().map(ComplexEntry::from).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &ComplexEntry {
        &self.data[r * self.dim + c]
    }

    pub fn entries(&self) -> &[ComplexEntry] {
        &self.data
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(ComplexEntry::is_exact)
    }

    /// Entry-wise `k`-bit approximation in scalar type `S`.
    pub fn approx<S: Scalar>(&self, k: Precision) -> super::CMatrix<S> {
        super::CMatrix::new(self.dim, self.data.iter().map(|e| e.approx::<S>(k)).collect())
    }

    /// The exact dyadic matrix, if every entry is exact.
    pub fn exact(&self) -> Option<super::CMatrix<Dyadic>> {
        if !self.is_exact() {
            return None;
        }
        Some(self.approx::<Dyadic>(Precision(0)))
    }
}

// ---------------------------------------------------------------------------
// file format

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum RawReal {
    Bits { bits: String, exp: i64 },
    Trig { trig: TrigExpr },
    Decimal(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct RawComplex {
    re: RawReal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<RawReal>,
}

pub(crate) type RawMatrix = Vec<Vec<RawComplex>>;

fn parse_signed_hex(s: &str) -> Option<BigInt> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let body = body.strip_prefix("0x").unwrap_or(body);
    let v = BigInt::parse_bytes(body.as_bytes(), 16)?;
    Some(if neg { -v } else { v })
}

fn signed_hex(v: &BigInt) -> String {
    let mag = v.magnitude().to_str_radix(16);
    if v.sign() == Sign::Minus {
        format!("-{mag}")
    } else {
        mag
    }
}

/// Parses a decimal literal (`-12.5e-3` style) into a dyadic.
///
/// Returns the value and whether it had to be truncated at `ingest` bits.
pub fn parse_decimal(s: &str, ingest: Precision) -> Result<(Dyadic, bool), QuantumError> {
    let bad = || QuantumError::Parse(format!("not a decimal number: {s:?}"));
    let s = s.trim();
    let (mantissa_part, exp10) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa_part.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa_part.strip_prefix('+').unwrap_or(mantissa_part)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num = BigInt::parse_bytes(if all.is_empty() { b"0" } else { all.as_bytes() }, 10).ok_or_else(bad)?;
    let scale10 = exp10 - frac_part.len() as i64;
    let mut den = BigInt::one();
    let ten = BigInt::from(10);
    if scale10 >= 0 {
        num *= num_traits::pow(ten, scale10 as usize);
    } else {
        den = num_traits::pow(ten, (-scale10) as usize);
    }
    if neg {
        num = -num;
    }
    let g = num.gcd(&den);
    if !g.is_zero() {
        num /= &g;
        den /= &g;
    }
    // den = 2^a 5^b; exact iff b = 0
    let tz = den.trailing_zeros().unwrap_or(0);
    if (&den >> tz as usize).is_one() {
        return Ok((Dyadic::new(num, -(tz as i64)), false));
    }
    let scaled = (num.abs() << ingest.0 as usize) / &den;
    let scaled = if num.is_negative() { -scaled } else { scaled };
    Ok((Dyadic::new(scaled, -(ingest.0 as i64)), true))
}

impl RawReal {
    pub(crate) fn resolve(&self, ingest: Precision, inexact: &mut usize) -> Result<RealEntry, QuantumError> {
        Ok(match self {
            RawReal::Bits { bits, exp } => {
                let m = parse_signed_hex(bits).ok_or_else(|| QuantumError::Parse(format!("bad hex mantissa {bits:?}")))?;
                RealEntry::Exact(Dyadic::new(m, *exp))
            }
            RawReal::Decimal(s) => {
                let (v, lossy) = parse_decimal(s, ingest)?;
                if lossy {
                    *inexact += 1;
                }
                RealEntry::Exact(v)
            }
            RawReal::Trig { trig } => RealEntry::Computed(trig.clone()).simplified(),
        })
    }

    pub(crate) fn from_entry(e: &RealEntry) -> Self {
        match e {
            RealEntry::Exact(d) => RawReal::Bits { bits: signed_hex(d.mantissa()), exp: d.exponent() },
            RealEntry::Computed(t) => RawReal::Trig { trig: t.clone() },
        }
    }
}

pub(crate) fn resolve_matrix(raw: &RawMatrix, ingest: Precision, inexact: &mut usize) -> Result<EntryMatrix, QuantumError> {
    let dim = raw.len();
    let mut data = Vec::with_capacity(dim * dim);
    for (r, row) in raw.iter().enumerate() {
        if row.len() != dim {
            return Err(QuantumError::Structure(format!("row {r} has {} entries, expected {dim}", row.len())));
        }
        for cell in row {
            let re = cell.re.resolve(ingest, inexact)?;
            let im = match &cell.im {
                Some(v) => v.resolve(ingest, inexact)?,
                None => RealEntry::zero(),
            };
            data.push(ComplexEntry::new(re, im));
        }
    }
    EntryMatrix::new(dim, data)
}

pub(crate) fn dump_matrix(m: &EntryMatrix) -> RawMatrix {
    (0..m.dim())
        .map(|r| {
            (0..m.dim())
                .map(|c| {
                    let e = m.get(r, c);
                    let im = match &e.im {
                        RealEntry::Exact(d) if d.is_zero() => None,
                        other => Some(RawReal::from_entry(other)),
                    };
                    RawComplex { re: RawReal::from_entry(&e.re), im }
                })
                .collect()
        })
        .collect()
}
