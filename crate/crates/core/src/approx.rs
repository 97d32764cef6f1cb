//! Certified probability approximations on the leader's side, and the
//! proposal distribution built from them.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::dyadic::{approx_product_tree, ceil_log2, clamp_unit, ClampRange, Dyadic, DyadicError, Precision};
use crate::quantum::{compose, radix_table, CMatrix, Outcome};
use crate::scalar::Complex;

#[derive(Debug, Error, PartialEq)]
pub enum ApproxError {
    /// The assembled trace has an imaginary part larger than the certified
    /// error radius: some POVM element is not Hermitian, or a custodian lied.
    #[error("imaginary residual {residual} exceeds 2^-{t} for outcome {outcome:?}")]
    ImaginaryResidualTooLarge { outcome: Vec<usize>, residual: f64, t: u32 },
    #[error(transparent)]
    Precision(#[from] DyadicError),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// `⌈lg x⌉` for the two-`lg` terms of the loss budget: `⌈2 lg d⌉ = ⌈lg d²⌉`.
fn ceil_2lg(d: usize) -> u32 {
    ceil_log2((d as u64) * (d as u64))
}

/// Entry precision that certifies `t` output bits: `t + 1 + ⌈2 lg d⌉ + 2⌈lg m⌉`.
pub fn required_entry_precision(t: Precision, d: usize, m: usize) -> Precision {
    Precision(t.0 + 1 + ceil_2lg(d) + 2 * ceil_log2(m as u64))
}

/// Precision at which the leader holds `ρ` for entries at precision `k`.
///
/// Two guard bits over the product precision keep the `ρ` multiplication
/// within its one-bit loss budget even though `ρ` itself is approximate.
pub fn rho_precision(k: Precision, m: usize) -> Precision {
    Precision(k.0 - 2 * ceil_log2(m as u64) + 3)
}

/// `p_x(t)` from `k`-bit entries of the measured elements `M_{i x_i}` and
/// the leader's copy of `ρ`.
///
/// Each of the `d²` terms `ρ_rc · Π_i (M_{i x_i})_{c_i r_i}` is formed with
/// the clamped product tree; the sum is exact. The imaginary part of the sum
/// must be within `2^-t`, after which it is discarded and the real part is
/// clamped to `[0, 1]`.
pub fn assemble_probability(
    elements: &[&CMatrix<Dyadic>],
    dims: &[usize],
    rho: &CMatrix<Dyadic>,
    x: &Outcome,
    k: Precision,
    t: Precision,
) -> Result<Dyadic, ApproxError> {
    let m = elements.len();
    if dims.len() != m || x.0.len() != m {
        return Err(ApproxError::Shape(format!("{m} elements, {} dims, outcome of length {}", dims.len(), x.0.len())));
    }
    let d: usize = dims.iter().product();
    if rho.dim() != d {
        return Err(ApproxError::Shape(format!("rho is {0}x{0}, expected {d}x{d}", rho.dim())));
    }
    let digits = radix_table(dims);
    let mut acc = Complex::<Dyadic>::zero();
    let mut factors = Vec::with_capacity(m);
    for r in 0..d {
        for c in 0..d {
            let rho_rc = rho.get(r, c);
            if rho_rc.is_zero() {
                continue;
            }
            factors.clear();
            factors.extend((0..m).map(|i| elements[i].get(digits[c][i], digits[r][i]).clone()));
            let (prod, _) = approx_product_tree(&factors, k)?;
            acc = acc + rho_rc * &prod;
        }
    }
    let radius = t.radius();
    if acc.im.abs() > radius {
        return Err(ApproxError::ImaginaryResidualTooLarge { outcome: x.0.clone(), residual: acc.im.to_f64(), t: t.0 });
    }
    Ok(clamp_unit(&acc.re, &ClampRange::probability()))
}

/// The leader's `t`-bit approximations of every `p_x`, in flat outcome order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxProbabilityTable {
    pub t: Precision,
    pub outcomes: Vec<usize>,
    pub values: Vec<Dyadic>,
}

impl ApproxProbabilityTable {
    pub fn new(t: Precision, outcomes: Vec<usize>, values: Vec<Dyadic>) -> Result<Self, ApproxError> {
        let n: usize = outcomes.iter().product();
        if values.len() != n {
            return Err(ApproxError::Shape(format!("{} values for {n} outcomes", values.len())));
        }
        Ok(ApproxProbabilityTable { t, outcomes, values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, x: &Outcome) -> &Dyadic {
        &self.values[compose(&x.0, &self.outcomes).expect("outcome in range")]
    }
}

/// Proposal `q_x = (p_x(t0) + 2^-t0) / C`, stored through the exact dyadic
/// numerators `C·q_x` and the constant `C`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Proposal {
    pub t0: Precision,
    pub outcomes: Vec<usize>,
    pub c: Dyadic,
    pub cq: Vec<Dyadic>,
}

impl Proposal {
    pub fn n(&self) -> usize {
        self.cq.len()
    }

    pub fn cq(&self, flat: usize) -> &Dyadic {
        &self.cq[flat]
    }

    pub fn outcome(&self, flat: usize) -> Outcome {
        Outcome::from_flat(flat, &self.outcomes).expect("flat index in range")
    }

    pub fn flat(&self, x: &Outcome) -> usize {
        compose(&x.0, &self.outcomes).expect("outcome in range")
    }

    /// `q_x` as an exact rational.
    pub fn q_exact(&self, flat: usize) -> BigRational {
        to_rational(&self.cq[flat]) / to_rational(&self.c)
    }

    /// `q_x` in floating point, for reporting.
    pub fn q_f64(&self) -> Vec<f64> {
        let c = self.c.to_f64();
        self.cq.iter().map(|v| v.to_f64() / c).collect()
    }

    /// Shannon entropy `H(q)` in bits, for reporting.
    pub fn entropy(&self) -> f64 {
        self.q_f64().iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
    }

    /// The upper bound `1 + 2^{1-t0} n` on `C`.
    pub fn c_upper_bound(&self) -> Dyadic {
        &Dyadic::one() + &(&Dyadic::from_int(self.n() as i64) * &Dyadic::pow2(1 - self.t0.0 as i64))
    }
}

pub(crate) fn to_rational(d: &Dyadic) -> BigRational {
    let e = d.exponent();
    if e >= 0 {
        BigRational::from_integer(d.mantissa() << (e as usize))
    } else {
        BigRational::new(d.mantissa().clone(), BigInt::from(1) << (e.unsigned_abs() as usize))
    }
}

pub fn build_proposal(table: &ApproxProbabilityTable) -> Proposal {
    let cushion = table.t.radius();
    let cq: Vec<Dyadic> = table.values.iter().map(|p| p + &cushion).collect();
    let c = cq.iter().fold(Dyadic::zero(), |acc, v| &acc + v);
    Proposal { t0: table.t, outcomes: table.outcomes.clone(), c, cq }
}
