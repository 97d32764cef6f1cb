//! Quantum scenario model and the Born-rule oracle.
//!
//! Basis indices follow mixed-radix numeration with party 1 as the least
//! significant digit: `r = r_1 + r_2·d_1 + r_3·d_1·d_2 + …`. Joint outcomes
//! use the same convention with radices `n_i`. All indices are 0-based.

pub mod computable;
mod entry;
mod matrix;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use entry::{parse_decimal, ComplexEntry, EntryMatrix, RealEntry};
pub use matrix::CMatrix;
pub use validate::{validate, validate_with, ValidationReport, Violation, ViolationKind};

use crate::dyadic::{ceil_log2, Dyadic, Precision};
use crate::scalar::{Complex, Scalar};

/// Default ingestion precision for decimal and computed entries.
pub const INGEST_PRECISION: Precision = Precision(64);

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// A joint outcome `(x_1, …, x_m)`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Outcome(pub Vec<usize>);

impl Outcome {
    pub fn from_flat(flat: usize, outcomes: &[usize]) -> Result<Self, QuantumError> {
        Ok(Outcome(decompose(flat, outcomes)?.digits))
    }

    pub fn flat(&self, outcomes: &[usize]) -> Result<usize, QuantumError> {
        compose(&self.0, outcomes)
    }
}

/// A flat index together with its mixed-radix digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadixIndex {
    pub flat: usize,
    pub digits: Vec<usize>,
}

pub fn decompose(flat: usize, radices: &[usize]) -> Result<MixedRadixIndex, QuantumError> {
    let total: usize = radices.iter().product();
    if flat >= total {
        return Err(QuantumError::OutOfRange(format!("flat index {flat} ≥ {total}")));
    }
    let mut rest = flat;
    let digits = radices
        .iter()
        .map(|&d| {
            let digit = rest % d;
            rest /= d;
            digit
        })
        .collect();
    Ok(MixedRadixIndex { flat, digits })
}

pub fn compose(digits: &[usize], radices: &[usize]) -> Result<usize, QuantumError> {
    if digits.len() != radices.len() {
        return Err(QuantumError::OutOfRange(format!("{} digits for {} radices", digits.len(), radices.len())));
    }
    let mut flat = 0usize;
    let mut weight = 1usize;
    for (i, (&digit, &d)) in digits.iter().zip(radices).enumerate() {
        if digit >= d {
            return Err(QuantumError::OutOfRange(format!("digit {i} is {digit}, radix {d}")));
        }
        flat += digit * weight;
        weight *= d;
    }
    Ok(flat)
}

/// The density matrix `ρ` of dimension `d = Π d_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(pub EntryMatrix);

/// One custodian's POVM `{M_ij}_j`, each element `d_i × d_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    pub elements: Vec<EntryMatrix>,
}

impl Povm {
    pub fn is_exact(&self) -> bool {
        self.elements.iter().all(EntryMatrix::is_exact)
    }
}

/// A complete quantum scenario: `ρ` plus one POVM per custodian.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub dims: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub rho: DensityMatrix,
    pub povms: Vec<Povm>,
    /// Count of decimal components that were truncated at ingestion.
    pub inexact_entries: usize,
}

impl Scenario {
    /// Builds a scenario and checks the structural invariants.
    pub fn new(rho: EntryMatrix, povms: Vec<Povm>) -> Result<Self, QuantumError> {
        let dims: Vec<usize> = povms
            .iter()
            .map(|p| p.elements.first().map(EntryMatrix::dim).unwrap_or(0))
            .collect();
        let outcomes = povms.iter().map(|p| p.elements.len()).collect();
        let s = Scenario { dims, outcomes, rho: DensityMatrix(rho), povms, inexact_entries: 0 };
        s.check_structure()?;
        Ok(s)
    }

    pub fn check_structure(&self) -> Result<(), QuantumError> {
        let m = self.povms.len();
        if m < 2 {
            return Err(QuantumError::Structure(format!("need at least 2 custodians, got {m}")));
        }
        if self.dims.len() != m || self.outcomes.len() != m {
            return Err(QuantumError::Structure("dims/outcomes length differs from party count".into()));
        }
        for (i, p) in self.povms.iter().enumerate() {
            if self.dims[i] < 2 {
                return Err(QuantumError::Structure(format!("party {i} has dimension {} < 2", self.dims[i])));
            }
            if p.elements.is_empty() || p.elements.len() != self.outcomes[i] {
                return Err(QuantumError::Structure(format!("party {i} POVM has {} elements", p.elements.len())));
            }
            for (j, e) in p.elements.iter().enumerate() {
                if e.dim() != self.dims[i] {
                    return Err(QuantumError::Structure(format!(
                        "element {j} of party {i} is {0}x{0}, expected {1}x{1}",
                        e.dim(),
                        self.dims[i]
                    )));
                }
            }
        }
        if self.rho.0.dim() != self.d() {
            return Err(QuantumError::Structure(format!(
                "density matrix is {0}x{0} but the party dimensions multiply to {1}",
                self.rho.0.dim(),
                self.d()
            )));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.povms.len()
    }

    pub fn d(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n(&self) -> usize {
        self.outcomes.iter().product()
    }

    pub fn is_exact(&self) -> bool {
        self.rho.0.is_exact() && self.povms.iter().all(Povm::is_exact)
    }

    pub fn all_outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        (0..self.n()).map(|f| Outcome::from_flat(f, &self.outcomes).expect("flat index in range"))
    }

    /// Materializes every entry as a `k`-bit approximation in scalar type `S`
    /// (exact entries are carried over unchanged before conversion).
    pub fn model<S: Scalar>(&self, k: Precision) -> Model<S> {
        Model {
            dims: self.dims.clone(),
            outcomes: self.outcomes.clone(),
            rho: self.rho.0.approx(k),
            povms: self.povms.iter().map(|p| p.elements.iter().map(|e| e.approx(k)).collect()).collect(),
        }
    }

    /// The exact dyadic model, when every entry is exact.
    pub fn exact_model(&self) -> Option<Model<Dyadic>> {
        self.is_exact().then(|| self.model(Precision(0)))
    }

    pub fn from_json(text: &str) -> Result<Self, QuantumError> {
        Self::from_json_with(text, INGEST_PRECISION)
    }

    pub fn from_json_with(text: &str, ingest: Precision) -> Result<Self, QuantumError> {
        let raw: ScenarioFile = serde_json::from_str(text)?;
        let mut inexact = 0;
        let rho = entry::resolve_matrix(&raw.rho, ingest, &mut inexact)?;
        let mut povms = Vec::with_capacity(raw.povms.len());
        for p in &raw.povms {
            let elements = p
                .iter()
                .map(|e| entry::resolve_matrix(e, ingest, &mut inexact))
                .collect::<Result<Vec<_>, _>>()?;
            povms.push(Povm { elements });
        }
        let mut s = Scenario::new(rho, povms)?;
        if let Some(dims) = raw.dims {
            if dims != s.dims {
                return Err(QuantumError::Structure(format!("declared dims {dims:?} disagree with matrices {:?}", s.dims)));
            }
        }
        if let Some(outs) = raw.outcomes {
            if outs != s.outcomes {
                return Err(QuantumError::Structure(format!(
                    "declared outcomes {outs:?} disagree with POVMs {:?}",
                    s.outcomes
                )));
            }
        }
        if let Some(m) = raw.m {
            if m != s.m() {
                return Err(QuantumError::Structure(format!("declared m = {m} but {} POVMs given", s.m())));
            }
        }
        s.inexact_entries = inexact;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let raw = ScenarioFile {
            m: Some(self.m()),
            dims: Some(self.dims.clone()),
            outcomes: Some(self.outcomes.clone()),
            rho: entry::dump_matrix(&self.rho.0),
            povms: self.povms.iter().map(|p| p.elements.iter().map(entry::dump_matrix).collect()).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("scenario serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outcomes: Option<Vec<usize>>,
    rho: entry::RawMatrix,
    povms: Vec<Vec<entry::RawMatrix>>,
}

/// Concrete matrices of a scenario in scalar type `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<S> {
    pub dims: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub rho: CMatrix<S>,
    pub povms: Vec<Vec<CMatrix<S>>>,
}

impl<S: Scalar> Model<S> {
    pub fn d(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n(&self) -> usize {
        self.outcomes.iter().product()
    }

    pub fn elements_for(&self, x: &Outcome) -> Vec<&CMatrix<S>> {
        x.0.iter().enumerate().map(|(i, &xi)| &self.povms[i][xi]).collect()
    }

    /// `(M_x)_{rc} = Π_i (M_{i x_i})_{r_i c_i}` without materializing `M_x`.
    pub fn tensor_entry(&self, x: &Outcome, r: usize, c: usize) -> Result<Complex<S>, QuantumError> {
        let rd = decompose(r, &self.dims)?;
        let cd = decompose(c, &self.dims)?;
        Ok(tensor_entry_digits(&self.elements_for(x), &rd.digits, &cd.digits))
    }

    /// `M_x` materialized through explicit Kronecker products (party `m`
    /// outermost, so party 1 varies fastest). Test oracle only.
    pub fn kronecker(&self, x: &Outcome) -> CMatrix<S> {
        let els = self.elements_for(x);
        let mut acc = els[els.len() - 1].clone();
        for e in els.iter().rev().skip(1) {
            acc = acc.kron(e);
        }
        acc
    }

    /// `Tr(ρ M_x)` by the entry-product double sum.
    pub fn born_trace(&self, x: &Outcome) -> Complex<S> {
        let els = self.elements_for(x);
        let digits = radix_table(&self.dims);
        let d = self.d();
        let mut acc = Complex::zero();
        for r in 0..d {
            for c in 0..d {
                let rho = self.rho.get(r, c);
                if rho.is_zero() {
                    continue;
                }
                let m_cr = tensor_entry_digits(&els, &digits[c], &digits[r]);
                acc = acc + rho * &m_cr;
            }
        }
        acc
    }
}

pub(crate) fn radix_table(dims: &[usize]) -> Vec<Vec<usize>> {
    let d: usize = dims.iter().product();
    (0..d).map(|f| decompose(f, dims).expect("in range").digits).collect()
}

pub(crate) fn tensor_entry_digits<S: Scalar>(els: &[&CMatrix<S>], r: &[usize], c: &[usize]) -> Complex<S> {
    els.iter().zip(r.iter().zip(c)).fold(Complex::one(), |acc, (m, (&ri, &ci))| &acc * m.get(ri, ci))
}

/// Closed interval `[lo, hi]` certified to contain a probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbInterval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl ProbInterval {
    pub fn exact(v: Dyadic) -> Self {
        ProbInterval { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi).shl(-1)
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }
}

/// Born-rule oracle `p_x = Tr(ρ M_x)`.
///
/// Exact scenarios yield a degenerate interval. Otherwise every entry is
/// approximated at `t_oracle + 2⌈lg d⌉ + ⌈lg(m+1)⌉ + 2` bits, which keeps the
/// accumulated error of the `d²` products of `m + 1` unit-bounded factors
/// below `2^-t_oracle`.
pub fn born_probability(s: &Scenario, x: &Outcome, t_oracle: Precision) -> ProbInterval {
    if let Some(model) = s.exact_model() {
        return ProbInterval::exact(model.born_trace(x).re);
    }
    let k = Precision(t_oracle.0 + 2 * ceil_log2(s.d() as u64) + ceil_log2(s.m() as u64 + 1) + 2);
    let model: Model<Dyadic> = s.model(k);
    let center = model.born_trace(x).re;
    let r = t_oracle.radius();
    let lo = (&center - &r).max(Dyadic::zero());
    let hi = (&center + &r).min(Dyadic::one());
    ProbInterval { lo, hi }
}

/// Oracle probabilities for every outcome, in flat order.
pub fn born_distribution(s: &Scenario, t_oracle: Precision) -> Vec<ProbInterval> {
    s.all_outcomes().map(|x| born_probability(s, &x, t_oracle)).collect()
}
