//! Ingestion checks for density matrices and POVMs.
//!
//! Structural problems (shape mismatches) are reported apart from numeric
//! residuals; a scenario is accepted iff there are no structural problems and
//! every residual is within tolerance.

use nalgebra::{Complex as NaComplex, DMatrix};
use serde::Serialize;

use super::{CMatrix, Model, Scenario};
use crate::dyadic::{Dyadic, Precision};
use crate::scalar::{Complex, Scalar};

/// Default ingestion tolerance `2^-30`.
pub const DEFAULT_TOLERANCE_EXP: u32 = 30;

/// Dimension up to which PSD is checked exactly through principal minors.
const MINOR_CHECK_MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NotHermitian,
    TraceNotOne,
    NotPositive,
    EntryNormAboveOne,
    DiagonalOutOfRange,
    Incomplete,
    CauchySchwarz,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Which matrix, e.g. `rho` or `povm[1][0]`, plus the entry if relevant.
    pub location: String,
    pub residual: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub structural: Vec<String>,
    /// Every nonzero residual, including those within tolerance.
    pub residuals: Vec<Violation>,
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.structural.is_empty() && self.residuals.iter().all(|v| v.within_tolerance)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Violation> {
        self.residuals.iter().filter(|v| !v.within_tolerance)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|v| v.residual).fold(0.0, f64::max)
    }
}

/// Validates at the default tolerance, using exact arithmetic on exact
/// entries and 96-bit approximations of computed ones.
pub fn validate(s: &Scenario) -> ValidationReport {
    let mut report = match s.check_structure() {
        Ok(()) => {
            let model: Model<Dyadic> = s.model(Precision(96));
            validate_with(&model, &Dyadic::pow2(-(DEFAULT_TOLERANCE_EXP as i64)))
        }
        Err(e) => ValidationReport { structural: vec![e.to_string()], ..Default::default() },
    };
    report.tolerance = 2f64.powi(-(DEFAULT_TOLERANCE_EXP as i32));
    report
}

struct Checker<'a, S> {
    tol: &'a S,
    report: ValidationReport,
}

impl<S: Scalar> Checker<'_, S> {
    fn record(&mut self, kind: ViolationKind, location: String, residual: S) {
        if residual > S::zero() {
            let within_tolerance = residual <= *self.tol;
            self.report.residuals.push(Violation { kind, location, residual: residual.to_f64(), within_tolerance });
        }
    }

    fn hermitian(&mut self, m: &CMatrix<S>, name: &str) {
        self.record(ViolationKind::NotHermitian, name.to_string(), m.hermitian_residual());
    }

    fn entry_norms(&mut self, m: &CMatrix<S>, name: &str) {
        let one = S::one();
        for r in 0..m.dim() {
            for c in 0..m.dim() {
                let excess = m.get(r, c).norm_sqr() - one.clone();
                if excess > S::zero() {
                    self.record(ViolationKind::EntryNormAboveOne, format!("{name}[{r}][{c}]"), excess);
                }
            }
        }
    }

    fn cauchy_schwarz(&mut self, m: &CMatrix<S>, name: &str) {
        for r in 0..m.dim() {
            for c in (r + 1)..m.dim() {
                let lhs = m.get(r, c).norm_sqr();
                let rhs = m.get(r, r).re.clone() * m.get(c, c).re.clone();
                let excess = lhs - rhs;
                if excess > S::zero() {
                    self.record(ViolationKind::CauchySchwarz, format!("{name}[{r}][{c}]"), excess);
                }
            }
        }
    }

    fn positive(&mut self, m: &CMatrix<S>, name: &str) {
        let worst = if m.dim() <= MINOR_CHECK_MAX_DIM { most_negative_minor(m) } else { most_negative_eigenvalue(m) };
        if worst < S::zero() {
            self.record(ViolationKind::NotPositive, name.to_string(), -worst);
        }
    }
}

/// Smallest real part among all principal minors (every index subset), or
/// zero when all are non-negative.
fn most_negative_minor<S: Scalar>(m: &CMatrix<S>) -> S {
    let d = m.dim();
    let mut worst = S::zero();
    for mask in 1u32..(1 << d) {
        let idx: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
        let det = m.principal(&idx).determinant().re;
        if det < worst {
            worst = det;
        }
    }
    worst
}

fn most_negative_eigenvalue<S: Scalar>(m: &CMatrix<S>) -> S {
    let d = m.dim();
    let na = DMatrix::from_fn(d, d, |r, c| {
        let z = m.get(r, c);
        NaComplex::new(z.re.to_f64(), z.im.to_f64())
    });
    // symmetrize so the solver sees an exactly Hermitian input
    let herm = (&na + na.adjoint()) * NaComplex::new(0.5, 0.0);
    let eig = herm.symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
    S::from_dyadic(&Dyadic::from_f64(min).unwrap_or_else(Dyadic::zero))
}

/// Validates a concrete model at tolerance `tol`.
pub fn validate_with<S: Scalar>(model: &Model<S>, tol: &S) -> ValidationReport {
    let mut ck = Checker { tol, report: ValidationReport { tolerance: tol.to_f64(), ..Default::default() } };
    let d = model.d();
    if model.rho.dim() != d {
        ck.report.structural.push(format!("rho is {0}x{0}, expected {d}x{d}", model.rho.dim()));
    }
    for (i, povm) in model.povms.iter().enumerate() {
        if povm.len() != model.outcomes[i] {
            ck.report.structural.push(format!("povm[{i}] has {} elements, expected {}", povm.len(), model.outcomes[i]));
        }
        for (j, e) in povm.iter().enumerate() {
            if e.dim() != model.dims[i] {
                ck.report.structural.push(format!("povm[{i}][{j}] is {0}x{0}, expected {1}x{1}", e.dim(), model.dims[i]));
            }
        }
    }
    if !ck.report.structural.is_empty() {
        return ck.report;
    }

    let rho = &model.rho;
    ck.hermitian(rho, "rho");
    let tr = rho.trace();
    ck.record(ViolationKind::TraceNotOne, "rho".into(), Complex::new(tr.re - S::one(), tr.im).max_part_abs());
    ck.entry_norms(rho, "rho");
    ck.cauchy_schwarz(rho, "rho");
    ck.positive(rho, "rho");

    for (i, povm) in model.povms.iter().enumerate() {
        let di = model.dims[i];
        let mut sum = CMatrix::<S>::zeros(di);
        for (j, e) in povm.iter().enumerate() {
            let name = format!("povm[{i}][{j}]");
            ck.hermitian(e, &name);
            ck.entry_norms(e, &name);
            ck.cauchy_schwarz(e, &name);
            ck.positive(e, &name);
            for r in 0..di {
                let v = &e.get(r, r).re;
                let below = S::zero() - v.clone();
                let above = v.clone() - S::one();
                let out = if below > above { below } else { above };
                if out > S::zero() {
                    ck.record(ViolationKind::DiagonalOutOfRange, format!("{name}[{r}][{r}]"), out);
                }
            }
            sum = sum.add(e);
        }
        let gap = sum.sub(&CMatrix::identity(di));
        ck.record(ViolationKind::Incomplete, format!("povm[{i}]"), gap.max_entry_part());
    }
    ck.report
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn z_proj(bit: usize) -> CMatrix<BigRational> {
        let mut diag = vec![rat(0, 1), rat(0, 1)];
        diag[bit] = rat(1, 1);
        CMatrix::diagonal(&diag)
    }

    fn bell_rho() -> CMatrix<BigRational> {
        CMatrix::from_fn(4, |r, c| {
            if (r == 0 || r == 3) && (c == 0 || c == 3) {
                Complex::real(rat(1, 2))
            } else {
                Complex::zero()
            }
        })
    }

    #[test]
    fn exact_bell_is_clean() {
        let model = Model {
            dims: vec![2, 2],
            outcomes: vec![2, 2],
            rho: bell_rho(),
            povms: vec![vec![z_proj(0), z_proj(1)], vec![z_proj(0), z_proj(1)]],
        };
        let report = validate_with(&model, &rat(1, 1 << 30));
        assert!(report.is_valid());
        assert!(report.residuals.is_empty());
    }

    #[test]
    fn incomplete_povm_residual_is_one_sixth() {
        let half = CMatrix::<BigRational>::identity(2).scale(&rat(1, 2));
        let third = CMatrix::<BigRational>::identity(2).scale(&rat(1, 3));
        let model = Model {
            dims: vec![2, 2],
            outcomes: vec![2, 2],
            rho: bell_rho(),
            povms: vec![vec![half, third], vec![z_proj(0), z_proj(1)]],
        };
        let report = validate_with(&model, &rat(1, 1 << 30));
        assert!(!report.is_valid());
        let v: Vec<_> = report.violations().collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Incomplete);
        assert_eq!(v[0].location, "povm[0]");
        assert!((v[0].residual - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn negative_eigenvalue_detected_both_ways() {
        // [[1/2, 3/4], [3/4, 1/2]] has eigenvalues 5/4 and -1/4
        let m = CMatrix::<f64>::from_fn(2, |r, c| Complex::real(if r == c { 0.5 } else { 0.75 }));
        assert!((most_negative_minor(&m) - (0.25 - 0.5625)).abs() < 1e-15);
        assert!((most_negative_eigenvalue(&m) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn leading_minors_alone_would_miss_this() {
        // leading minors 0 and 0, but the bottom-right entry is negative
        let m = CMatrix::<f64>::diagonal(&[0.0, -0.5]);
        assert!(most_negative_minor(&m) < 0.0);
    }
}
