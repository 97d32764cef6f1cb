//! In-process oracle that derives `p_x(t)` from the same wire-form entries
//! the custodians would send, without any messaging. Used where sampling
//! paths must be replayed deterministically (path enumeration, benches of
//! the sampler alone).

use super::custodian::{approximation_scalar, hermitian_scalars, truncation_scalar};
use super::leader::rebuild_hermitian;
use crate::approx::{assemble_probability, required_entry_precision, rho_precision, ApproxProbabilityTable};
use crate::dyadic::{Dyadic, Precision};
use crate::quantum::{CMatrix, Outcome, RealEntry, Scenario};
use crate::sampler::{ProbabilityOracle, SampleError};

/// `p_x(t)` computed from entries at exactly `required_entry_precision(t)`.
pub struct ScenarioOracle<'a> {
    scenario: &'a Scenario,
}

impl<'a> ScenarioOracle<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        ScenarioOracle { scenario }
    }

    fn element(&self, i: usize, j: usize, k: Precision) -> CMatrix<Dyadic> {
        let povm = &self.scenario.povms[i];
        let e = &povm.elements[j];
        let exact = povm.is_exact();
        let scalars: Vec<_> = hermitian_scalars(e)
            .into_iter()
            .map(|s| match (exact, s) {
                (true, RealEntry::Exact(x)) => truncation_scalar(x, k),
                (_, s) => approximation_scalar(s, k),
            })
            .collect();
        rebuild_hermitian(e.dim(), k, &scalars)
    }

    /// `p_x(t)`.
    pub fn probability(&self, x: &Outcome, t: Precision) -> Result<Dyadic, SampleError> {
        let s = self.scenario;
        let k = required_entry_precision(t, s.d(), s.m());
        let els: Vec<CMatrix<Dyadic>> = x.0.iter().enumerate().map(|(i, &j)| self.element(i, j, k)).collect();
        let refs: Vec<&CMatrix<Dyadic>> = els.iter().collect();
        let rho = s.rho.0.approx(Precision(rho_precision(k, s.m()).0 + 32));
        Ok(assemble_probability(&refs, &s.dims, &rho, x, k, t)?)
    }
}

impl ProbabilityOracle for ScenarioOracle<'_> {
    type Error = SampleError;

    fn table(&mut self, t0: Precision) -> Result<ApproxProbabilityTable, SampleError> {
        let values = self.scenario.all_outcomes().map(|x| self.probability(&x, t0)).collect::<Result<Vec<_>, _>>()?;
        Ok(ApproxProbabilityTable::new(t0, self.scenario.outcomes.clone(), values)?)
    }

    fn refine(&mut self, x: &Outcome, t: Precision) -> Result<Dyadic, SampleError> {
        self.probability(x, t)
    }
}
