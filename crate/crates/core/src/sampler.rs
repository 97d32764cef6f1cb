//! Rejection samplers that work from certified approximations of `p`.
//!
//! One proposal round is a resumable [`RoundMachine`]: it asks for random
//! bits and for refined probabilities through events, so the same code runs
//! against a live bit source, a protocol leader, or an exhaustive path
//! enumerator. [`sample_modified`] chains rounds until one accepts.

use serde::Serialize;
use thiserror::Error;

use crate::approx::{build_proposal, ApproxError, ApproxProbabilityTable, Proposal};
use crate::dyadic::{Dyadic, Precision};
use crate::quantum::Outcome;
use crate::randomness::{BitSource, DdgTree, DdgWalker, LazyUniform};

/// Default hard cap on `t - t0` within one loop.
pub const DEFAULT_BUDGET: u32 = 128;
/// Default number of bits of `U` in the uniform model.
pub const DEFAULT_UNIFORM_BITS: u32 = 256;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error("precision budget exhausted: t reached {t} with t0 = {t0}")]
    BudgetExceeded { t0: u32, t: u32 },
    #[error("no acceptance after {0} proposals")]
    RoundLimit(u64),
}

/// How `U` is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum RandomnessModel {
    /// Bits drawn on demand; `U[t]` tests.
    #[default]
    Discrete,
    /// `U` drawn up front to a fixed number of bits and tested as a real.
    Uniform { bits: u32 },
}


#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub t0: Precision,
    pub model: RandomnessModel,
    pub budget: u32,
    pub max_rounds: u64,
}

impl SamplerConfig {
    pub fn new(t0: Precision) -> Self {
        SamplerConfig { t0, model: RandomnessModel::Discrete, budget: DEFAULT_BUDGET, max_rounds: 1 << 24 }
    }

    pub fn uniform(t0: Precision) -> Self {
        SamplerConfig { model: RandomnessModel::Uniform { bits: DEFAULT_UNIFORM_BITS }, ..Self::new(t0) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
    NeedMoreBits,
}

/// Random-bit-model test at precision `t`:
/// accept iff `(U[t] + 2^-t)·Cq ≤ p(t) - 2^-t`, reject iff `U[t]·Cq > p(t) + 2^-t`.
pub fn step_discrete(u_t: &Dyadic, t: Precision, p_t: &Dyadic, cq: &Dyadic) -> Decision {
    let r = t.radius();
    if &(u_t + &r) * cq <= p_t - &r {
        Decision::Accept
    } else if (u_t * cq) > (p_t + &r) {
        Decision::Reject
    } else {
        Decision::NeedMoreBits
    }
}

/// Uniform-model test with `U` known: accept iff `U·Cq ≤ p(t) - 2^-t`,
/// reject iff `U·Cq > p(t) + 2^-t`.
pub fn step_uniform(u: &Dyadic, t: Precision, p_t: &Dyadic, cq: &Dyadic) -> Decision {
    let r = t.radius();
    let lhs = u * cq;
    if lhs <= p_t - &r {
        Decision::Accept
    } else if lhs > p_t + &r {
        Decision::Reject
    } else {
        Decision::NeedMoreBits
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoundEvent {
    /// Feed one random bit with [`RoundMachine::push_bit`].
    NeedBit,
    /// `X` was drawn from `q` (flat index).
    Proposed(usize),
    /// Supply `p_X(t)` with [`RoundMachine::provide`].
    NeedRefinement { x: usize, t: Precision },
    Accepted { x: usize, t: Precision },
    Rejected { x: usize, t: Precision },
}

#[derive(Clone, Debug, PartialEq)]
enum Phase {
    Propose(DdgWalker),
    DrawU,
    Test,
    Done,
}

/// One proposal round: draw `X ~ q`, then run the refinement loop from `t0`.
#[derive(Clone, Debug)]
pub struct RoundMachine {
    cfg: SamplerConfig,
    phase: Phase,
    x: usize,
    u: LazyUniform,
    t: Precision,
    p_t: Option<Dyadic>,
    bit: Option<bool>,
    ky_bits: u64,
    u_bits: u64,
}

impl RoundMachine {
    pub fn new(cfg: SamplerConfig) -> Self {
        RoundMachine {
            cfg,
            phase: Phase::Propose(DdgWalker::default()),
            x: 0,
            u: LazyUniform::new(),
            t: cfg.t0,
            p_t: None,
            bit: None,
            ky_bits: 0,
            u_bits: 0,
        }
    }

    pub fn push_bit(&mut self, bit: bool) {
        assert!(self.bit.is_none(), "bit pushed twice without polling");
        match self.phase {
            Phase::Propose(_) => self.ky_bits += 1,
            _ => self.u_bits += 1,
        }
        self.bit = Some(bit);
    }

    pub fn provide(&mut self, p_t: Dyadic) {
        self.p_t = Some(p_t);
    }

    pub fn ky_bits(&self) -> u64 {
        self.ky_bits
    }

    pub fn u_bits(&self) -> u64 {
        self.u_bits
    }

    pub fn uniform(&self) -> &LazyUniform {
        &self.u
    }

    /// Number of `U` bits that must exist before testing at the current `t`.
    fn u_target(&self) -> usize {
        match self.cfg.model {
            RandomnessModel::Discrete => self.t.0 as usize,
            RandomnessModel::Uniform { bits } => bits as usize,
        }
    }

    /// Runs until input is needed or the round ends. `table` supplies
    /// `p_X(t0)`.
    pub fn poll(&mut self, tree: &mut DdgTree, q: &Proposal, table: &ApproxProbabilityTable) -> Result<RoundEvent, SampleError> {
        loop {
            match &mut self.phase {
                Phase::Propose(walker) => {
                    let chosen = match tree.point_mass() {
                        Some(x) => x,
                        None => match self.bit.take() {
                            None => return Ok(RoundEvent::NeedBit),
                            Some(b) => match walker.step(tree, b) {
                                Some(x) => x,
                                None => continue,
                            },
                        },
                    };
                    self.x = chosen;
                    self.t = self.cfg.t0;
                    self.p_t = Some(table.values[chosen].clone());
                    self.phase = Phase::DrawU;
                    return Ok(RoundEvent::Proposed(chosen));
                }
                Phase::DrawU => {
                    if let Some(b) = self.bit.take() {
                        self.u.push(b);
                    }
                    if self.u.len() < self.u_target() {
                        return Ok(RoundEvent::NeedBit);
                    }
                    self.phase = Phase::Test;
                }
                Phase::Test => {
                    let p_t = match &self.p_t {
                        Some(p) => p.clone(),
                        None => return Ok(RoundEvent::NeedRefinement { x: self.x, t: self.t }),
                    };
                    let cq = q.cq(self.x);
                    let decision = match self.cfg.model {
                        RandomnessModel::Discrete => step_discrete(&self.u.value(), self.t, &p_t, cq),
                        RandomnessModel::Uniform { .. } => step_uniform(&self.u.value(), self.t, &p_t, cq),
                    };
                    match decision {
                        Decision::Accept => {
                            self.phase = Phase::Done;
                            return Ok(RoundEvent::Accepted { x: self.x, t: self.t });
                        }
                        Decision::Reject => {
                            self.phase = Phase::Done;
                            return Ok(RoundEvent::Rejected { x: self.x, t: self.t });
                        }
                        Decision::NeedMoreBits => {
                            if self.t.0 >= self.cfg.t0.0 + self.cfg.budget {
                                return Err(SampleError::BudgetExceeded { t0: self.cfg.t0.0, t: self.t.0 + 1 });
                            }
                            self.t = self.t.next();
                            self.p_t = None;
                            self.phase = Phase::DrawU;
                        }
                    }
                }
                Phase::Done => panic!("round already finished"),
            }
        }
    }
}

/// Source of certified approximations for the sampler.
pub trait ProbabilityOracle {
    type Error: From<SampleError>;

    /// `p_x(t0)` for every outcome.
    fn table(&mut self, t0: Precision) -> Result<ApproxProbabilityTable, Self::Error>;

    /// `p_x(t)` for `t > t0`; called with consecutive `t` for the same `x`
    /// within a loop.
    fn refine(&mut self, x: &Outcome, t: Precision) -> Result<Dyadic, Self::Error>;

    /// Called once for each proposal, before any refinement of it.
    fn on_proposal(&mut self, _x: &Outcome) -> Result<(), Self::Error> {
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SampleStats {
    /// Number of proposals `S`.
    pub s: u64,
    /// `T_i` for every loop, rejected ones included.
    pub loops: Vec<u32>,
    pub ky_bits: u64,
    pub u_bits: u64,
    pub refinements: u64,
    pub c: f64,
}

impl SampleStats {
    pub fn random_bits(&self) -> u64 {
        self.ky_bits + self.u_bits
    }

    pub fn t_max(&self) -> u32 {
        self.loops.iter().copied().max().unwrap_or(0)
    }
}

/// Samples `p` exactly from certified approximations (random-bit model or
/// uniform model per `cfg.model`).
pub fn sample_modified<O: ProbabilityOracle>(
    oracle: &mut O,
    src: &mut impl BitSource,
    cfg: SamplerConfig,
) -> Result<(Outcome, SampleStats), O::Error> {
    let table = oracle.table(cfg.t0)?;
    let q = build_proposal(&table);
    let mut tree = DdgTree::from_proposal(&q);
    let mut stats = SampleStats { c: q.c.to_f64(), ..Default::default() };
    while stats.s < cfg.max_rounds {
        stats.s += 1;
        let mut round = RoundMachine::new(cfg);
        let mut current = None;
        let finished = loop {
            match round.poll(&mut tree, &q, &table)? {
                RoundEvent::NeedBit => round.push_bit(src.next_bit()),
                RoundEvent::Proposed(x) => {
                    let outcome = q.outcome(x);
                    oracle.on_proposal(&outcome)?;
                    current = Some(outcome);
                }
                RoundEvent::NeedRefinement { t, .. } => {
                    let p = oracle.refine(current.as_ref().expect("proposal precedes refinement"), t)?;
                    stats.refinements += 1;
                    round.provide(p);
                }
                RoundEvent::Accepted { t, .. } => break Some(t),
                RoundEvent::Rejected { t, .. } => {
                    stats.loops.push(t.0);
                    break None;
                }
            }
        };
        stats.ky_bits += round.ky_bits();
        stats.u_bits += round.u_bits();
        if let Some(t) = finished {
            stats.loops.push(t.0);
            return Ok((current.expect("accepted a proposal"), stats));
        }
    }
    Err(SampleError::RoundLimit(cfg.max_rounds).into())
}

/// Classical rejection with exactly known `p`: draw `X ~ q`, accept iff
/// `U·Cq_X ≤ p_X`, with `U` materialized lazily. Exact ties `U·Cq_X = p_X`
/// can only occur when `U` equals its finite prefix and are rejected.
///
/// Returns the flat outcome and the number of proposals.
pub fn vn_sample(p: &[Dyadic], q: &Proposal, tree: &mut DdgTree, src: &mut impl BitSource) -> (usize, u64) {
    let mut rounds = 0;
    loop {
        rounds += 1;
        let (x, _) = tree.sample(src);
        let cq = q.cq(x);
        let mut u = LazyUniform::new();
        loop {
            let lo = &u.value() * cq;
            let hi = &(&u.value() + &Precision(u.len() as u32).radius()) * cq;
            if hi <= p[x] {
                return (x, rounds);
            }
            if lo >= p[x] {
                break;
            }
            u.push(src.next_bit());
        }
    }
}

/// Oracle over an exactly known probability vector: `p_x(t)` is the
/// `t`-bit truncation of `p_x`.
#[derive(Clone, Debug)]
pub struct ExactOracle {
    pub outcomes: Vec<usize>,
    pub p: Vec<Dyadic>,
}

impl ExactOracle {
    pub fn new(outcomes: Vec<usize>, p: Vec<Dyadic>) -> Self {
        ExactOracle { outcomes, p }
    }
}

impl ProbabilityOracle for ExactOracle {
    type Error = SampleError;

    fn table(&mut self, t0: Precision) -> Result<ApproxProbabilityTable, SampleError> {
        let values = self.p.iter().map(|v| crate::dyadic::truncate(v, t0)).collect();
        Ok(ApproxProbabilityTable::new(t0, self.outcomes.clone(), values)?)
    }

    fn refine(&mut self, x: &Outcome, t: Precision) -> Result<Dyadic, SampleError> {
        let flat = x.flat(&self.outcomes).map_err(|e| ApproxError::Shape(e.to_string()))?;
        Ok(crate::dyadic::truncate(&self.p[flat], t))
    }
}

/// Exact outcome masses of one proposal round, found by walking every
/// random-bit path.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundEnumeration {
    /// Probability that the round accepts with each flat outcome.
    pub accept: Vec<Dyadic>,
    pub reject: Dyadic,
    /// Mass of paths cut off at the depth limit.
    pub unexplored: Dyadic,
    pub leaves: u64,
}

/// Explores every path of one round (random-bit model) up to `max_depth`
/// random bits. `p_at(x, t)` answers refinement requests and must be a
/// deterministic function of its arguments.
pub fn enumerate_round(
    q: &Proposal,
    table: &ApproxProbabilityTable,
    cfg: SamplerConfig,
    max_depth: u32,
    mut p_at: impl FnMut(usize, Precision) -> Result<Dyadic, SampleError>,
) -> Result<RoundEnumeration, SampleError> {
    let mut tree = DdgTree::from_proposal(q);
    let mut out = RoundEnumeration {
        accept: vec![Dyadic::zero(); q.n()],
        reject: Dyadic::zero(),
        unexplored: Dyadic::zero(),
        leaves: 0,
    };
    let mut stack = vec![(RoundMachine::new(cfg), 0u32)];
    while let Some((mut machine, depth)) = stack.pop() {
        loop {
            match machine.poll(&mut tree, q, table)? {
                RoundEvent::Proposed(_) => continue,
                RoundEvent::NeedRefinement { x, t } => machine.provide(p_at(x, t)?),
                RoundEvent::NeedBit => {
                    let mass = Dyadic::pow2(-(depth as i64));
                    if depth >= max_depth {
                        out.unexplored = &out.unexplored + &mass;
                    } else {
                        let mut one = machine.clone();
                        one.push_bit(true);
                        machine.push_bit(false);
                        stack.push((one, depth + 1));
                        stack.push((machine, depth + 1));
                    }
                    break;
                }
                RoundEvent::Accepted { x, .. } => {
                    out.accept[x] = &out.accept[x] + &Dyadic::pow2(-(depth as i64));
                    out.leaves += 1;
                    break;
                }
                RoundEvent::Rejected { .. } => {
                    out.reject = &out.reject + &Dyadic::pow2(-(depth as i64));
                    out.leaves += 1;
                    break;
                }
            }
        }
    }
    Ok(out)
}
