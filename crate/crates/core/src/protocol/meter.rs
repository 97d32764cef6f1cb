//! Communication metering and the closed-form cost formulas it is checked
//! against.

use serde::Serialize;

use super::message::{Kind, Message, PREFIX_BYTES, HEADER_BYTES};
use crate::dyadic::{ceil_log2, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostPhase {
    Setup,
    Refinement,
    Control,
}

/// Which phase a message is charged to and how many bits it counts for.
///
/// Data-bearing messages count their whole payload. Control messages count
/// their nominal information content (`⌈lg n_i⌉` for an outcome count or an
/// assigned outcome, `⌈lg t0⌉` for `t0`, one bit for the final output
/// request), not the 32-bit fields used on the wire.
pub fn metered(msg: &Message) -> (CostPhase, u64) {
    match msg {
        Message::AnnounceOutcomeCount { n, .. } => (CostPhase::Control, u64::from(ceil_log2(u64::from(*n)))),
        Message::SetT0 { t0, .. } => (CostPhase::Control, t0_bits(*t0)),
        Message::OutcomeAssigned { .. } => (CostPhase::Control, 0),
        Message::FinalOutput => (CostPhase::Control, 1),
        Message::InitialTruncations(p) => (CostPhase::Setup, p.len() as u64),
        Message::RequestOneMoreBit | Message::RequestFreshApproximation => (CostPhase::Refinement, 1),
        Message::RefinementBits(p) | Message::ApproximationPayload(p) => (CostPhase::Refinement, p.len() as u64),
    }
}

/// `⌈lg t0⌉`, with `t0 = 0` costing nothing like `t0 = 1`.
fn t0_bits(t0: u32) -> u64 {
    u64::from(ceil_log2(u64::from(t0.max(1))))
}

/// Bit counters owned by the leader.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BitMeter {
    pub setup: u64,
    pub refinement: u64,
    pub control: u64,
    pub upstream: u64,
    pub downstream: u64,
    /// Bytes on the wire that are not payload (length prefix, header,
    /// padding), as bits. Excluded from everything else.
    pub framing: u64,
    pub messages: u64,
}

impl BitMeter {
    /// Total information bits `Z = setup + refinement`.
    pub fn z(&self) -> u64 {
        self.setup + self.refinement
    }

    pub fn with_control(&self) -> u64 {
        self.z() + self.control
    }

    /// Records one message; `control_bits` overrides the nominal count for
    /// outcome assignments, which depends on the recipient's `n_i`.
    pub fn record(&mut self, msg: &Message, control_bits: Option<u64>) -> u64 {
        let (phase, mut bits) = metered(msg);
        if let Some(b) = control_bits {
            bits = b;
        }
        match phase {
            CostPhase::Setup => self.setup += bits,
            CostPhase::Refinement => self.refinement += bits,
            CostPhase::Control => self.control += bits,
        }
        if msg.kind().upstream() {
            self.upstream += bits;
        } else {
            self.downstream += bits;
        }
        let payload = msg.payload();
        self.framing += ((PREFIX_BYTES + HEADER_BYTES) * 8 + payload.bytes().len() * 8 - payload.len()) as u64;
        self.messages += 1;
        bits
    }

    pub fn add(&mut self, other: &BitMeter) {
        self.setup += other.setup;
        self.refinement += other.refinement;
        self.control += other.control;
        self.upstream += other.upstream;
        self.downstream += other.downstream;
        self.framing += other.framing;
        self.messages += other.messages;
    }
}

/// One line of a transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub upstream: bool,
    pub kind: Kind,
    pub custodian: u16,
    pub metered_bits: u64,
    pub cumulative_z: u64,
}

/// Every message seen by the leader, in order, with its frame bytes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    #[serde(skip)]
    pub bytes: Vec<u8>,
}

/// Cost parameters of a scenario shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostModel {
    pub m: usize,
    pub dims: Vec<usize>,
    pub outcomes: Vec<usize>,
}

impl CostModel {
    pub fn new(dims: Vec<usize>, outcomes: Vec<usize>) -> Self {
        CostModel { m: dims.len(), dims, outcomes }
    }

    pub fn d(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n(&self) -> usize {
        self.outcomes.iter().product()
    }

    /// `⌈2 lg d⌉ + 2⌈lg m⌉`.
    pub fn loss_bits(&self) -> u64 {
        let d = self.d() as u64;
        u64::from(ceil_log2(d * d) + 2 * ceil_log2(self.m as u64))
    }

    pub fn sum_d2(&self) -> u64 {
        self.dims.iter().map(|&d| (d * d) as u64).sum()
    }

    pub fn sum_nd2(&self) -> u64 {
        self.dims.iter().zip(&self.outcomes).map(|(&d, &n)| (n * d * d) as u64).sum()
    }

    /// `δ(t) = (t + 2 + ⌈2 lg d⌉ + 2⌈lg m⌉)·Σ n_i d_i²`.
    pub fn delta(&self, t: Precision) -> u64 {
        (u64::from(t.0) + 2 + self.loss_bits()) * self.sum_nd2()
    }

    /// Truncation-mode refinement cost `γ = m + Σ d_i²`.
    pub fn gamma(&self) -> u64 {
        self.m as u64 + self.sum_d2()
    }

    /// Approximation-mode cost of the round producing `p_X(t)`:
    /// `γ(t) = m + (t + 2 + ⌈2 lg d⌉ + 2⌈lg m⌉)·Σ d_i²`.
    pub fn gamma_at(&self, t: Precision) -> u64 {
        self.m as u64 + (u64::from(t.0) + 2 + self.loss_bits()) * self.sum_d2()
    }

    /// `δ(t0) + 3γ(1 + 2^{1-t0} n)`.
    pub fn ez_bound_uniform(&self, t0: Precision) -> f64 {
        self.delta(t0) as f64 + 3.0 * self.gamma() as f64 * self.c_bound(t0)
    }

    /// `δ(t0) + (3 + 2^{-t0})(1 + 2^{1-t0} n)γ`.
    pub fn ez_bound_discrete(&self, t0: Precision) -> f64 {
        self.delta(t0) as f64 + (3.0 + 2f64.powi(-(t0.0 as i32))) * self.c_bound(t0) * self.gamma() as f64
    }

    /// The closed form at `t0 = ⌈lg n⌉`:
    /// `(⌈lg n⌉ + ⌈2 lg d⌉ + 2⌈lg m⌉ + 2)·Σ n_i d_i² + 9(m + Σ d_i²)`.
    pub fn ez_bound_tradeoff(&self) -> u64 {
        (u64::from(ceil_log2(self.n() as u64)) + self.loss_bits() + 2) * self.sum_nd2() + 9 * self.gamma()
    }

    /// Approximation-mode bound `δ(t0) + (1 + 2^{1-t0} n)·Σ_{t>t0} γ(t)·P(T ≥ t)`,
    /// with `P(T ≥ t) ≤ min(1, 2^{t0-t+2} + 2^{2-t})`.
    pub fn ez_bound_approximation(&self, t0: Precision) -> f64 {
        let mut tail = 0.0;
        for t in (t0.0 + 1)..(t0.0 + 200) {
            let p = (2f64.powi(t0.0 as i32 - t as i32 + 2) + 2f64.powi(2 - t as i32)).min(1.0);
            tail += self.gamma_at(Precision(t)) as f64 * p;
        }
        self.delta(t0) as f64 + self.c_bound(t0) * tail
    }

    /// `1 + 2^{1-t0} n`.
    pub fn c_bound(&self, t0: Precision) -> f64 {
        1.0 + 2f64.powi(1 - t0.0 as i32) * self.n() as f64
    }

    /// `(1 + 2^{1-t0} n)(lg n + t0 + 5 + 2^{-t0})`.
    pub fn er_bound(&self, t0: Precision) -> f64 {
        let t0f = f64::from(t0.0);
        self.c_bound(t0) * ((self.n() as f64).log2() + t0f + 5.0 + 2f64.powf(-t0f))
    }

    /// Nominal control bits for the setup lines: `Σ⌈lg n_i⌉` plus `⌈lg t0⌉`
    /// per custodian.
    pub fn control_setup(&self, t0: Precision) -> u64 {
        let announce: u64 = self.outcomes.iter().map(|&n| u64::from(ceil_log2(n as u64))).sum();
        announce + self.m as u64 * t0_bits(t0.0)
    }
}
