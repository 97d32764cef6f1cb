//! Leader and custodian roles, the wire format, and the bit meter.

mod custodian;
mod direct;
mod leader;
mod message;
mod meter;
mod transport;

use serde::Serialize;
use thiserror::Error;

pub use custodian::{approximation_scalar, hermitian_scalars, truncation_scalar, Custodian};
pub use direct::ScenarioOracle;
pub use leader::{rebuild_hermitian, Leader, PartyInfo, StepCost};
pub use message::{
    decode_body, decode_frame, encode_frame, pack_scalars, unpack_scalars, BitBuf, CachePolicy, CodecError, Kind,
    Message, SourceMode, WireScalar, HEADER_BYTES, PREFIX_BYTES,
};
pub use meter::{metered, BitMeter, CostModel, CostPhase, Transcript, TranscriptEntry};
pub use transport::{InMemoryTransport, SocketTransport, Transport};

use crate::approx::ApproxError;
use crate::dyadic::{ceil_log2, Precision};
use crate::quantum::Scenario;
use crate::randomness::BitSource;
use crate::sampler::{sample_modified, RandomnessModel, SampleError, SampleStats, SamplerConfig, DEFAULT_BUDGET};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("protocol violation: {0}")]
    Unexpected(String),
}

impl From<ApproxError> for ProtocolError {
    fn from(e: ApproxError) -> Self {
        ProtocolError::Sample(SampleError::Approx(e))
    }
}

/// `t0 = ⌈lg n⌉` (0 for `n = 1`).
pub fn t0_default(n: usize) -> Precision {
    Precision(ceil_log2(n as u64))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum T0Policy {
    /// `⌈lg n⌉`.
    #[default]
    CeilLgN,
    /// `⌈lg n⌉ + a`, floored at 0.
    Offset(i32),
    Fixed(u32),
}

impl T0Policy {
    pub fn choose(self, n: usize) -> Precision {
        let base = t0_default(n).0 as i64;
        match self {
            T0Policy::CeilLgN => Precision(base as u32),
            T0Policy::Offset(a) => Precision((base + i64::from(a)).max(0) as u32),
            T0Policy::Fixed(t) => Precision(t),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    #[default]
    InMemory,
    Socket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolConfig {
    pub t0: T0Policy,
    pub cache: CachePolicy,
    pub model: RandomnessModel,
    pub transport: TransportKind,
    /// Makes every custodian answer with fresh approximations, even when its
    /// entries are exact.
    pub force_approximation: bool,
    pub record_transcript: bool,
    pub budget: u32,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            t0: T0Policy::default(),
            cache: CachePolicy::default(),
            model: RandomnessModel::Discrete,
            transport: TransportKind::default(),
            force_approximation: false,
            record_transcript: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Outcome and accounting of one protocol run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub outcome: Vec<usize>,
    pub flat: usize,
    pub custodian_outputs: Vec<Option<usize>>,
    pub t0: Precision,
    pub k0: Precision,
    pub modes: Vec<SourceMode>,
    pub stats: SampleStats,
    pub meter: BitMeter,
    pub steps: Vec<StepCost>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Transcript>,
}

impl RunReport {
    pub fn z(&self) -> u64 {
        self.meter.z()
    }

    pub fn random_bits(&self) -> u64 {
        self.stats.random_bits()
    }
}

/// Builds one custodian per POVM of the scenario.
pub fn custodians_for(s: &Scenario, force_approximation: bool) -> Vec<Custodian> {
    s.povms
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = Custodian::new(i as u16, p.clone());
            if force_approximation {
                c.approximation_only()
            } else {
                c
            }
        })
        .collect()
}

/// Runs the leader against an already connected transport.
pub fn run_leader<T: Transport>(
    transport: T,
    s: &Scenario,
    cfg: &ProtocolConfig,
    src: &mut impl BitSource,
) -> Result<RunReport, ProtocolError> {
    let mut leader = Leader::connect(transport, s.rho.0.clone(), cfg.cache, cfg.record_transcript)?;
    let n = leader.n();
    let t0 = cfg.t0.choose(n);
    let modes = leader.parties().iter().map(|p| p.mode).collect();
    let outcomes = leader.cost_model().outcomes.clone();
    let scfg = SamplerConfig { budget: cfg.budget, model: cfg.model, ..SamplerConfig::new(t0) };
    let (x, stats) = sample_modified(&mut leader, src, scfg)?;
    let k0 = leader.k0();
    let (custodian_outputs, meter, transcript, steps) = leader.finish()?;
    let flat = x.flat(&outcomes).map_err(|e| ProtocolError::Unexpected(e.to_string()))?;
    Ok(RunReport { outcome: x.0, flat, custodian_outputs, t0, k0, modes, stats, meter, steps, transcript })
}

/// Runs the full protocol on a scenario: custodians are built from its
/// POVMs, the leader receives only `ρ`.
pub fn run_protocol(s: &Scenario, cfg: &ProtocolConfig, src: &mut impl BitSource) -> Result<RunReport, ProtocolError> {
    let custodians = custodians_for(s, cfg.force_approximation);
    match cfg.transport {
        TransportKind::InMemory => run_leader(InMemoryTransport::new(custodians), s, cfg, src),
        TransportKind::Socket => run_leader(SocketTransport::spawn(custodians)?, s, cfg, src),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t0_examples() {
        assert_eq!(t0_default(8), Precision(3));
        assert_eq!(t0_default(5), Precision(3));
        assert_eq!(t0_default(1), Precision(0));
        assert_eq!(T0Policy::Offset(-5).choose(8), Precision(0));
        assert_eq!(T0Policy::Offset(1).choose(8), Precision(4));
    }
}
