//! The leader role. It holds `ρ`, talks to custodians only through a
//! [`Transport`], and meters every message it sends or receives.

use super::message::{decode_frame, encode_frame, unpack_scalars, CachePolicy, Message, SourceMode, WireScalar};
use super::meter::{BitMeter, CostModel, Transcript, TranscriptEntry};
use super::transport::Transport;
use super::ProtocolError;
use crate::approx::{assemble_probability, required_entry_precision, rho_precision, ApproxProbabilityTable};
use crate::dyadic::{ceil_log2, Dyadic, Precision};
use crate::quantum::{CMatrix, EntryMatrix, Outcome};
use crate::sampler::ProbabilityOracle;
use crate::scalar::Complex;

/// What a custodian told the leader about itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartyInfo {
    pub n: usize,
    pub d: usize,
    pub mode: SourceMode,
}

/// The leader's copy of one POVM element, rebuilt from wire scalars.
#[derive(Clone, Debug)]
struct ElementCache {
    k: Precision,
    scalars: Vec<WireScalar>,
    matrix: CMatrix<Dyadic>,
}

impl ElementCache {
    fn new(d: usize, k: Precision, scalars: Vec<WireScalar>) -> Self {
        let matrix = rebuild_hermitian(d, k, &scalars);
        ElementCache { k, scalars, matrix }
    }
}

/// Inverse of the custodian's Hermitian packing.
pub fn rebuild_hermitian(d: usize, k: Precision, scalars: &[WireScalar]) -> CMatrix<Dyadic> {
    assert_eq!(scalars.len(), d * d);
    let mut m = CMatrix::<Dyadic>::zeros(d);
    let mut it = scalars.iter().map(|s| s.value(k));
    for r in 0..d {
        m.set(r, r, Complex::real(it.next().unwrap()));
        for c in (r + 1)..d {
            let re = it.next().unwrap();
            let im = it.next().unwrap();
            m.set(c, r, Complex::new(re.clone(), -&im));
            m.set(r, c, Complex::new(re, im));
        }
    }
    m
}

/// Refinement bits spent on one step of the inner loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct StepCost {
    pub t: u32,
    pub bits: u64,
    /// Custodians that had to be asked (the rest were served from cache).
    pub asked: u32,
}

pub struct Leader<T: Transport> {
    transport: T,
    rho: EntryMatrix,
    rho_cache: Option<(Precision, CMatrix<Dyadic>)>,
    parties: Vec<PartyInfo>,
    cost: CostModel,
    policy: CachePolicy,
    t0: Precision,
    k0: Precision,
    initial: Vec<Vec<ElementCache>>,
    elements: Vec<Vec<ElementCache>>,
    assigned: Vec<usize>,
    meter: BitMeter,
    transcript: Option<Transcript>,
    steps: Vec<StepCost>,
}

impl<T: Transport> Leader<T> {
    /// Collects every custodian's announcement.
    pub fn connect(transport: T, rho: EntryMatrix, policy: CachePolicy, record_transcript: bool) -> Result<Self, ProtocolError> {
        let mut leader = Leader {
            transport,
            rho,
            rho_cache: None,
            parties: Vec::new(),
            cost: CostModel::new(vec![], vec![]),
            policy,
            t0: Precision(0),
            k0: Precision(0),
            initial: Vec::new(),
            elements: Vec::new(),
            assigned: Vec::new(),
            meter: BitMeter::default(),
            transcript: record_transcript.then(Transcript::default),
            steps: Vec::new(),
        };
        for i in 0..leader.transport.custodians() {
            match leader.receive(i)? {
                Message::AnnounceOutcomeCount { n, d, mode } => {
                    if n == 0 || d == 0 {
                        return Err(ProtocolError::Unexpected(format!("custodian {i} announced n = {n}, d = {d}")));
                    }
                    leader.parties.push(PartyInfo { n: n as usize, d: d as usize, mode })
                }
                other => return Err(ProtocolError::Unexpected(format!("expected announcement, got {:?}", other.kind()))),
            }
        }
        let dims: Vec<usize> = leader.parties.iter().map(|p| p.d).collect();
        let outcomes = leader.parties.iter().map(|p| p.n).collect();
        if dims.iter().product::<usize>() != leader.rho.dim() {
            return Err(ProtocolError::Unexpected(format!(
                "custodian dimensions {dims:?} do not match the {0}x{0} density matrix",
                leader.rho.dim()
            )));
        }
        leader.cost = CostModel::new(dims, outcomes);
        leader.assigned = vec![0; leader.parties.len()];
        Ok(leader)
    }

    pub fn parties(&self) -> &[PartyInfo] {
        &self.parties
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost
    }

    pub fn n(&self) -> usize {
        self.cost.n()
    }

    pub fn meter(&self) -> &BitMeter {
        &self.meter
    }

    pub fn steps(&self) -> &[StepCost] {
        &self.steps
    }

    pub fn k0(&self) -> Precision {
        self.k0
    }

    fn entry_precision(&self, t: Precision) -> Precision {
        required_entry_precision(t, self.cost.d(), self.cost.m)
    }

    fn log(&mut self, upstream: bool, custodian: u16, msg: &Message, frame: &[u8]) {
        let control = match msg {
            Message::OutcomeAssigned { .. } => Some(u64::from(ceil_log2(self.parties[custodian as usize].n as u64))),
            _ => None,
        };
        let bits = self.meter.record(msg, control);
        if let Some(tr) = &mut self.transcript {
            tr.entries.push(TranscriptEntry {
                upstream,
                kind: msg.kind(),
                custodian,
                metered_bits: bits,
                cumulative_z: self.meter.z(),
            });
            tr.bytes.extend_from_slice(frame);
        }
    }

    fn send(&mut self, i: usize, msg: Message) -> Result<(), ProtocolError> {
        let frame = encode_frame(i as u16, &msg);
        self.log(false, i as u16, &msg, &frame);
        self.transport.send(i as u16, frame)
    }

    fn receive(&mut self, i: usize) -> Result<Message, ProtocolError> {
        let frame = self.transport.recv(i as u16)?;
        let (from, msg) = decode_frame(&frame)?;
        if from as usize != i {
            return Err(ProtocolError::Unexpected(format!("frame from custodian {from} on channel {i}")));
        }
        self.log(true, from, &msg, &frame);
        Ok(msg)
    }

    fn rho_at(&mut self, k: Precision) -> &CMatrix<Dyadic> {
        let need = rho_precision(k, self.cost.m);
        let stale = match &self.rho_cache {
            Some((p, _)) => *p < need,
            None => true,
        };
        if stale {
            let hold = Precision(need.0 + 32);
            self.rho_cache = Some((hold, self.rho.approx(hold)));
        }
        &self.rho_cache.as_ref().expect("rho materialized").1
    }

    fn probability(&mut self, x: &Outcome, t: Precision) -> Result<Dyadic, ProtocolError> {
        let k = self.entry_precision(t);
        self.rho_at(k);
        let rho = &self.rho_cache.as_ref().expect("rho materialized").1;
        let els: Vec<&CMatrix<Dyadic>> = x.0.iter().enumerate().map(|(i, &xi)| &self.elements[i][xi].matrix).collect();
        Ok(assemble_probability(&els, &self.cost.dims, rho, x, k, t)?)
    }

    /// Sends the final-output request to every custodian and closes the
    /// transport; returns each custodian's output.
    pub fn finish(mut self) -> Result<(Vec<Option<usize>>, BitMeter, Option<Transcript>, Vec<StepCost>), ProtocolError> {
        for i in 0..self.parties.len() {
            self.send(i, Message::FinalOutput)?;
        }
        let outputs = self.transport.close()?;
        Ok((outputs, self.meter, self.transcript, self.steps))
    }
}

impl<T: Transport> ProbabilityOracle for Leader<T> {
    type Error = ProtocolError;

    fn table(&mut self, t0: Precision) -> Result<ApproxProbabilityTable, ProtocolError> {
        self.t0 = t0;
        self.k0 = self.entry_precision(t0);
        let k0 = self.k0;
        for i in 0..self.parties.len() {
            self.send(i, Message::SetT0 { t0: t0.0, k0: k0.0, policy: self.policy })?;
        }
        self.elements.clear();
        for i in 0..self.parties.len() {
            let PartyInfo { n, d, .. } = self.parties[i];
            let payload = match self.receive(i)? {
                Message::InitialTruncations(p) => p,
                other => return Err(ProtocolError::Unexpected(format!("expected initial truncations, got {:?}", other.kind()))),
            };
            let scalars = unpack_scalars(&payload, k0)
                .filter(|s| s.len() == n * d * d)
                .ok_or_else(|| ProtocolError::Unexpected(format!("custodian {i} sent {} setup bits", payload.len())))?;
            let els = scalars.chunks(d * d).map(|c| ElementCache::new(d, k0, c.to_vec())).collect();
            self.elements.push(els);
        }
        self.initial = self.elements.clone();
        let outcomes: Vec<usize> = self.cost.outcomes.clone();
        let mut values = Vec::with_capacity(self.n());
        for flat in 0..self.n() {
            let x = Outcome::from_flat(flat, &outcomes).expect("flat index in range");
            values.push(self.probability(&x, t0)?);
        }
        Ok(ApproxProbabilityTable::new(t0, outcomes, values)?)
    }

    fn on_proposal(&mut self, x: &Outcome) -> Result<(), ProtocolError> {
        if self.policy == CachePolicy::PerRound {
            self.elements.clone_from(&self.initial);
        }
        for (i, &xi) in x.0.iter().enumerate() {
            self.assigned[i] = xi;
            self.send(i, Message::OutcomeAssigned { x: xi as u32 })?;
        }
        Ok(())
    }

    fn refine(&mut self, x: &Outcome, t: Precision) -> Result<Dyadic, ProtocolError> {
        let k = self.entry_precision(t);
        let before = self.meter.refinement;
        let mut asked = 0;
        for (i, &xi) in x.0.iter().enumerate() {
            if xi != self.assigned[i] {
                return Err(ProtocolError::Unexpected(format!("refinement of unassigned outcome {xi} at custodian {i}")));
            }
            let have = self.elements[i][xi].k;
            if have >= k {
                continue;
            }
            asked += 1;
            let next = have.next();
            let d = self.parties[i].d;
            match self.parties[i].mode {
                SourceMode::TruncationCapable => {
                    self.send(i, Message::RequestOneMoreBit)?;
                    let bits = match self.receive(i)? {
                        Message::RefinementBits(b) if b.len() == d * d => b,
                        other => return Err(ProtocolError::Unexpected(format!("expected {} refinement bits, got {:?}", d * d, other))),
                    };
                    let el = &mut self.elements[i][xi];
                    let mut reader = bits.reader();
                    for s in &mut el.scalars {
                        s.extend(reader.bit().expect("length checked"));
                    }
                    el.k = next;
                    el.matrix = rebuild_hermitian(d, next, &el.scalars);
                }
                SourceMode::ApproximationOnly => {
                    self.send(i, Message::RequestFreshApproximation)?;
                    let payload = match self.receive(i)? {
                        Message::ApproximationPayload(p) => p,
                        other => return Err(ProtocolError::Unexpected(format!("expected approximation payload, got {:?}", other.kind()))),
                    };
                    let scalars = unpack_scalars(&payload, next)
                        .filter(|s| s.len() == d * d)
                        .ok_or_else(|| ProtocolError::Unexpected(format!("custodian {i} sent {} approximation bits", payload.len())))?;
                    self.elements[i][xi] = ElementCache::new(d, next, scalars);
                }
            }
            if self.elements[i][xi].k < k {
                return Err(ProtocolError::Unexpected(format!("custodian {i} is behind: {} < {k}", self.elements[i][xi].k)));
            }
        }
        self.steps.push(StepCost { t: t.0, bits: self.meter.refinement - before, asked });
        self.probability(x, t)
    }
}
