//! The custodian role: holds one POVM and answers the leader's requests.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::One;

use super::message::{pack_scalars, BitBuf, CachePolicy, Message, SourceMode, WireScalar};
use super::ProtocolError;
use crate::dyadic::{Dyadic, Precision};
use crate::quantum::{EntryMatrix, Povm, RealEntry};

/// The `d²` real scalars that define a Hermitian `d×d` matrix, in wire
/// order: for each row `r`, the real diagonal entry, then the real and
/// imaginary parts of entries `(r, c)` for `c > r`.
pub fn hermitian_scalars(m: &EntryMatrix) -> Vec<&RealEntry> {
    let d = m.dim();
    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        out.push(&m.get(r, r).re);
        for c in (r + 1)..d {
            let e = m.get(r, c);
            out.push(&e.re);
            out.push(&e.im);
        }
    }
    out
}

fn cap(k: Precision) -> BigUint {
    (BigUint::one() << k.0 as usize) - 1u32
}

/// `k`-bit wire form of an exact value: sign and `⌊|x|·2^k⌋`, capped at
/// `2^k - 1` so that `|x| = 1` is sent as `0.11…1`. The `k + 1`-bit form
/// extends the `k`-bit one by exactly one magnitude bit.
pub fn truncation_scalar(x: &Dyadic, k: Precision) -> WireScalar {
    let mag = x.scaled_magnitude(k).min(cap(k));
    WireScalar { negative: x.is_negative(), magnitude: mag }
}

/// `k`-bit approximation of a computed value: a `(k+1)`-bit approximation
/// rounded to the nearest multiple of `2^-k`, magnitude capped at `2^k - 1`.
pub fn approximation_scalar(e: &RealEntry, k: Precision) -> WireScalar {
    let a = e.approx(k.next());
    let half_ulp = k.next().radius();
    let mag = (&a.abs() + &half_ulp).scaled_magnitude(k).min(cap(k));
    WireScalar { negative: a.is_negative(), magnitude: mag }
}

fn source_mode(povm: &Povm) -> SourceMode {
    if povm.is_exact() {
        SourceMode::TruncationCapable
    } else {
        SourceMode::ApproximationOnly
    }
}

/// Holds POVM `i` and nothing else.
#[derive(Debug)]
pub struct Custodian {
    id: u16,
    povm: Povm,
    mode: SourceMode,
    k0: Precision,
    policy: CachePolicy,
    assigned: Option<usize>,
    /// Precision of the last scalars sent, per element.
    sent: HashMap<usize, Precision>,
    output: Option<usize>,
}

impl Custodian {
    pub fn new(id: u16, povm: Povm) -> Self {
        let mode = source_mode(&povm);
        Custodian {
            id,
            povm,
            mode,
            k0: Precision(0),
            policy: CachePolicy::default(),
            assigned: None,
            sent: HashMap::new(),
            output: None,
        }
    }

    /// Forces approximation-only behaviour even for exact entries.
    pub fn approximation_only(mut self) -> Self {
        self.mode = SourceMode::ApproximationOnly;
        self
    }

    pub fn id(&self) -> u16 {
        self.id
    }

    pub fn mode(&self) -> SourceMode {
        self.mode
    }

    /// The outcome this custodian output at the end of the protocol.
    pub fn output(&self) -> Option<usize> {
        self.output
    }

    pub fn announce(&self) -> Message {
        Message::AnnounceOutcomeCount {
            n: self.povm.elements.len() as u32,
            d: self.povm.elements[0].dim() as u32,
            mode: self.mode,
        }
    }

    fn scalars(&self, j: usize, k: Precision) -> Vec<WireScalar> {
        hermitian_scalars(&self.povm.elements[j])
            .into_iter()
            .map(|e| match (self.mode, e) {
                (SourceMode::TruncationCapable, RealEntry::Exact(x)) => truncation_scalar(x, k),
                (SourceMode::TruncationCapable, RealEntry::Computed(_)) => {
                    unreachable!("truncation mode requires exact entries")
                }
                (SourceMode::ApproximationOnly, e) => approximation_scalar(e, k),
            })
            .collect()
    }

    fn assigned(&self) -> Result<usize, ProtocolError> {
        self.assigned.ok_or_else(|| ProtocolError::Unexpected(format!("custodian {} has no assigned outcome", self.id)))
    }

    /// Handles one leader message; returns the reply, if any.
    pub fn handle(&mut self, msg: Message) -> Result<Option<Message>, ProtocolError> {
        match msg {
            Message::SetT0 { k0, policy, .. } => {
                self.k0 = Precision(k0);
                self.policy = policy;
                let mut all = Vec::new();
                for j in 0..self.povm.elements.len() {
                    all.extend(self.scalars(j, self.k0));
                    self.sent.insert(j, self.k0);
                }
                Ok(Some(Message::InitialTruncations(pack_scalars(&all, self.k0))))
            }
            Message::OutcomeAssigned { x } => {
                let x = x as usize;
                if x >= self.povm.elements.len() {
                    return Err(ProtocolError::Unexpected(format!("outcome {x} out of range for custodian {}", self.id)));
                }
                if self.policy == CachePolicy::PerRound {
                    for k in self.sent.values_mut() {
                        *k = self.k0;
                    }
                }
                self.assigned = Some(x);
                Ok(None)
            }
            Message::RequestOneMoreBit => {
                if self.mode != SourceMode::TruncationCapable {
                    return Err(ProtocolError::Unexpected("one-more-bit request to an approximation-only custodian".into()));
                }
                let x = self.assigned()?;
                let k = self.sent[&x].next();
                self.sent.insert(x, k);
                let mut bits = BitBuf::new();
                for s in self.scalars(x, k) {
                    bits.push(s.magnitude.bit(0));
                }
                Ok(Some(Message::RefinementBits(bits)))
            }
            Message::RequestFreshApproximation => {
                let x = self.assigned()?;
                let k = self.sent[&x].next();
                self.sent.insert(x, k);
                Ok(Some(Message::ApproximationPayload(pack_scalars(&self.scalars(x, k), k))))
            }
            Message::FinalOutput => {
                self.output = Some(self.assigned()?);
                Ok(None)
            }
            other => Err(ProtocolError::Unexpected(format!("custodian {} received {:?}", self.id, other.kind()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::computable::{TrigExpr, TrigFactor};

    #[test]
    fn truncation_scalars_refine_by_one_bit() {
        let x = Dyadic::from_ratio_pow2(-11, 4); // -0.1011
        let a = truncation_scalar(&x, Precision(2));
        assert_eq!((a.negative, a.magnitude.clone()), (true, BigUint::from(2u32)));
        let mut b = a.clone();
        b.extend(truncation_scalar(&x, Precision(3)).magnitude.bit(0));
        assert_eq!(b, truncation_scalar(&x, Precision(3)));
        // |x| = 1 is sent as all ones
        let one = truncation_scalar(&Dyadic::from_int(-1), Precision(4));
        assert_eq!(one.magnitude, BigUint::from(15u32));
        assert!(one.negative);
    }

    #[test]
    fn approximation_scalar_within_radius() {
        let e = RealEntry::Computed(TrigExpr::new(Dyadic::zero(), Dyadic::one(), vec![TrigFactor::cos_pi(1, 5)]));
        let exact = (std::f64::consts::PI / 5.0).cos();
        for k in 1..40 {
            let s = approximation_scalar(&e, Precision(k));
            assert!((s.value(Precision(k)).to_f64() - exact).abs() <= 2f64.powi(-(k as i32)));
        }
    }

    #[test]
    fn packing_counts_d_squared() {
        let m = EntryMatrix::from_exact(&crate::quantum::CMatrix::<Dyadic>::identity(3));
        assert_eq!(hermitian_scalars(&m).len(), 9);
    }
}
