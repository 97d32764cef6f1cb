//! Protocol messages and their framed byte encoding.
//!
//! Frame layout (all integers little-endian):
//!
//! ```text
//! u32  frame length in bytes, not counting these 4
//! u8   kind
//! u16  custodian id
//! u32  payload length in bits
//! ...  payload bits, MSB-first, zero-padded to a whole byte
//! ```

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::dyadic::{Dyadic, Precision};

/// Header size in bytes, after the length prefix.
pub const HEADER_BYTES: usize = 7;
/// Length prefix size in bytes.
pub const PREFIX_BYTES: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("frame truncated: {0}")]
    Truncated(&'static str),
    #[error("unknown message kind {0}")]
    UnknownKind(u8),
    #[error("payload length {bits} bits does not fit {bytes} bytes")]
    LengthMismatch { bits: u32, bytes: usize },
    #[error("malformed {kind:?} payload: {reason}")]
    Malformed { kind: Kind, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[repr(u8)]
pub enum Kind {
    AnnounceOutcomeCount = 1,
    SetT0 = 2,
    InitialTruncations = 3,
    OutcomeAssigned = 4,
    RequestOneMoreBit = 5,
    RefinementBits = 6,
    RequestFreshApproximation = 7,
    ApproximationPayload = 8,
    FinalOutput = 9,
}

impl Kind {
    pub fn from_u8(v: u8) -> Result<Self, CodecError> {
        Ok(match v {
            1 => Kind::AnnounceOutcomeCount,
            2 => Kind::SetT0,
            3 => Kind::InitialTruncations,
            4 => Kind::OutcomeAssigned,
            5 => Kind::RequestOneMoreBit,
            6 => Kind::RefinementBits,
            7 => Kind::RequestFreshApproximation,
            8 => Kind::ApproximationPayload,
            9 => Kind::FinalOutput,
            other => return Err(CodecError::UnknownKind(other)),
        })
    }

    pub fn upstream(self) -> bool {
        matches!(
            self,
            Kind::AnnounceOutcomeCount | Kind::InitialTruncations | Kind::RefinementBits | Kind::ApproximationPayload
        )
    }
}

/// What a custodian can do with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceMode {
    /// Prefix-consistent truncations: one more bit per scalar per round.
    TruncationCapable,
    /// Only fresh approximations at any requested precision.
    ApproximationOnly,
}

/// Whether refined parameters survive a rejected proposal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CachePolicy {
    /// Everything ever received is kept and reused.
    #[default]
    Persist,
    /// Refinements are discarded whenever a new outcome is assigned.
    PerRound,
}

/// Packed bits, MSB-first.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitBuf {
    bytes: Vec<u8>,
    len: usize,
}

impl fmt::Debug for BitBuf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitBuf({} bits)", self.len)
    }
}

impl BitBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self, CodecError> {
        if bytes.len() != len.div_ceil(8) {
            return Err(CodecError::LengthMismatch { bits: len as u32, bytes: bytes.len() });
        }
        Ok(BitBuf { bytes, len })
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    /// Appends the low `width` bits of `v`, most significant first.
    pub fn push_uint(&mut self, v: u64, width: u32) {
        for i in (0..width).rev() {
            self.push((v >> i) & 1 == 1);
        }
    }

    pub fn push_big(&mut self, v: &BigUint, width: u32) {
        for i in (0..width as u64).rev() {
            self.push(v.bit(i));
        }
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { buf: self, pos: 0 }
    }
}

pub struct BitReader<'a> {
    buf: &'a BitBuf,
    pos: usize,
}

impl BitReader<'_> {
    pub fn remaining(&self) -> usize {
        self.buf.len - self.pos
    }

    pub fn bit(&mut self) -> Option<bool> {
        if self.pos >= self.buf.len {
            return None;
        }
        self.pos += 1;
        Some(self.buf.get(self.pos - 1))
    }

    pub fn uint(&mut self, width: u32) -> Option<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.bit()?);
        }
        Some(v)
    }

    pub fn big(&mut self, width: u32) -> Option<BigUint> {
        let mut v = BigUint::zero();
        for _ in 0..width {
            v <<= 1usize;
            if self.bit()? {
                v += 1u32;
            }
        }
        Some(v)
    }
}

/// One real scalar on the wire: a sign bit and a `k`-bit magnitude
/// `⌊|x|·2^k⌋`, the magnitude capped at `2^k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireScalar {
    pub negative: bool,
    pub magnitude: BigUint,
}

impl WireScalar {
    pub fn value(&self, k: Precision) -> Dyadic {
        Dyadic::from_sign_magnitude(self.negative, self.magnitude.clone(), k)
    }

    /// Appends the next bit of the expansion.
    pub fn extend(&mut self, bit: bool) {
        self.magnitude <<= 1usize;
        if bit {
            self.magnitude += 1u32;
        }
    }
}

/// `count` scalars of width `k + 1`.
pub fn pack_scalars(scalars: &[WireScalar], k: Precision) -> BitBuf {
    let mut buf = BitBuf::new();
    for s in scalars {
        buf.push(s.negative);
        buf.push_big(&s.magnitude, k.0);
    }
    buf
}

pub fn unpack_scalars(buf: &BitBuf, k: Precision) -> Option<Vec<WireScalar>> {
    let width = k.0 as usize + 1;
    if !buf.len().is_multiple_of(width) {
        return None;
    }
    let mut r = buf.reader();
    (0..buf.len() / width)
        .map(|_| Some(WireScalar { negative: r.bit()?, magnitude: r.big(k.0)? }))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    AnnounceOutcomeCount { n: u32, d: u32, mode: SourceMode },
    /// `t0`, the entry precision `k0` custodians must use, and the cache policy.
    SetT0 { t0: u32, k0: u32, policy: CachePolicy },
    /// All `n_i` elements, each as `d_i²` scalars of `k0 + 1` bits.
    InitialTruncations(BitBuf),
    OutcomeAssigned { x: u32 },
    RequestOneMoreBit,
    /// One bit per scalar of the assigned element.
    RefinementBits(BitBuf),
    RequestFreshApproximation,
    /// `d_i²` scalars of the assigned element, one bit more precise than
    /// the previous ones.
    ApproximationPayload(BitBuf),
    FinalOutput,
}

impl Message {
    pub fn kind(&self) -> Kind {
        match self {
            Message::AnnounceOutcomeCount { .. } => Kind::AnnounceOutcomeCount,
            Message::SetT0 { .. } => Kind::SetT0,
            Message::InitialTruncations(_) => Kind::InitialTruncations,
            Message::OutcomeAssigned { .. } => Kind::OutcomeAssigned,
            Message::RequestOneMoreBit => Kind::RequestOneMoreBit,
            Message::RefinementBits(_) => Kind::RefinementBits,
            Message::RequestFreshApproximation => Kind::RequestFreshApproximation,
            Message::ApproximationPayload(_) => Kind::ApproximationPayload,
            Message::FinalOutput => Kind::FinalOutput,
        }
    }

    pub fn payload(&self) -> BitBuf {
        let mut b = BitBuf::new();
        match self {
            Message::AnnounceOutcomeCount { n, d, mode } => {
                b.push_uint(u64::from(*n), 32);
                b.push_uint(u64::from(*d), 32);
                b.push(*mode == SourceMode::ApproximationOnly);
            }
            Message::SetT0 { t0, k0, policy } => {
                b.push_uint(u64::from(*t0), 32);
                b.push_uint(u64::from(*k0), 32);
                b.push(*policy == CachePolicy::PerRound);
            }
            Message::OutcomeAssigned { x } => b.push_uint(u64::from(*x), 32),
            Message::RequestOneMoreBit | Message::RequestFreshApproximation | Message::FinalOutput => b.push(true),
            Message::InitialTruncations(p) | Message::RefinementBits(p) | Message::ApproximationPayload(p) => {
                b = p.clone()
            }
        }
        b
    }

    pub fn from_payload(kind: Kind, p: BitBuf) -> Result<Self, CodecError> {
        let bad = |reason: &str| CodecError::Malformed { kind, reason: reason.to_string() };
        let fixed = |len: usize| if p.len() == len { Ok(()) } else { Err(bad(&format!("expected {len} bits, got {}", p.len()))) };
        let mut r = p.reader();
        Ok(match kind {
            Kind::AnnounceOutcomeCount => {
                fixed(65)?;
                let n = r.uint(32).unwrap() as u32;
                let d = r.uint(32).unwrap() as u32;
                let mode = if r.bit().unwrap() { SourceMode::ApproximationOnly } else { SourceMode::TruncationCapable };
                Message::AnnounceOutcomeCount { n, d, mode }
            }
            Kind::SetT0 => {
                fixed(65)?;
                let t0 = r.uint(32).unwrap() as u32;
                let k0 = r.uint(32).unwrap() as u32;
                let policy = if r.bit().unwrap() { CachePolicy::PerRound } else { CachePolicy::Persist };
                Message::SetT0 { t0, k0, policy }
            }
            Kind::OutcomeAssigned => {
                fixed(32)?;
                Message::OutcomeAssigned { x: r.uint(32).unwrap() as u32 }
            }
            Kind::RequestOneMoreBit | Kind::RequestFreshApproximation | Kind::FinalOutput => {
                fixed(1)?;
                match kind {
                    Kind::RequestOneMoreBit => Message::RequestOneMoreBit,
                    Kind::RequestFreshApproximation => Message::RequestFreshApproximation,
                    _ => Message::FinalOutput,
                }
            }
            Kind::InitialTruncations => Message::InitialTruncations(p),
            Kind::RefinementBits => Message::RefinementBits(p),
            Kind::ApproximationPayload => Message::ApproximationPayload(p),
        })
    }
}

/// Encodes one frame.
pub fn encode_frame(custodian: u16, msg: &Message) -> Vec<u8> {
    let payload = msg.payload();
    let body_len = HEADER_BYTES + payload.bytes().len();
    let mut out = Vec::with_capacity(PREFIX_BYTES + body_len);
    out.extend_from_slice(&(body_len as u32).to_le_bytes());
    out.push(msg.kind() as u8);
    out.extend_from_slice(&custodian.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload.bytes());
    out
}

/// Decodes a frame body (everything after the length prefix).
pub fn decode_body(body: &[u8]) -> Result<(u16, Message), CodecError> {
    if body.len() < HEADER_BYTES {
        return Err(CodecError::Truncated("header"));
    }
    let kind = Kind::from_u8(body[0])?;
    let custodian = u16::from_le_bytes([body[1], body[2]]);
    let bits = u32::from_le_bytes([body[3], body[4], body[5], body[6]]);
    let payload = BitBuf::from_bytes(body[HEADER_BYTES..].to_vec(), bits as usize)?;
    Ok((custodian, Message::from_payload(kind, payload)?))
}

/// Decodes one complete frame, length prefix included.
pub fn decode_frame(frame: &[u8]) -> Result<(u16, Message), CodecError> {
    if frame.len() < PREFIX_BYTES {
        return Err(CodecError::Truncated("length prefix"));
    }
    let len = u32::from_le_bytes([frame[0], frame[1], frame[2], frame[3]]) as usize;
    if frame.len() != PREFIX_BYTES + len {
        return Err(CodecError::Truncated("body"));
    }
    decode_body(&frame[PREFIX_BYTES..])
}
