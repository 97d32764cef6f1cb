//! Scenario generators: GHZ states under projective measurements, and
//! random exactly-dyadic scenarios.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use remsamp::quantum::computable::{TrigExpr, TrigFactor};
use remsamp::quantum::{CMatrix, ComplexEntry, EntryMatrix, Povm, RealEntry, Scenario};
use remsamp::{CDyadic, Complex, Dyadic};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least two parties, got {0}")]
    TooFewParties(usize),
    #[error("expected {expected} angles, got {got}")]
    AngleCount { expected: usize, got: usize },
    #[error("dimensions and outcome counts must be ≥ 2 with one per party")]
    BadShape,
    #[error("cannot parse angle {0:?}: use a fraction of π such as 1/4, optionally with a phase as 1/4:1/3")]
    BadAngle(String),
}

/// Measurement direction on the Bloch sphere, both angles as fractions of π:
/// polar `θ = π·theta` and azimuth `φ = π·phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Angle {
    pub theta: (i64, u64),
    pub phi: (i64, u64),
}

impl Angle {
    /// The computational (Z) basis.
    pub const Z: Angle = Angle { theta: (0, 1), phi: (0, 1) };
    /// The X basis.
    pub const X: Angle = Angle { theta: (1, 2), phi: (0, 1) };

    pub fn polar(num: i64, den: u64) -> Self {
        Angle { theta: (num, den), phi: (0, 1) }
    }

    pub fn new(theta: (i64, u64), phi: (i64, u64)) -> Self {
        Angle { theta, phi }
    }
}

fn parse_frac(s: &str) -> Option<(i64, u64)> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let den: u64 = b.trim().parse().ok()?;
            (den > 0).then_some(())?;
            Some((a.trim().parse().ok()?, den))
        }
        None => Some((s.parse().ok()?, 1)),
    }
}

impl FromStr for Angle {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        let bad = || GenError::BadAngle(s.to_string());
        match s.to_ascii_lowercase().as_str() {
            "z" => return Ok(Angle::Z),
            "x" => return Ok(Angle::X),
            _ => {}
        }
        let (t, p) = match s.split_once(':') {
            Some((t, p)) => (t, Some(p)),
            None => (s, None),
        };
        let theta = parse_frac(t).ok_or_else(bad)?;
        let phi = match p {
            Some(p) => parse_frac(p).ok_or_else(bad)?,
            None => (0, 1),
        };
        Ok(Angle { theta, phi })
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.theta.0, self.theta.1)?;
        if self.phi.0 != 0 {
            write!(f, ":{}/{}", self.phi.0, self.phi.1)?;
        }
        Ok(())
    }
}

fn half() -> Dyadic {
    Dyadic::from_ratio_pow2(1, 1)
}

fn trig(offset: Dyadic, coef: Dyadic, factors: Vec<TrigFactor>) -> RealEntry {
    RealEntry::Computed(TrigExpr::new(offset, coef, factors)).simplified()
}

/// The two projectors `(I ± n·σ)/2` for direction `n(θ, φ)`.
pub fn projective_povm(a: Angle) -> Povm {
    let cos_t = || TrigFactor::cos_pi(a.theta.0, a.theta.1);
    let sin_t = || TrigFactor::sin_pi(a.theta.0, a.theta.1);
    let cos_p = || TrigFactor::cos_pi(a.phi.0, a.phi.1);
    let sin_p = || TrigFactor::sin_pi(a.phi.0, a.phi.1);
    let element = |s: i64| {
        let sign = Dyadic::from_ratio_pow2(s, 1);
        let neg = Dyadic::from_ratio_pow2(-s, 1);
        let re = trig(Dyadic::zero(), sign.clone(), vec![sin_t(), cos_p()]);
        // (0,1) entry is ±sinθ e^{-iφ}/2
        let im_upper = trig(Dyadic::zero(), neg.clone(), vec![sin_t(), sin_p()]);
        let im_lower = trig(Dyadic::zero(), sign.clone(), vec![sin_t(), sin_p()]);
        EntryMatrix::new(
            2,
            vec![
                ComplexEntry::real(trig(half(), sign, vec![cos_t()])),
                ComplexEntry::new(re.clone(), im_upper),
                ComplexEntry::new(re, im_lower),
                ComplexEntry::real(trig(half(), neg, vec![cos_t()])),
            ],
        )
        .expect("2x2 element")
    };
    Povm { elements: vec![element(1), element(-1)] }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `m` qubits, party `i` measuring along `angles[i]`.
pub fn gen_ghz(m: usize, angles: &[Angle]) -> Result<Scenario, GenError> {
    if m < 2 {
        return Err(GenError::TooFewParties(m));
    }
    if angles.len() != m {
        return Err(GenError::AngleCount { expected: m, got: angles.len() });
    }
    let dim = 1usize << m;
    let mut rho = CMatrix::<Dyadic>::zeros(dim);
    for (r, c) in [(0, 0), (0, dim - 1), (dim - 1, 0), (dim - 1, dim - 1)] {
        rho.set(r, c, Complex::real(half()));
    }
    let povms = angles.iter().map(|&a| projective_povm(a)).collect();
    Ok(Scenario::new(EntryMatrix::from_exact(&rho), povms).expect("GHZ shapes are consistent"))
}

/// Fractional bits of the random matrix entries before scaling.
const ENTRY_BITS: u32 = 4;

fn random_dyadic(rng: &mut ChaCha12Rng) -> Dyadic {
    let lim = 1i64 << ENTRY_BITS;
    Dyadic::from_ratio_pow2(rng.gen_range(-lim..=lim), ENTRY_BITS)
}

/// `B B†` for a random `d × r` matrix `B` of small dyadic entries.
fn random_gram(d: usize, rng: &mut ChaCha12Rng) -> CMatrix<Dyadic> {
    let r = rng.gen_range(1..=d);
    let b: Vec<Vec<CDyadic>> = (0..d).map(|_| (0..r).map(|_| CDyadic::new(random_dyadic(rng), random_dyadic(rng))).collect()).collect();
    CMatrix::from_fn(d, |i, j| (0..r).fold(CDyadic::zero(), |acc, k| &acc + &(&b[i][k] * &b[j][k].conj())))
}

/// Smallest `e ≥ 0` with `x ≤ 2^e · bound_num / bound_den`.
fn scale_exponent(x: &Dyadic, times: i64) -> i64 {
    let target = &x.clone() * &Dyadic::from_int(times);
    let mut e = 0;
    while target > Dyadic::pow2(e) {
        e += 1;
    }
    e
}

fn scaled(m: &CMatrix<Dyadic>, e: i64) -> CMatrix<Dyadic> {
    m.scale(&Dyadic::pow2(-e))
}

/// Random POVM with `n` elements of size `d`, exact by construction:
/// `n - 1` scaled Gram matrices whose traces sum to at most 1, then
/// `I` minus their sum, which is therefore positive semidefinite.
pub fn random_povm(d: usize, n: usize, rng: &mut ChaCha12Rng) -> Povm {
    let mut elements = Vec::with_capacity(n);
    let mut rest = CMatrix::<Dyadic>::identity(d);
    for _ in 0..n - 1 {
        let g = random_gram(d, rng);
        let tr = g.trace().re;
        let a = if tr.is_zero() { g } else { scaled(&g, scale_exponent(&tr, (n - 1) as i64)) };
        rest = rest.sub(&a);
        elements.push(a);
    }
    elements.push(rest);
    // shuffle so the complement is not always last
    let k = rng.gen_range(0..n);
    elements.swap(k, n - 1);
    Povm { elements: elements.iter().map(EntryMatrix::from_exact).collect() }
}

/// Random mixed state: a Gram matrix with trace at most 1/2 plus a
/// dyadic diagonal that makes up the rest of the unit trace.
pub fn random_density(d: usize, rng: &mut ChaCha12Rng) -> CMatrix<Dyadic> {
    let g = random_gram(d, rng);
    let tr = g.trace().re;
    let g = if tr.is_zero() { g } else { scaled(&g, scale_exponent(&tr, 2)) };
    let left = &Dyadic::one() - &g.trace().re;
    let mut weights: Vec<i64> = (0..d).map(|_| rng.gen_range(0..8)).collect();
    let sum: i64 = weights.iter().sum();
    let w = 64 - (sum.max(1) - 1).leading_zeros() as i64;
    weights[0] += (1i64 << w) - sum;
    let mut rho = g;
    for (i, &c) in weights.iter().enumerate() {
        let add = &left * &Dyadic::from_ratio_pow2(c, w as u32);
        let v = &rho.get(i, i).re + &add;
        rho.set(i, i, Complex::real(v));
    }
    rho
}

/// Random valid scenario with exact dyadic entries; equal seeds give equal
/// scenarios.
pub fn gen_random(m: usize, dims: &[usize], outcomes: &[usize], seed: u64) -> Result<Scenario, GenError> {
    if m < 2 {
        return Err(GenError::TooFewParties(m));
    }
    if dims.len() != m || outcomes.len() != m || dims.iter().chain(outcomes).any(|&v| v < 2) {
        return Err(GenError::BadShape);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let d: usize = dims.iter().product();
    let rho = random_density(d, &mut rng);
    let povms = dims.iter().zip(outcomes).map(|(&di, &ni)| random_povm(di, ni, &mut rng)).collect();
    Ok(Scenario::new(EntryMatrix::from_exact(&rho), povms).expect("generated shapes are consistent"))
}
