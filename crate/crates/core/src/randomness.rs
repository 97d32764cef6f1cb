//! Counted random-bit sources, the lazily materialized uniform `U`, and the
//! Knuth–Yao generator for the proposal distribution.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::approx::Proposal;
use crate::dyadic::{Dyadic, Precision};

/// Name of the generator behind [`SeededBits`], recorded in reports.
pub const PRNG_NAME: &str = "chacha12";

/// A stream of fair bits that counts how many were drawn.
pub trait BitSource {
    fn next_bit(&mut self) -> bool;

    /// Total number of bits drawn so far.
    fn drawn(&self) -> u64;
}

/// Deterministic bit stream from a 64-bit seed.
#[derive(Clone, Debug)]
pub struct SeededBits {
    rng: ChaCha12Rng,
    word: u64,
    left: u32,
    drawn: u64,
}

impl SeededBits {
    pub fn new(seed: u64) -> Self {
        SeededBits { rng: ChaCha12Rng::seed_from_u64(seed), word: 0, left: 0, drawn: 0 }
    }
}

impl BitSource for SeededBits {
    fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        self.drawn += 1;
        (self.word >> self.left) & 1 == 1
    }

    fn drawn(&self) -> u64 {
        self.drawn
    }
}

/// Replays a fixed bit sequence; panics when it runs out.
#[derive(Clone, Debug, Default)]
pub struct ScriptedBits {
    bits: Vec<bool>,
    pos: usize,
}

impl ScriptedBits {
    pub fn new(bits: Vec<bool>) -> Self {
        ScriptedBits { bits, pos: 0 }
    }

    /// From a string of `0`/`1` characters; other characters are ignored.
    pub fn parse(s: &str) -> Self {
        Self::new(s.chars().filter_map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        }).collect())
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

impl BitSource for ScriptedBits {
    fn next_bit(&mut self) -> bool {
        let b = *self.bits.get(self.pos).expect("scripted bit source exhausted");
        self.pos += 1;
        b
    }

    fn drawn(&self) -> u64 {
        self.pos as u64
    }
}

/// `U = 0.U_1 U_2 …`, materialized one bit at a time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LazyUniform {
    bits: Vec<bool>,
    numerator: BigUint,
}

impl LazyUniform {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, bit: bool) {
        self.numerator <<= 1usize;
        if bit {
            self.numerator += 1u32;
        }
        self.bits.push(bit);
    }

    /// `U[len]`.
    pub fn value(&self) -> Dyadic {
        Dyadic::from_sign_magnitude(false, self.numerator.clone(), Precision(self.bits.len() as u32))
    }

    /// `U[t]` for `t ≤ len`.
    pub fn value_at(&self, t: Precision) -> Dyadic {
        let t = t.0 as usize;
        assert!(t <= self.bits.len(), "U[{t}] requested but only {} bits drawn", self.bits.len());
        let shift = self.bits.len() - t;
        Dyadic::from_sign_magnitude(false, &self.numerator >> shift, Precision(t as u32))
    }

    /// Draws bits until `len == to_t` and returns `U[to_t]`.
    pub fn extend(&mut self, src: &mut impl BitSource, to_t: Precision) -> Dyadic {
        while self.bits.len() < to_t.0 as usize {
            self.push(src.next_bit());
        }
        self.value_at(to_t)
    }
}

/// Knuth–Yao generating tree for `q_x = N_x / D`, with the binary expansions
/// of the `q_x` produced column by column on demand.
///
/// The `q_x` need not be dyadic: digits come from exact long division.
#[derive(Clone, Debug)]
pub struct DdgTree {
    denominator: BigUint,
    remainders: Vec<BigUint>,
    /// `columns[j]` lists the outcomes whose digit `j + 1` is 1, in order.
    columns: Vec<Vec<usize>>,
    point_mass: Option<usize>,
}

impl DdgTree {
    /// From non-negative integer weights; `q_x = w_x / Σ w`.
    pub fn from_weights(weights: Vec<BigUint>) -> Self {
        let denominator: BigUint = weights.iter().sum();
        assert!(!denominator.is_zero(), "all weights are zero");
        let point_mass = weights.iter().position(|w| *w == denominator);
        DdgTree { denominator, remainders: weights, columns: Vec::new(), point_mass }
    }

    /// The tree for `q` with `q_x = C q_x / C`.
    pub fn from_proposal(q: &Proposal) -> Self {
        let min_exp = q.cq.iter().filter(|v| !v.is_zero()).map(Dyadic::exponent).min().unwrap_or(0);
        let weights = q.cq.iter().map(|v| v.scaled_magnitude(Precision((-min_exp).max(0) as u32))).collect();
        Self::from_weights(weights)
    }

    pub fn n(&self) -> usize {
        self.remainders.len()
    }

    pub fn point_mass(&self) -> Option<usize> {
        self.point_mass
    }

    /// Leaves at depth `level ≥ 1`.
    pub fn column(&mut self, level: usize) -> &[usize] {
        while self.columns.len() < level {
            let mut col = Vec::new();
            for (x, r) in self.remainders.iter_mut().enumerate() {
                *r <<= 1usize;
                if *r >= self.denominator {
                    *r -= &self.denominator;
                    col.push(x);
                }
            }
            self.columns.push(col);
        }
        &self.columns[level - 1]
    }

    /// Draws one outcome; returns it with the number of bits consumed.
    pub fn sample(&mut self, src: &mut impl BitSource) -> (usize, u64) {
        if let Some(x) = self.point_mass {
            return (x, 0);
        }
        let mut walker = DdgWalker::default();
        loop {
            if let Some(x) = walker.step(self, src.next_bit()) {
                return (x, walker.depth as u64);
            }
        }
    }
}

/// Position of a walk down a [`DdgTree`], advanced one bit at a time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DdgWalker {
    /// Index of the current node among the internal nodes of its level.
    node: u64,
    depth: usize,
}

impl DdgWalker {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Consumes one bit; returns the outcome if a leaf was reached.
    pub fn step(&mut self, tree: &mut DdgTree, bit: bool) -> Option<usize> {
        self.depth += 1;
        let mut d = 2 * self.node as i64 + i64::from(bit);
        for &x in tree.column(self.depth) {
            d -= 1;
            if d < 0 {
                return Some(x);
            }
        }
        self.node = d as u64;
        None
    }
}

/// Samples `q` with Knuth–Yao; returns the flat outcome and the bits used.
pub fn ky_sample(q: &Proposal, src: &mut impl BitSource) -> (usize, u64) {
    DdgTree::from_proposal(q).sample(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[u32]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn seeded_streams_repeat_and_count() {
        let mut a = SeededBits::new(42);
        let mut b = SeededBits::new(42);
        let xs: Vec<bool> = (0..100).map(|_| a.next_bit()).collect();
        let ys: Vec<bool> = (0..100).map(|_| b.next_bit()).collect();
        assert_eq!(xs, ys);
        assert_eq!(a.drawn(), 100);
        let mut c = SeededBits::new(43);
        let zs: Vec<bool> = (0..100).map(|_| c.next_bit()).collect();
        assert_ne!(xs, zs);
    }

    #[test]
    fn lazy_uniform_values() {
        let mut u = LazyUniform::new();
        let mut src = ScriptedBits::parse("101");
        assert_eq!(u.extend(&mut src, Precision(3)), Dyadic::from_ratio_pow2(5, 3));
        assert_eq!(u.value_at(Precision(1)), Dyadic::from_ratio_pow2(1, 1));
        assert_eq!(u.value_at(Precision(0)), Dyadic::zero());
        assert_eq!(src.drawn(), 3);
    }

    #[test]
    fn half_half_uses_one_bit() {
        let mut tree = DdgTree::from_weights(w(&[1, 1]));
        let mut src = SeededBits::new(7);
        for _ in 0..100 {
            let (_, bits) = tree.sample(&mut src);
            assert_eq!(bits, 1);
        }
    }

    #[test]
    fn point_mass_uses_no_bits() {
        let mut tree = DdgTree::from_weights(w(&[0, 5, 0]));
        assert_eq!(tree.sample(&mut ScriptedBits::default()), (1, 0));
    }

    #[test]
    fn leaf_depths_half_quarter_quarter() {
        let mut tree = DdgTree::from_weights(w(&[2, 1, 1]));
        assert_eq!(tree.sample(&mut ScriptedBits::parse("0")), (0, 1));
        assert_eq!(tree.sample(&mut ScriptedBits::parse("10")), (1, 2));
        assert_eq!(tree.sample(&mut ScriptedBits::parse("11")), (2, 2));
    }

    #[test]
    fn non_dyadic_third() {
        // 1/3 = 0.010101…, 2/3 = 0.101010…
        let mut tree = DdgTree::from_weights(w(&[1, 2]));
        assert_eq!(tree.column(1), &[1]);
        assert_eq!(tree.column(2), &[0]);
        assert_eq!(tree.column(3), &[1]);
    }
}
