use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use remsamp::approx::{build_proposal, ApproxProbabilityTable};
use remsamp::randomness::{ky_sample, BitSource, DdgTree, DdgWalker, LazyUniform, ScriptedBits, SeededBits};
use remsamp::{Dyadic, Precision};

/// Walks every bit string up to `max_depth`; returns the exact mass reaching
/// each leaf, the leftover mass, and `Σ depth · 2^-depth` over leaves.
fn enumerate_tree(tree: &mut DdgTree, max_depth: usize) -> (Vec<BigRational>, BigRational, BigRational) {
    let n = tree.n();
    let mut mass = vec![BigRational::zero(); n];
    let mut left = BigRational::zero();
    let mut expected_bits = BigRational::zero();
    let mut stack = vec![DdgWalker::default()];
    while let Some(w) = stack.pop() {
        if w.depth() == max_depth {
            left += pow2_inv(w.depth());
            continue;
        }
        for bit in [false, true] {
            let mut next = w;
            match next.step(tree, bit) {
                Some(x) => {
                    let p = pow2_inv(next.depth());
                    expected_bits += &p * BigRational::from_integer(next.depth().into());
                    mass[x] += p;
                }
                None => stack.push(next),
            }
        }
    }
    (mass, left, expected_bits)
}

fn pow2_inv(k: usize) -> BigRational {
    BigRational::new(1.into(), num_bigint::BigInt::one() << k)
}

fn weights(v: &[u32]) -> Vec<BigUint> {
    v.iter().map(|&w| BigUint::from(w)).collect()
}

#[test]
fn seeded_stream_is_balanced() {
    let mut src = SeededBits::new(7);
    let ones = (0..1_000_000).filter(|_| src.next_bit()).count();
    assert_eq!(src.drawn(), 1_000_000);
    let mean = ones as f64 / 1e6;
    assert!((0.497..=0.503).contains(&mean), "mean {mean}");
}

#[test]
fn uniform_prefix_value() {
    let mut u = LazyUniform::new();
    let v = u.extend(&mut ScriptedBits::parse("101"), Precision(3));
    assert_eq!(v, Dyadic::from_ratio_pow2(5, 3));
    assert_eq!(u.value_at(Precision(1)), Dyadic::from_ratio_pow2(1, 1));
}

#[test]
fn uniform_prefix_mean_is_one_half() {
    let mut src = SeededBits::new(99);
    let n = 100_000;
    let mut sum = 0.0;
    for _ in 0..n {
        let mut u = LazyUniform::new();
        sum += u.extend(&mut src, Precision(10)).to_f64();
    }
    let mean = sum / n as f64;
    // U[10] has mean 1/2 - 2^-11 and standard deviation about 0.2887
    let sigma = 0.2887 / (n as f64).sqrt();
    assert!((mean - (0.5 - 2f64.powi(-11))).abs() <= 3.0 * sigma, "mean {mean}");
}

#[test]
fn knuth_yao_expected_bits_for_half_quarter_quarter() {
    let mut tree = DdgTree::from_weights(weights(&[2, 1, 1]));
    let (mass, left, bits) = enumerate_tree(&mut tree, 24);
    assert!(left.is_zero());
    assert_eq!(mass[0], pow2_inv(1));
    assert_eq!(mass[1], pow2_inv(2));
    assert_eq!(bits, BigRational::new(3.into(), 2.into()));
}

#[test]
fn knuth_yao_uses_one_bit_for_a_fair_coin() {
    let table = ApproxProbabilityTable::new(Precision(1), vec![2], vec![Dyadic::zero(), Dyadic::zero()]).unwrap();
    let q = build_proposal(&table);
    let mut src = SeededBits::new(3);
    for _ in 0..1000 {
        assert_eq!(ky_sample(&q, &mut src).1, 1);
    }
}

#[test]
fn knuth_yao_matches_non_dyadic_weights_up_to_the_unexplored_mass() {
    let w = [1u32, 2, 4];
    let mut tree = DdgTree::from_weights(weights(&w));
    let (mass, left, _) = enumerate_tree(&mut tree, 24);
    for (x, &wx) in w.iter().enumerate() {
        let q = BigRational::new(wx.into(), 7.into());
        assert!(mass[x] <= q);
        assert!(&q - &mass[x] <= left);
    }
}

#[test]
fn knuth_yao_empirical_distribution() {
    let w = [3u32, 1, 4, 1, 5];
    let total: u32 = w.iter().sum();
    let mut tree = DdgTree::from_weights(weights(&w));
    let mut src = SeededBits::new(11);
    let draws = 100_000;
    let mut counts = [0u64; 5];
    for _ in 0..draws {
        counts[tree.sample(&mut src).0] += 1;
    }
    let tv: f64 = w
        .iter()
        .zip(counts)
        .map(|(&wx, c)| (c as f64 / draws as f64 - wx as f64 / total as f64).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.01, "tv {tv}");
}

fn dyadic_weights() -> impl Strategy<Value = Vec<u32>> {
    // n ≤ 8 weights summing to 256, so every q_x has denominator dividing 2^8
    prop::collection::vec(0u32..=64, 1..=8).prop_filter_map("needs a positive weight", |mut w| {
        let s: u32 = w.iter().sum();
        if s == 0 || s > 256 {
            return None;
        }
        w[0] += 256 - s;
        Some(w)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn knuth_yao_is_exact_on_dyadic_weights(w in dyadic_weights()) {
        let mut tree = DdgTree::from_weights(weights(&w));
        if tree.point_mass().is_some() {
            return Ok(());
        }
        let (mass, left, bits) = enumerate_tree(&mut tree, 24);
        prop_assert!(left.is_zero());
        for (x, &wx) in w.iter().enumerate() {
            prop_assert_eq!(&mass[x], &BigRational::new(wx.into(), 256.into()));
        }
        let h: f64 = w.iter().filter(|&&x| x > 0).map(|&x| { let q = x as f64 / 256.0; -q * q.log2() }).sum();
        let e: f64 = bits.numer().to_string().parse::<f64>().unwrap() / bits.denom().to_string().parse::<f64>().unwrap();
        prop_assert!(e <= h + 2.0, "E[bits] = {} > 2 + H = {}", e, h + 2.0);
    }

    #[test]
    fn uniform_sandwich(bits in prop::collection::vec(any::<bool>(), 1..64)) {
        let mut u = LazyUniform::new();
        for &b in &bits {
            u.push(b);
        }
        let full = u.value();
        for t in 0..bits.len() as u32 {
            let lo = u.value_at(Precision(t));
            let next = u.value_at(Precision(t + 1));
            prop_assert!(lo <= next);
            prop_assert!(full < &lo + &Precision(t).radius());
        }
    }
}
