//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary so the lines print in order; exits nonzero if anything fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use remsamp::approx::{assemble_probability, build_proposal, required_entry_precision, rho_precision, Proposal};
use remsamp::dyadic::{approx_product_tree, ceil_log2, clamp_parts, clamp_unit, cmul, truncate, ClampRange};
use remsamp::protocol::{t0_default, CachePolicy, ScenarioOracle};
use remsamp::quantum::{born_probability, validate, CMatrix, EntryMatrix, Outcome, Povm, Scenario};
use remsamp::randomness::{ky_sample, SeededBits};
use remsamp::sampler::{enumerate_round, step_discrete, Decision, ProbabilityOracle, RandomnessModel, SamplerConfig};
use remsamp::{CDyadic, Complex, Dyadic, Precision};
use remsamp_cli::experiment::{
    run_experiment, run_sweep, ExperimentReport, RunConfig, ScenarioSource, SourceChoice, SweepAxis, UNIFORM_BITS,
};
use remsamp_cli::gen::{gen_random, random_density, Angle};
use remsamp_cli::stats::{entropy, Moments};

const RUNTIME_TARGET: Duration = Duration::from_secs(60);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn d(num: i64, shift: u32) -> Dyadic {
    Dyadic::from_ratio_pow2(num, shift)
}

fn ghz(m: usize, angles: Vec<Angle>) -> ScenarioSource {
    assert_eq!(angles.len(), m);
    ScenarioSource::Ghz { m, angles }
}

fn bench(source: ScenarioSource, runs: usize, seed: u64, tweak: impl FnOnce(&mut RunConfig)) -> ExperimentReport {
    let mut cfg = RunConfig::new(source, runs, seed);
    tweak(&mut cfg);
    run_experiment(&cfg).expect("experiment runs")
}

fn row<'a>(rep: &'a ExperimentReport, prefix: &str) -> &'a remsamp_cli::stats::BoundRow {
    rep.bounds.iter().find(|b| b.name.starts_with(prefix)).unwrap_or_else(|| panic!("no bound row {prefix}"))
}

// 1

fn distribution_statistical() -> Verdict {
    let settings = [
        ("Bell Z⊗Z", ghz(2, vec![Angle::Z; 2])),
        ("GHZ3 X⊗X⊗X", ghz(3, vec![Angle::X; 3])),
        ("GHZ3 π/3,π/5:π/4,2π/7", ghz(3, vec![Angle::polar(1, 3), Angle::new((1, 5), (1, 4)), Angle::polar(2, 7)])),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, src)) in settings.into_iter().enumerate() {
        let start = Instant::now();
        let rep = bench(src, 100_000, 100 + i as u64, |_| {});
        let took = start.elapsed();
        let ok = rep.tv < 0.01 && rep.chi_square.p_value > 0.001 && took < RUNTIME_TARGET;
        pass &= ok;
        parts.push(format!("{name}: TV {:.4}, p {:.3}, {:.1}s", rep.tv, rep.chi_square.p_value, took.as_secs_f64()));
    }
    Verdict::new(pass, parts.join("; "))
}

// 2

fn two_outcome_scenario() -> Scenario {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let rho = random_density(4, &mut rng);
    let a = CMatrix::new(
        2,
        vec![
            Complex::real(d(3, 2)),
            Complex::new(d(1, 3), d(1, 3)),
            Complex::new(d(1, 3), d(-1, 3)),
            Complex::real(d(1, 2)),
        ],
    );
    let rest = CMatrix::<Dyadic>::identity(2).sub(&a);
    let measured = Povm { elements: vec![EntryMatrix::from_exact(&a), EntryMatrix::from_exact(&rest)] };
    let trivial = Povm { elements: vec![EntryMatrix::from_exact(&CMatrix::<Dyadic>::identity(2))] };
    Scenario::new(EntryMatrix::from_exact(&rho), vec![measured, trivial]).expect("shapes agree")
}

fn distribution_exhaustive() -> Verdict {
    let s = two_outcome_scenario();
    if !validate(&s).is_valid() {
        return Verdict::new(false, "test scenario is invalid");
    }
    let p: Vec<Dyadic> = (0..s.n())
        .map(|f| {
            let iv = born_probability(&s, &Outcome::from_flat(f, &s.outcomes).unwrap(), Precision(64));
            assert!(iv.is_exact());
            iv.midpoint()
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for t0 in [0u32, 1, 3] {
        let mut oracle = ScenarioOracle::new(&s);
        let table = oracle.table(Precision(t0)).unwrap();
        let q = build_proposal(&table);
        let e = enumerate_round(&q, &table, SamplerConfig::new(Precision(t0)), 40, |x, t| {
            oracle.probability(&Outcome::from_flat(x, &s.outcomes).unwrap(), t)
        })
        .unwrap();
        let accepted = e.accept.iter().fold(Dyadic::zero(), |a, v| &a + v);
        let covered = &Dyadic::one() - &e.unexplored;
        let tol = Dyadic::pow2(-20);
        let mut ok = covered >= &Dyadic::one() - &tol;
        let mut worst = 0.0f64;
        for (x, px) in p.iter().enumerate() {
            // accepted mass never exceeds p/C; normalized output within 2^-20 of p
            ok &= &e.accept[x] * &q.c <= *px;
            let dev = (&e.accept[x] - &(px * &accepted)).abs();
            ok &= dev <= &tol * &accepted;
            worst = worst.max(dev.to_f64() / accepted.to_f64());
        }
        pass &= ok;
        parts.push(format!("t0={t0}: covered 1-{:.1e}, max dev {:.1e}", e.unexplored.to_f64(), worst));
    }
    Verdict::new(pass, format!("p = ({:.6}, {:.6}); {}", p[0].to_f64(), p[1].to_f64(), parts.join("; ")))
}

// 3

fn loop_bounds() -> Verdict {
    let bell = || ghz(2, vec![Angle::Z; 2]);
    let uniform = bench(bell(), 100_000, 300, |c| c.model = RandomnessModel::Uniform { bits: UNIFORM_BITS });
    let discrete = bench(bell(), 100_000, 301, |_| {});
    let u = row(&uniform, "mean T");
    let r = row(&discrete, "mean T");
    Verdict::new(
        u.pass && r.pass && uniform.t.count >= 100_000 && discrete.t.count >= 100_000,
        format!(
            "uniform {:.4} <= {} (+{:.4}) over {} loops; random bits {:.4} <= {} (+{:.4}) over {} loops",
            u.empirical,
            u.bound,
            3.0 * u.sigma,
            uniform.t.count,
            r.empirical,
            r.bound,
            3.0 * r.sigma,
            discrete.t.count
        ),
    )
}

// 4

fn generated_scenarios() -> Vec<Scenario> {
    let mut out = Vec::new();
    let shapes: [(&[usize], &[usize]); 5] =
        [(&[2, 2], &[2, 2]), (&[2, 3], &[3, 2]), (&[2, 2, 2], &[2, 2, 2]), (&[3, 2], &[4, 3]), (&[2, 2, 2, 2], &[2, 2, 2, 2])];
    for (i, (dims, outcomes)) in shapes.iter().enumerate() {
        for seed in 0..4 {
            out.push(gen_random(dims.len(), dims, outcomes, 1000 * i as u64 + seed).unwrap());
        }
    }
    for m in 2..=4 {
        out.push(remsamp_cli::gen::gen_ghz(m, &vec![Angle::polar(1, 3); m]).unwrap());
    }
    out
}

fn proposal_bounds() -> Verdict {
    let scenarios = generated_scenarios();
    let mut checks = 0;
    let mut failures = 0;
    let mut c_max = 0.0f64;
    for s in &scenarios {
        let n = s.n();
        let default = t0_default(n).0;
        for t0 in 0..=default + 4 {
            let q = build_proposal(&ScenarioOracle::new(s).table(Precision(t0)).unwrap());
            checks += 1;
            let mut ok = q.c >= Dyadic::one() && q.c <= q.c_upper_bound();
            if t0 == default {
                ok &= q.c <= Dyadic::from_int(3);
                c_max = c_max.max(q.c.to_f64());
            }
            failures += usize::from(!ok);
        }
    }
    Verdict::new(
        failures == 0,
        format!("{} scenarios, {checks} (scenario, t0) pairs, {failures} violations; max C at default t0 {:.4}", scenarios.len(), c_max),
    )
}

// 5

fn meter_exactness() -> Verdict {
    let cases: Vec<(&str, ScenarioSource, SourceChoice)> = vec![
        ("GHZ3 X truncation", ghz(3, vec![Angle::X; 3]), SourceChoice::Truncation),
        (
            "random (2,3,2) truncation",
            ScenarioSource::Random { m: 3, dims: vec![2, 3, 2], outcomes: vec![2, 2, 3], seed: 5 },
            SourceChoice::Truncation,
        ),
        ("GHZ3 computed angles", ghz(3, vec![Angle::polar(1, 5); 3]), SourceChoice::Truncation),
        (
            "random (2,2) forced approximation",
            ScenarioSource::Random { m: 2, dims: vec![2, 2], outcomes: vec![3, 2], seed: 6 },
            SourceChoice::Approximation,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, src, source)) in cases.into_iter().enumerate() {
        let rep = bench(src, 3000, 500 + i as u64, |c| {
            c.cache = CachePolicy::PerRound;
            c.source = source;
        });
        let steps: u64 = rep.rows.iter().map(|r| r.s).sum();
        pass &= rep.meter_failures == 0;
        parts.push(format!("{name}: {} of {} runs off ({steps} proposals)", rep.meter_failures, rep.rows.len()));
    }
    // with persistent caches a step can only be cheaper
    let rep = bench(ghz(3, vec![Angle::X; 3]), 3000, 510, |_| {});
    pass &= rep.meter_failures == 0;
    parts.push(format!("persistent cache: {} runs above the per-step formula", rep.meter_failures));
    Verdict::new(pass, parts.join("; "))
}

// 6

fn tradeoff_bound() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in 2..=4usize {
        let sources = [
            ("GHZ X", ghz(m, vec![Angle::X; m])),
            ("random", ScenarioSource::Random { m, dims: vec![2; m], outcomes: vec![2; m], seed: 60 + m as u64 }),
        ];
        for (name, src) in sources {
            let rep = bench(src, 10_000, 600 + m as u64, |_| {});
            let b = row(&rep, "mean Z (tradeoff)");
            pass &= b.pass;
            parts.push(format!("m={m} {name}: {:.1} <= {}", b.empirical, b.bound));
        }
    }
    Verdict::new(pass, parts.join("; "))
}

// 7

fn quadratic_trend() -> Verdict {
    let base = RunConfig::new(ghz(2, vec![Angle::X; 2]), 2000, 700);
    let rep = run_sweep(&base, &SweepAxis::Parties { ms: (2..=6).collect(), angle: Angle::X }).expect("sweep runs");
    let e = rep.exponent.unwrap_or(f64::NAN);
    let zs: Vec<String> = rep.points.iter().map(|p| format!("{:.0}", p.mean_z)).collect();
    Verdict::new((1.6..=2.4).contains(&e), format!("exponent {e:.3}; mean Z for m=2..6: {}", zs.join(", ")))
}

// 8

fn ky_mean_bits(q: &Proposal, draws: usize, seed: u64) -> (Moments, f64) {
    let mut src = SeededBits::new(seed);
    let m = Moments::of((0..draws).map(|_| ky_sample(q, &mut src).1 as f64));
    (m, entropy(&q.q_f64()))
}

fn knuth_yao_efficiency() -> Verdict {
    let mut proposals = vec![(
        "(1/2,1/4,1/4)".to_string(),
        Proposal { t0: Precision(2), outcomes: vec![3], c: Dyadic::one(), cq: vec![d(1, 1), d(1, 2), d(1, 2)] },
    )];
    for (i, s) in generated_scenarios().iter().enumerate().step_by(4) {
        let t0 = t0_default(s.n());
        proposals.push((format!("random #{i}"), build_proposal(&ScenarioOracle::new(s).table(t0).unwrap())));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, q)) in proposals.iter().enumerate() {
        let (m, h) = ky_mean_bits(q, 100_000, 800 + i as u64);
        let ok = m.mean <= 2.0 + h + 3.0 * m.std_err();
        pass &= ok;
        if i == 0 || !ok {
            parts.push(format!("{name}: {:.4} <= 2 + H = {:.4}", m.mean, 2.0 + h));
        }
    }
    parts.push(format!("{} random proposals checked", proposals.len() - 1));
    for (name, src) in [
        ("Bell", ghz(2, vec![Angle::Z; 2])),
        ("random (2,3)", ScenarioSource::Random { m: 2, dims: vec![2, 3], outcomes: vec![3, 2], seed: 8 }),
    ] {
        let rep = bench(src, 100_000, 810, |_| {});
        let b = row(&rep, "mean R");
        pass &= b.pass;
        parts.push(format!("E(R) {name}: {:.3} <= {:.3}", b.empirical, b.bound));
    }
    Verdict::new(pass, parts.join("; "))
}

// 9

fn consistent(decision: Decision, u_t: &Dyadic, t: Precision, p: &Dyadic, cq: &Dyadic) -> bool {
    match decision {
        Decision::Accept => &(u_t + &t.radius()) * cq <= *p,
        Decision::Reject => &(u_t * cq) > p,
        Decision::NeedMoreBits => true,
    }
}

fn coupling_soundness() -> Verdict {
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let mut contradictions = 0;
    for _ in 0..10_000 {
        let p = d(rng.gen_range(0..=1 << 30), 30);
        let t0 = rng.gen_range(0..6u32);
        let t = Precision(t0 + rng.gen_range(0..20u32));
        let p_t = (&p + &d(rng.gen_range(-(1 << 10)..=1 << 10), t.0 + 10)).max(Dyadic::zero()).min(Dyadic::one());
        let cq = &Precision(t0).radius() + &d(rng.gen_range(0..1 << 20), 20);
        let u_t = Dyadic::new(rng.gen_range(0..1u64 << t.0).into(), -(t.0 as i64));
        if !consistent(step_discrete(&u_t, t, &p_t, &cq), &u_t, t, &p, &cq) {
            contradictions += 1;
        }
    }
    let randomized = contradictions;
    let mut prefixes = 0u64;
    for (p0, p1) in [(d(5, 4), d(11, 4)), (d(1, 3), d(7, 3)), (Dyadic::zero(), Dyadic::one()), (d(0x5555, 16), d(0xaaab, 16))] {
        let p = [p0, p1];
        for t0 in 0..=2u32 {
            let table = remsamp::approx::ApproxProbabilityTable::new(
                Precision(t0),
                vec![2],
                p.iter().map(|v| truncate(v, Precision(t0))).collect(),
            )
            .unwrap();
            let q = build_proposal(&table);
            for x in 0..2 {
                for len in t0..=12 {
                    let t = Precision(len);
                    let p_t = truncate(&p[x], t);
                    for prefix in 0..(1u64 << len) {
                        let u_t = Dyadic::new(prefix.into(), -(len as i64));
                        prefixes += 1;
                        if !consistent(step_discrete(&u_t, t, &p_t, q.cq(x)), &u_t, t, &p[x], q.cq(x)) {
                            contradictions += 1;
                        }
                    }
                }
            }
        }
    }
    Verdict::new(
        contradictions == 0,
        format!("10000 randomized trials ({randomized} contradictions), {prefixes} exhaustive prefixes ({} contradictions)", contradictions - randomized),
    )
}

// 10

const CASES: usize = 10_000;

fn real(rng: &mut ChaCha12Rng, bound: i64) -> Dyadic {
    d(rng.gen_range(-(bound << 48)..=bound << 48), 48)
}

fn complex(rng: &mut ChaCha12Rng, bound: i64) -> CDyadic {
    CDyadic::new(real(rng, bound), real(rng, bound))
}

/// Error of magnitude at most `2^-k`.
fn noise(rng: &mut ChaCha12Rng, k: u32) -> Dyadic {
    d(rng.gen_range(-(1 << 20)..=1 << 20), k + 20)
}

fn cnoise(rng: &mut ChaCha12Rng, k: u32) -> CDyadic {
    CDyadic::new(noise(rng, k), noise(rng, k))
}

fn within(err: &Dyadic, k: i64) -> bool {
    err.abs() <= Dyadic::pow2(-k)
}

fn cwithin(a: &CDyadic, b: &CDyadic, k: i64) -> bool {
    within(&(&a.re - &b.re), k) && within(&(&a.im - &b.im), k)
}

fn fact_suites(rng: &mut ChaCha12Rng) -> Vec<(&'static str, usize)> {
    let sym = ClampRange::symmetric();
    let mut out = Vec::new();
    let mut bad = 0;
    for _ in 0..CASES {
        let k = rng.gen_range(1..40u32);
        let (a, b) = (real(rng, 8), real(rng, 8));
        let (ah, bh) = (&a + &noise(rng, k), &b + &noise(rng, k));
        bad += usize::from(!within(&(&(&a + &b) - &(&ah + &bh)), k as i64 - 1));
        let (a, b) = (real(rng, 1), real(rng, 1));
        let ah = clamp_unit(&(&a + &noise(rng, k)), &sym);
        let bh = clamp_unit(&(&b + &noise(rng, k)), &sym);
        bad += usize::from(!within(&(&(&a * &b) - &(&ah * &bh)), k as i64 - 1));
    }
    out.push(("real sum/product", bad));

    bad = 0;
    for _ in 0..CASES {
        let k = rng.gen_range(2..40u32);
        let (a, b) = (complex(rng, 8), complex(rng, 8));
        let (ah, bh) = (&a + &cnoise(rng, k), &b + &cnoise(rng, k));
        bad += usize::from(!cwithin(&(&a + &b), &(&ah + &bh), k as i64 - 1));
        let (a, b) = (complex(rng, 1), complex(rng, 1));
        let ah = clamp_parts(&(&a + &cnoise(rng, k)));
        let bh = clamp_parts(&(&b + &cnoise(rng, k)));
        bad += usize::from(!cwithin(&cmul(&a, &b), &cmul(&ah, &bh), k as i64 - 2));
    }
    out.push(("complex sum/product", bad));

    bad = 0;
    for _ in 0..CASES {
        let m = rng.gen_range(2..9usize);
        let extra = rng.gen_range(0..30u32);
        let k = 2 * ceil_log2(m as u64) + extra;
        let zs: Vec<CDyadic> = (0..m)
            .map(|_| {
                let z = complex(rng, 1);
                if z.norm_sqr() > Dyadic::one() {
                    CDyadic::new(z.re.shl(-1), z.im.shl(-1))
                } else {
                    z
                }
            })
            .collect();
        let exact = zs.iter().fold(CDyadic::one(), |acc, z| &acc * z);
        let approx: Vec<CDyadic> = zs.iter().map(|z| z + &cnoise(rng, k)).collect();
        match approx_product_tree(&approx, Precision(k)) {
            Ok((p, out)) => bad += usize::from(out != Precision(extra) || !cwithin(&exact, &p, extra as i64)),
            Err(_) => bad += 1,
        }
    }
    out.push(("product tree", bad));

    bad = 0;
    for _ in 0..CASES {
        let s = rng.gen_range(2..40usize);
        let extra = rng.gen_range(0..30u32);
        let k = ceil_log2(s as u64) + extra;
        let mut exact = CDyadic::zero();
        let mut approx = CDyadic::zero();
        for _ in 0..s {
            let z = complex(rng, 4);
            approx = &approx + &(&z + &cnoise(rng, k));
            exact = &exact + &z;
        }
        bad += usize::from(!cwithin(&exact, &approx, extra as i64));
    }
    out.push(("s-term sum", bad));
    out
}

/// Hermitian perturbation of `m` with every part moved by at most `2^-k`.
fn perturb(m: &CMatrix<Dyadic>, k: u32, rng: &mut ChaCha12Rng) -> CMatrix<Dyadic> {
    let n = m.dim();
    let mut out = m.clone();
    for r in 0..n {
        for c in r..n {
            let v = m.get(r, c);
            let re = &v.re + &noise(rng, k);
            let z = if r == c { Complex::real(re) } else { Complex::new(re, &v.im + &noise(rng, k)) };
            out.set(c, r, z.conj());
            out.set(r, c, z);
        }
    }
    out
}

fn assembly_against_oracle(rng: &mut ChaCha12Rng) -> (usize, usize) {
    let shapes: [(&[usize], &[usize]); 4] = [(&[2, 2], &[2, 2]), (&[2, 3], &[3, 2]), (&[2, 2, 2], &[2, 3, 2]), (&[3, 2], &[2, 2])];
    let mut bad = 0;
    let mut triples = 0;
    for i in 0..1000u64 {
        let (dims, outcomes) = shapes[(i % 4) as usize];
        let s = gen_random(dims.len(), dims, outcomes, 10_000 + i).unwrap();
        let model = s.exact_model().expect("generated scenarios are exact");
        let x = Outcome::from_flat(rng.gen_range(0..s.n()), &s.outcomes).unwrap();
        let t = Precision(rng.gen_range(0..40));
        let truth = born_probability(&s, &x, Precision(64));
        assert!(truth.is_exact());
        let truth = truth.midpoint();
        let k = required_entry_precision(t, s.d(), s.m());
        // truncated entries, as the protocol sends them
        let via_protocol = ScenarioOracle::new(&s).probability(&x, t).unwrap();
        // arbitrary certified approximations
        let els: Vec<CMatrix<Dyadic>> = model.elements_for(&x).into_iter().map(|e| perturb(e, k.0, rng)).collect();
        let refs: Vec<&CMatrix<Dyadic>> = els.iter().collect();
        let rho = perturb(&model.rho, rho_precision(k, s.m()).0 + 32, rng);
        let perturbed = assemble_probability(&refs, &s.dims, &rho, &x, k, t);
        triples += 2;
        bad += usize::from(!within(&(&via_protocol - &truth), t.0 as i64));
        bad += usize::from(!perturbed.map(|p| within(&(&p - &truth), t.0 as i64)).unwrap_or(false));
    }
    (bad, triples)
}

fn approximation_algebra() -> Verdict {
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    let facts = fact_suites(&mut rng);
    let (bad, triples) = assembly_against_oracle(&mut rng);
    let total: usize = facts.iter().map(|f| f.1).sum::<usize>() + bad;
    let mut parts: Vec<String> = facts.iter().map(|(name, b)| format!("{name} {b}")).collect();
    parts.push(format!("assembly {bad} of {triples}"));
    Verdict::new(total == 0, format!("violations: {}", parts.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("distribution exactness (statistical)", distribution_statistical),
        ("distribution exactness (exhaustive)", distribution_exhaustive),
        ("loop length bounds", loop_bounds),
        ("proposal bounds", proposal_bounds),
        ("bit-meter exactness", meter_exactness),
        ("E(Z) tradeoff bound", tradeoff_bound),
        ("quadratic scaling in m", quadratic_trend),
        ("Knuth-Yao efficiency and E(R)", knuth_yao_efficiency),
        ("coupling soundness", coupling_soundness),
        ("approximation algebra", approximation_algebra),
    ];
    // `cargo test -- <filter>` passes a filter; honor it by criterion number
    let only: Option<usize> = std::env::args().skip(1).find(|a| !a.starts_with('-')).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|n| n != i + 1) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        failed += usize::from(!v.pass);
        println!(
            "{} {:>2} {name} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
