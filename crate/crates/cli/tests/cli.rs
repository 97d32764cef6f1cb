use std::process::Command;

use proptest::prelude::*;
use remsamp::protocol::{run_protocol, ProtocolConfig};
use remsamp::quantum::{born_distribution, born_probability, validate, Outcome, Scenario};
use remsamp::randomness::SeededBits;
use remsamp::{Dyadic, Precision};
use remsamp_cli::experiment::{run_experiment, RunConfig, ScenarioSource};
use remsamp_cli::gen::{gen_ghz, gen_random, Angle};

fn p(s: &Scenario, x: &[usize]) -> Dyadic {
    born_probability(s, &Outcome(x.to_vec()), Precision(60)).midpoint()
}

#[test]
fn bell_from_two_party_z_ghz() {
    let s = gen_ghz(2, &[Angle::Z, Angle::Z]).unwrap();
    let half = Dyadic::from_ratio_pow2(1, 1);
    assert_eq!(p(&s, &[0, 0]), half);
    assert_eq!(p(&s, &[1, 1]), half);
    assert_eq!(p(&s, &[0, 1]), Dyadic::zero());
    assert_eq!(p(&s, &[1, 0]), Dyadic::zero());
}

#[test]
fn three_party_z_ghz_is_perfectly_correlated() {
    let s = gen_ghz(3, &[Angle::Z; 3]).unwrap();
    for x in s.all_outcomes() {
        let aligned = x.0.iter().all(|&v| v == x.0[0]);
        let want = if aligned { Dyadic::from_ratio_pow2(1, 1) } else { Dyadic::zero() };
        assert_eq!(p(&s, &x.0), want, "outcome {:?}", x.0);
    }
}

#[test]
fn too_few_parties_is_rejected() {
    assert!(gen_ghz(1, &[Angle::Z]).is_err());
    assert!(gen_ghz(3, &[Angle::Z; 2]).is_err());
}

fn sum(s: &Scenario) -> f64 {
    born_distribution(s, Precision(48)).iter().map(|i| i.to_f64()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn angled_ghz_sums_to_one(m in 2usize..=3, num in prop::collection::vec((-7i64..8, 1u64..9, 0i64..4), 3)) {
        let angles: Vec<Angle> = num.iter().take(m).map(|&(a, b, ph)| Angle::new((a, b), (ph, 4))).collect();
        let s = gen_ghz(m, &angles).unwrap();
        prop_assert!(validate(&s).is_valid());
        prop_assert!((sum(&s) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_scenarios_are_valid_and_normalized(
        seed in any::<u64>(),
        shape in prop::sample::select(vec![(vec![2, 2], vec![2, 2]), (vec![2, 3], vec![3, 2]), (vec![2, 2, 2], vec![2, 3, 2])]),
    ) {
        let (dims, outcomes) = shape;
        let s = gen_random(dims.len(), &dims, &outcomes, seed).unwrap();
        prop_assert!(s.is_exact());
        let report = validate(&s);
        prop_assert!(report.is_valid());
        prop_assert!(report.max_residual() <= 2f64.powi(-40));
        // exact entries: the probabilities sum to exactly one
        let total = born_distribution(&s, Precision(60)).iter().fold(Dyadic::zero(), |a, i| &a + &i.midpoint());
        prop_assert_eq!(total, Dyadic::one());
        prop_assert_eq!(gen_random(dims.len(), &dims, &outcomes, seed).unwrap(), s);
    }
}

#[test]
fn single_run_report_is_well_formed() {
    let cfg = RunConfig::new(ScenarioSource::Ghz { m: 2, angles: vec![Angle::X; 2] }, 1, 3);
    let rep = run_experiment(&cfg).unwrap();
    assert_eq!(rep.counts.iter().sum::<u64>(), 1);
    assert_eq!(rep.rows.len(), 1);
    assert!((rep.frequencies.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(rep.bounds.iter().all(|b| !b.formula.is_empty()));
    assert!(rep.bounds.iter().all(|b| b.name != "total variation"));
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("index,seed,outcome,s,t_max,z,r,"));
    assert_eq!(text.lines().count(), 2);
    let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(json["counts"].as_array().unwrap().len(), 4);
}

#[test]
fn reports_reduce_in_seed_order() {
    let cfg = RunConfig::new(ScenarioSource::Random { m: 2, dims: vec![2, 2], outcomes: vec![2, 3], seed: 4 }, 64, 9);
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn dumped_scenario_reproduces_transcripts() {
    let cfg = ProtocolConfig { record_transcript: true, ..ProtocolConfig::default() };
    for s in [
        gen_random(3, &[2, 3, 2], &[2, 2, 3], 11).unwrap(),
        gen_ghz(3, &[Angle::polar(1, 3), Angle::new((1, 5), (1, 4)), Angle::X]).unwrap(),
    ] {
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(again, s);
        for seed in 0..5 {
            let a = run_protocol(&s, &cfg, &mut SeededBits::new(seed)).unwrap();
            let b = run_protocol(&again, &cfg, &mut SeededBits::new(seed)).unwrap();
            assert_eq!(a.transcript.unwrap().bytes, b.transcript.unwrap().bytes);
            assert_eq!(a.outcome, b.outcome);
        }
    }
}

fn remsamp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_remsamp")).args(args).output().expect("binary runs")
}

#[test]
fn binary_gen_validate_bench_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ghz.json");
    let file_s = file.to_str().unwrap();
    let out = remsamp(&["gen", "--ghz", "3", "--angles", "1/4,x,1/3:1/2", "-o", file_s]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = remsamp(&["validate", file_s]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));

    let base = dir.path().join("report");
    let out = remsamp(&["bench", "--scenario", file_s, "-n", "1500", "--seed", "4", "-o", base.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("PASS meter identities"));
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 1501);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum::<u64>(), 1500);

    // same seed, generated in memory or re-read from the dump: same transcript
    let a = remsamp(&["sample", "--scenario", file_s, "--seed", "7"]);
    let b = remsamp(&["sample", "--ghz", "3", "--angles", "1/4,x,1/3:1/2", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn binary_rejects_invalid_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    let bad = r#"{"rho": [[{"re": "1"}, {"re": "0"}, {"re": "0"}, {"re": "0"}],
                         [{"re": "0"}, {"re": "0"}, {"re": "0"}, {"re": "0"}],
                         [{"re": "0"}, {"re": "0"}, {"re": "0"}, {"re": "0"}],
                         [{"re": "0"}, {"re": "0"}, {"re": "0"}, {"re": "0"}]],
                 "povms": [[[[{"re": "0.5"}, {"re": "0"}], [{"re": "0"}, {"re": "0.5"}]]],
                           [[[{"re": "1"}, {"re": "0"}], [{"re": "0"}, {"re": "1"}]]]]}"#;
    std::fs::write(&file, bad).unwrap();
    let out = remsamp(&["validate", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = remsamp(&["bench", "--scenario", file.to_str().unwrap(), "-n", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_sweep_over_t0() {
    let out = remsamp(&["sweep", "--ghz", "2", "--angles", "x", "--t0-values", "0,1,2,3", "-n", "300"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("x =")).count(), 4);
}
