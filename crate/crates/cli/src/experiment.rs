//! Batch runs of the protocol, with per-run rows, aggregate statistics and
//! bound comparisons.

use std::path::PathBuf;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use remsamp::protocol::{
    run_protocol, CachePolicy, CostModel, ProtocolConfig, ProtocolError, RunReport, SourceMode, T0Policy,
    TransportKind,
};
use remsamp::quantum::{born_distribution, validate, QuantumError, Scenario};
use remsamp::randomness::SeededBits;
use remsamp::sampler::RandomnessModel;
use remsamp::Precision;
use serde::Serialize;
use thiserror::Error;

use crate::gen::{gen_ghz, gen_random, Angle, GenError};
use crate::stats::{chi_square, loglog_slope, tv_distance, BoundRow, ChiSquare, Check, Moments};

/// Bits of `U` drawn up front in the uniform model.
pub const UNIFORM_BITS: u32 = 256;

/// Oracle precision for the reference distribution.
pub const ORACLE_PRECISION: Precision = Precision(48);

/// Below this many runs the goodness-of-fit row is left out of the report.
pub const MIN_RUNS_FOR_DISTRIBUTION: usize = 1000;

/// The fixed total variation threshold only means something at this size.
pub const MIN_RUNS_FOR_TV: usize = 100_000;

/// Largest total variation accepted at [`MIN_RUNS_FOR_TV`] runs or more.
pub const TV_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("run count must be at least 1")]
    NoRuns,
    #[error("cannot read scenario {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Scenario(#[from] QuantumError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("scenario failed validation: {0}")]
    Invalid(String),
    #[error("run {index} (seed {seed}) failed: {source}")]
    Run { index: usize, seed: u64, source: ProtocolError },
}

/// Where the scenario comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    File(PathBuf),
    Ghz { m: usize, angles: Vec<Angle> },
    Random { m: usize, dims: Vec<usize>, outcomes: Vec<usize>, seed: u64 },
    Given(#[serde(skip)] Box<Scenario>),
}

impl ScenarioSource {
    pub fn load(&self) -> Result<Scenario, ExperimentError> {
        Ok(match self {
            ScenarioSource::File(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|source| ExperimentError::Read { path: path.clone(), source })?;
                Scenario::from_json(&text)?
            }
            ScenarioSource::Ghz { m, angles } => gen_ghz(*m, angles)?,
            ScenarioSource::Random { m, dims, outcomes, seed } => gen_random(*m, dims, outcomes, *seed)?,
            ScenarioSource::Given(s) => (**s).clone(),
        })
    }
}

/// Refinement data source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceChoice {
    /// Truncations where the entries are exact, approximations elsewhere.
    #[default]
    Truncation,
    /// Fresh approximations from every custodian.
    Approximation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    pub t0: T0Policy,
    pub seed: u64,
    pub runs: usize,
    pub source: SourceChoice,
    pub model: RandomnessModel,
    pub transport: TransportKind,
    pub cache: CachePolicy,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(scenario: ScenarioSource, runs: usize, seed: u64) -> Self {
        RunConfig {
            scenario,
            t0: T0Policy::CeilLgN,
            seed,
            runs,
            source: SourceChoice::Truncation,
            model: RandomnessModel::Discrete,
            transport: TransportKind::InMemory,
            cache: CachePolicy::Persist,
            output: None,
        }
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            t0: self.t0,
            cache: self.cache,
            model: self.model,
            transport: self.transport,
            force_approximation: self.source == SourceChoice::Approximation,
            ..ProtocolConfig::default()
        }
    }
}

/// Run seeds, drawn in order from one generator seeded with `seed`.
pub fn run_seeds(seed: u64, runs: usize) -> Vec<u64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..runs).map(|_| rng.next_u64()).collect()
}

/// One row per run; this is what goes to the CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunRow {
    pub index: usize,
    pub seed: u64,
    pub outcome: usize,
    /// Proposals.
    pub s: u64,
    /// Largest `t` reached in any loop.
    pub t_max: u32,
    /// Setup plus refinement bits.
    pub z: u64,
    /// Random bits consumed.
    pub r: u64,
    pub setup: u64,
    pub refinement: u64,
    pub control: u64,
    /// Whether every meter identity held on this run.
    pub meter_ok: bool,
}

/// Per-step bits a custodian set should be charged: `1 + d_i²` for a
/// truncating custodian, `1 + (t + 2 + loss)·d_i²` for an approximating one.
pub fn expected_step_bits(cost: &CostModel, modes: &[SourceMode], t: Precision) -> u64 {
    let width = u64::from(t.0) + 2 + cost.loss_bits();
    cost.dims
        .iter()
        .zip(modes)
        .map(|(&d, mode)| {
            let d2 = (d * d) as u64;
            1 + match mode {
                SourceMode::TruncationCapable => d2,
                SourceMode::ApproximationOnly => width * d2,
            }
        })
        .sum()
}

/// Checks the meter identities of one run: setup is `δ(t0)`; every step
/// costs exactly its formula when caches are reset every round, and at most
/// that when earlier answers may be reused.
pub fn meter_identities_hold(r: &RunReport, cost: &CostModel, cache: CachePolicy) -> bool {
    if r.meter.setup != cost.delta(r.t0) {
        return false;
    }
    let all_asked = cache == CachePolicy::PerRound;
    let steps_ok = r.steps.iter().all(|st| {
        let want = expected_step_bits(cost, &r.modes, Precision(st.t));
        if all_asked {
            st.bits == want && st.asked as usize == cost.m
        } else {
            st.bits <= want
        }
    });
    let total: u64 = r.steps.iter().map(|s| s.bits).sum();
    steps_ok && total == r.meter.refinement
}

#[derive(Clone, Debug, Serialize)]
pub struct ZBreakdown {
    pub setup: Moments,
    pub refinement: Moments,
    pub control: Moments,
    pub total: Moments,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: RunConfig,
    pub m: usize,
    pub n: usize,
    pub t0: u32,
    pub modes: Vec<SourceMode>,
    pub counts: Vec<u64>,
    pub frequencies: Vec<f64>,
    pub oracle: Vec<f64>,
    pub tv: f64,
    pub chi_square: ChiSquare,
    /// Loop lengths over every loop of every run.
    pub t: Moments,
    pub t_max: u32,
    pub s: Moments,
    pub z: ZBreakdown,
    pub r: Moments,
    pub ky_bits: u64,
    pub u_bits: u64,
    pub c: f64,
    pub meter_failures: usize,
    pub bounds: Vec<BoundRow>,
    #[serde(skip)]
    pub rows: Vec<RunRow>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.bounds.iter().all(|b| b.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs `cfg.runs` independent protocol executions in parallel and reduces
/// them in seed order.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.runs == 0 {
        return Err(ExperimentError::NoRuns);
    }
    let scenario = cfg.scenario.load()?;
    let report = validate(&scenario);
    if !report.is_valid() {
        return Err(ExperimentError::Invalid(format!("{report:?}")));
    }
    let pcfg = cfg.protocol();
    let cost = CostModel::new(scenario.dims.clone(), scenario.outcomes.clone());
    let seeds = run_seeds(cfg.seed, cfg.runs);
    let results: Vec<RunReport> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, &seed)| {
            run_protocol(&scenario, &pcfg, &mut SeededBits::new(seed)).map_err(|source| ExperimentError::Run { index, seed, source })
        })
        .collect::<Result<_, _>>()?;
    let oracle: Vec<f64> = born_distribution(&scenario, ORACLE_PRECISION).iter().map(|p| p.to_f64()).collect();
    Ok(summarize(cfg, &scenario, &cost, &seeds, &results, oracle))
}

fn summarize(
    cfg: &RunConfig,
    scenario: &Scenario,
    cost: &CostModel,
    seeds: &[u64],
    results: &[RunReport],
    oracle: Vec<f64>,
) -> ExperimentReport {
    let n = scenario.n();
    let first = &results[0];
    let t0 = first.t0;
    let mut counts = vec![0u64; n];
    let mut rows = Vec::with_capacity(results.len());
    for (index, (r, &seed)) in results.iter().zip(seeds).enumerate() {
        counts[r.flat] += 1;
        rows.push(RunRow {
            index,
            seed,
            outcome: r.flat,
            s: r.stats.s,
            t_max: r.stats.loops.iter().copied().max().unwrap_or(0),
            z: r.z(),
            r: r.random_bits(),
            setup: r.meter.setup,
            refinement: r.meter.refinement,
            control: r.meter.control,
            meter_ok: meter_identities_hold(r, cost, cfg.cache),
        });
    }
    let runs = results.len() as f64;
    let frequencies = counts.iter().map(|&c| c as f64 / runs).collect();
    let tv = tv_distance(&counts, &oracle);
    let chi = chi_square(&counts, &oracle);
    let t = Moments::of(results.iter().flat_map(|r| r.stats.loops.iter().map(|&t| f64::from(t))));
    let s = Moments::of(rows.iter().map(|r| r.s as f64));
    let z = ZBreakdown {
        setup: Moments::of(rows.iter().map(|r| r.setup as f64)),
        refinement: Moments::of(rows.iter().map(|r| r.refinement as f64)),
        control: Moments::of(rows.iter().map(|r| r.control as f64)),
        total: Moments::of(rows.iter().map(|r| r.z as f64)),
    };
    let r = Moments::of(rows.iter().map(|r| r.r as f64));
    let meter_failures = rows.iter().filter(|r| !r.meter_ok).count();
    let c = first.stats.c;
    let all_truncating = first.modes.iter().all(|m| *m == SourceMode::TruncationCapable);

    let mut bounds = Vec::new();
    if results.len() >= MIN_RUNS_FOR_TV {
        bounds.push(BoundRow::exact("total variation", "TV(empirical, Born) < 0.01", TV_THRESHOLD, tv, Check::AtMost));
    }
    if results.len() >= MIN_RUNS_FOR_DISTRIBUTION {
        bounds.push(BoundRow::exact("chi-square p-value", "goodness of fit at alpha = 0.001", 0.001, chi.p_value, Check::AtLeast));
    }
    let t0f = t0.0 as i32;
    match cfg.model {
        RandomnessModel::Discrete => bounds.push(BoundRow::mean_at_most(
            "mean T (random bits)",
            "E(T) <= t0 + 3 + 2^-t0",
            f64::from(t0.0) + 3.0 + 2f64.powi(-t0f),
            &t,
        )),
        RandomnessModel::Uniform { .. } => {
            bounds.push(BoundRow::mean_at_most("mean T (uniform)", "E(T) <= t0 + 3", f64::from(t0.0) + 3.0, &t))
        }
    }
    bounds.push(BoundRow::exact("C", "C <= 1 + 2^(1-t0) n", cost.c_bound(t0), c, Check::AtMost));
    bounds.push(BoundRow::exact("C lower", "C >= 1", 1.0, c, Check::AtLeast));
    bounds.push(BoundRow::mean_at_most("mean S", "E(S) = C", c, &s));
    let ez = match (all_truncating, cfg.model) {
        (false, _) => ("mean Z (approximation)", "delta(t0) + C_max sum_t gamma(t) P(T >= t)", cost.ez_bound_approximation(t0)),
        (true, RandomnessModel::Discrete) => {
            ("mean Z (random bits)", "delta(t0) + (3 + 2^-t0)(1 + 2^(1-t0) n) gamma", cost.ez_bound_discrete(t0))
        }
        (true, RandomnessModel::Uniform { .. }) => {
            ("mean Z (uniform)", "delta(t0) + 3 (1 + 2^(1-t0) n) gamma", cost.ez_bound_uniform(t0))
        }
    };
    bounds.push(BoundRow::mean_at_most(ez.0, ez.1, ez.2, &z.total));
    if all_truncating && t0 == remsamp::protocol::t0_default(n) {
        bounds.push(BoundRow::mean_at_most(
            "mean Z (tradeoff)",
            "(ceil lg n + loss + 2) sum n_i d_i^2 + 9 gamma",
            cost.ez_bound_tradeoff() as f64,
            &z.total,
        ));
    }
    if cfg.model == RandomnessModel::Discrete {
        bounds.push(BoundRow::mean_at_most("mean R", "(1 + 2^(1-t0) n)(lg n + t0 + 5 + 2^-t0)", cost.er_bound(t0), &r));
    }
    bounds.push(BoundRow::exact("meter identities", "setup = delta(t0), step = gamma or gamma(t)", 0.0, meter_failures as f64, Check::Equal));

    ExperimentReport {
        config: cfg.clone(),
        m: scenario.m(),
        n,
        t0: t0.0,
        modes: first.modes.clone(),
        counts,
        frequencies,
        oracle,
        tv,
        chi_square: chi,
        t_max: t.max as u32,
        t,
        s,
        z,
        r,
        ky_bits: results.iter().map(|r| r.stats.ky_bits).sum(),
        u_bits: results.iter().map(|r| r.stats.u_bits).sum(),
        c,
        meter_failures,
        bounds,
        rows,
    }
}

/// What a sweep varies.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// GHZ on `m` parties, all measuring along one angle.
    Parties { ms: Vec<usize>, angle: Angle },
    /// Fixed `t0` values on one scenario.
    T0 { values: Vec<u32> },
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub x: f64,
    pub mean_z: f64,
    pub z_err: f64,
    pub mean_t: f64,
    pub mean_s: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    /// Log-log slope of mean Z against the swept variable.
    pub exponent: Option<f64>,
}

/// Runs one experiment per point of `axis`, reusing every other field of
/// `base`.
pub fn run_sweep(base: &RunConfig, axis: &SweepAxis) -> Result<SweepReport, ExperimentError> {
    let configs: Vec<(f64, RunConfig)> = match axis {
        SweepAxis::Parties { ms, angle } => ms
            .iter()
            .map(|&m| (m as f64, RunConfig { scenario: ScenarioSource::Ghz { m, angles: vec![*angle; m] }, ..base.clone() }))
            .collect(),
        SweepAxis::T0 { values } => {
            values.iter().map(|&t| (f64::from(t), RunConfig { t0: T0Policy::Fixed(t), ..base.clone() })).collect()
        }
    };
    let mut points = Vec::with_capacity(configs.len());
    for (x, cfg) in configs {
        let rep = run_experiment(&cfg)?;
        points.push(SweepPoint {
            x,
            mean_z: rep.z.total.mean,
            z_err: rep.z.total.std_err(),
            mean_t: rep.t.mean,
            mean_s: rep.s.mean,
            passed: rep.passed(),
        });
    }
    let exponent = loglog_slope(&points.iter().map(|p| (p.x, p.mean_z)).collect::<Vec<_>>());
    Ok(SweepReport { axis: axis.clone(), points, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let a = run_seeds(5, 100);
        assert_eq!(a, run_seeds(5, 100));
        assert_eq!(&run_seeds(5, 10)[..], &a[..10]);
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
    }

    #[test]
    fn step_bits_reduce_to_gamma_and_gamma_at() {
        let cost = CostModel::new(vec![2, 2], vec![2, 2]);
        let t = [SourceMode::TruncationCapable; 2];
        let a = [SourceMode::ApproximationOnly; 2];
        assert_eq!(expected_step_bits(&cost, &t, Precision(5)), cost.gamma());
        assert_eq!(expected_step_bits(&cost, &a, Precision(5)), cost.gamma_at(Precision(5)));
    }

    #[test]
    fn zero_runs_is_an_error() {
        let cfg = RunConfig::new(ScenarioSource::Ghz { m: 2, angles: vec![Angle::Z; 2] }, 0, 1);
        assert!(matches!(run_experiment(&cfg), Err(ExperimentError::NoRuns)));
    }
}
