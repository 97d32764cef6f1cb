use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use remsamp::protocol::{run_protocol, CachePolicy, CostModel, ProtocolConfig, T0Policy, TransportKind};
use remsamp::quantum::{born_distribution, validate, Outcome, Scenario};
use remsamp::randomness::SeededBits;
use remsamp::sampler::RandomnessModel;
use remsamp_cli::experiment::{
    run_experiment, run_seeds, run_sweep, RunConfig, ScenarioSource, SourceChoice, SweepAxis, ORACLE_PRECISION,
    UNIFORM_BITS,
};
use remsamp_cli::gen::Angle;

#[derive(Parser)]
#[command(name = "remsamp", version, about = "Exact remote sampling of Born-rule distributions with metered communication")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a scenario file against the quantum constraints.
    Validate {
        file: PathBuf,
    },
    /// One protocol run with its transcript.
    Sample(SampleArgs),
    /// N runs with statistics and bound checks.
    Bench(BenchArgs),
    /// Repeat a bench while varying m (GHZ) or t0.
    Sweep(SweepArgs),
    /// Write a generated scenario as JSON.
    Gen {
        #[command(flatten)]
        source: GenArgs,
        /// Output file; stdout if absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct GenArgs {
    /// GHZ on this many qubits.
    #[arg(long, conflicts_with = "random")]
    ghz: Option<usize>,
    /// Angles per party as fractions of π, `theta[:phi]`, or `x` / `z`.
    /// One value is repeated for every party.
    #[arg(long, value_delimiter = ',', default_value = "z")]
    angles: Vec<Angle>,
    /// Random scenario on this many parties.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    outcomes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
}

impl GenArgs {
    fn source(&self) -> Result<ScenarioSource> {
        let widen = |v: &[usize], m: usize| if v.len() == 1 { vec![v[0]; m] } else { v.to_vec() };
        match (self.ghz, self.random) {
            (Some(m), None) => {
                let angles = if self.angles.len() == 1 { vec![self.angles[0]; m] } else { self.angles.clone() };
                Ok(ScenarioSource::Ghz { m, angles })
            }
            (None, Some(m)) => Ok(ScenarioSource::Random {
                m,
                dims: widen(&self.dims, m),
                outcomes: widen(&self.outcomes, m),
                seed: self.gen_seed,
            }),
            _ => bail!("give exactly one of --ghz or --random"),
        }
    }
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with_all = ["ghz", "random"])]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
}

impl ScenarioArgs {
    fn source(&self) -> Result<ScenarioSource> {
        match &self.scenario {
            Some(p) => Ok(ScenarioSource::File(p.clone())),
            None => self.gen.source(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Discrete,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Truncation,
    Approximation,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Memory,
    Socket,
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheArg {
    Persist,
    PerRound,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Fixed t0; the default is ⌈lg n⌉.
    #[arg(long, conflicts_with = "t0_offset")]
    t0: Option<u32>,
    /// t0 = ⌈lg n⌉ + offset.
    #[arg(long, allow_negative_numbers = true)]
    t0_offset: Option<i32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "discrete")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "truncation")]
    source: SourceArg,
    #[arg(long, value_enum, default_value = "memory")]
    transport: TransportArg,
    #[arg(long, value_enum, default_value = "persist")]
    cache: CacheArg,
}

impl RunArgs {
    fn config(&self, runs: usize, output: Option<PathBuf>) -> Result<RunConfig> {
        let t0 = match (self.t0, self.t0_offset) {
            (Some(t), _) => T0Policy::Fixed(t),
            (None, Some(a)) => T0Policy::Offset(a),
            (None, None) => T0Policy::CeilLgN,
        };
        Ok(RunConfig {
            scenario: self.scenario.source()?,
            t0,
            seed: self.seed,
            runs,
            source: match self.source {
                SourceArg::Truncation => SourceChoice::Truncation,
                SourceArg::Approximation => SourceChoice::Approximation,
            },
            model: match self.model {
                ModelArg::Discrete => RandomnessModel::Discrete,
                ModelArg::Uniform => RandomnessModel::Uniform { bits: UNIFORM_BITS },
            },
            transport: match self.transport {
                TransportArg::Memory => TransportKind::InMemory,
                TransportArg::Socket => TransportKind::Socket,
            },
            cache: match self.cache {
                CacheArg::Persist => CachePolicy::Persist,
                CacheArg::PerRound => CachePolicy::PerRound,
            },
            output,
        })
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Number of runs.
    #[arg(short = 'n', long, default_value_t = 10_000)]
    runs: usize,
    /// Writes `<out>.json` and `<out>.csv`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(short = 'n', long, default_value_t = 2_000)]
    runs: usize,
    /// Party counts for a GHZ sweep, measured along the first --angles value.
    #[arg(long, value_delimiter = ',', conflicts_with = "t0_values")]
    parties: Option<Vec<usize>>,
    /// t0 values for a sweep on the given scenario.
    #[arg(long, value_delimiter = ',')]
    t0_values: Option<Vec<u32>>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn load(file: &PathBuf) -> Result<Scenario> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    Ok(Scenario::from_json(&text)?)
}

fn cmd_validate(file: &PathBuf) -> Result<bool> {
    let s = load(file)?;
    let report = validate(&s);
    println!("m = {}, dims = {:?}, outcomes = {:?}, exact = {}", s.m(), s.dims, s.outcomes, s.is_exact());
    if s.inexact_entries > 0 {
        println!("{} decimal entries were not dyadic and were truncated on ingest", s.inexact_entries);
    }
    for v in report.violations() {
        println!("violation: {v:?}");
    }
    for e in &report.structural {
        println!("structural: {e}");
    }
    println!("max residual {:e}: {}", report.max_residual(), if report.is_valid() { "valid" } else { "INVALID" });
    Ok(report.is_valid())
}

fn cmd_sample(args: &SampleArgs) -> Result<bool> {
    let cfg = args.run.config(1, None)?;
    let s = cfg.scenario.load()?;
    if !validate(&s).is_valid() {
        bail!("scenario failed validation");
    }
    let pcfg = ProtocolConfig { record_transcript: true, ..cfg.protocol() };
    let seed = run_seeds(cfg.seed, 1)[0];
    let r = run_protocol(&s, &pcfg, &mut SeededBits::new(seed))?;
    let oracle = born_distribution(&s, ORACLE_PRECISION);
    let cost = CostModel::new(s.dims.clone(), s.outcomes.clone());
    let out = io::stdout();
    let mut out = out.lock();
    if let Some(tr) = &r.transcript {
        for e in &tr.entries {
            writeln!(
                out,
                "{} custodian {:>2} {:<24} {:>6} bits  Z = {}",
                if e.upstream { "<-" } else { "->" },
                e.custodian,
                format!("{:?}", e.kind),
                e.metered_bits,
                e.cumulative_z
            )?;
        }
    }
    writeln!(out, "outcome {:?} (p = {:.6})", r.outcome, oracle[r.flat].to_f64())?;
    writeln!(out, "custodian outputs {:?}", r.custodian_outputs)?;
    writeln!(out, "t0 = {}, k0 = {}, C = {:.4}, modes {:?}", r.t0.0, r.k0.0, r.stats.c, r.modes)?;
    writeln!(out, "S = {}, loops {:?}", r.stats.s, r.stats.loops)?;
    writeln!(
        out,
        "Z = {} (setup {} = delta {}, refinement {}), control {}, R = {}",
        r.z(),
        r.meter.setup,
        cost.delta(r.t0),
        r.meter.refinement,
        r.meter.control,
        r.random_bits()
    )?;
    debug_assert!(Outcome(r.outcome.clone()).flat(&s.outcomes).is_ok());
    Ok(true)
}

fn write_outputs(out: &Option<PathBuf>, json: &str, csv: impl FnOnce(File) -> Result<()>) -> Result<()> {
    if let Some(base) = out {
        std::fs::write(base.with_extension("json"), json)?;
        csv(File::create(base.with_extension("csv"))?)?;
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<bool> {
    let cfg = args.run.config(args.runs, args.out.clone())?;
    let rep = run_experiment(&cfg)?;
    println!("m = {}, n = {}, t0 = {}, runs = {}, modes {:?}", rep.m, rep.n, rep.t0, args.runs, rep.modes);
    println!("TV = {:.5}, chi-square = {:.3} (df {}, p = {:.4})", rep.tv, rep.chi_square.statistic, rep.chi_square.df, rep.chi_square.p_value);
    println!(
        "mean T = {:.4}, max T = {}, mean S = {:.4}, mean Z = {:.2} (setup {:.1}, refinement {:.2}, control {:.2}), mean R = {:.3}",
        rep.t.mean, rep.t_max, rep.s.mean, rep.z.total.mean, rep.z.setup.mean, rep.z.refinement.mean, rep.z.control.mean, rep.r.mean
    );
    for b in &rep.bounds {
        println!("{}", b.line());
    }
    write_outputs(&args.out, &rep.to_json(), |f| Ok(rep.write_csv(f)?))?;
    Ok(rep.passed())
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let base = args.run.config(args.runs, None)?;
    let axis = match (&args.parties, &args.t0_values) {
        (Some(ms), None) => SweepAxis::Parties { ms: ms.clone(), angle: args.run.scenario.gen.angles[0] },
        (None, Some(v)) => SweepAxis::T0 { values: v.clone() },
        _ => bail!("give exactly one of --parties or --t0-values"),
    };
    let rep = run_sweep(&base, &axis)?;
    for p in &rep.points {
        println!(
            "x = {:>3}  mean Z = {:>10.2} ± {:.2}  mean T = {:.3}  mean S = {:.3}  {}",
            p.x,
            p.mean_z,
            p.z_err,
            p.mean_t,
            p.mean_s,
            if p.passed { "ok" } else { "bound failure" }
        );
    }
    if let Some(e) = rep.exponent {
        println!("log-log exponent {e:.3}");
    }
    let json = serde_json::to_string_pretty(&rep)?;
    write_outputs(&args.out, &json, |f| {
        let mut w = csv::Writer::from_writer(f);
        for p in &rep.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(rep.points.iter().all(|p| p.passed))
}

fn cmd_gen(source: &GenArgs, out: &Option<PathBuf>) -> Result<bool> {
    let s = source.source()?.load()?;
    let json = s.to_json();
    match out {
        Some(p) => std::fs::write(p, json)?,
        None => println!("{json}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Validate { file } => cmd_validate(file),
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Gen { source, out } => cmd_gen(source, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
