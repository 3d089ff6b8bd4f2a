//! Batch CLI: construction, flows, twists, bracket scans, Key-Lemma
//! campaigns, random walks and DH equidistribution tests.
//!
//! Exit codes: 0 success, 2 validation error (bad angles, polytope
//! violation), 3 integrity failure (drift, degenerate orbit on the polytope
//! interior).

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use twistlab::bracket::{bracket_scan, find_bracket_zeros, in_e, DEFAULT_M_MAX};
use twistlab::construct::{build_rep, random_dt_rep, ActionCoords, AngleVector};
use twistlab::dynamics::{apply_twist_word, twist_flow, TwistWord};
use twistlab::ergodics::{
    dh_reference_sampler, ks_statistic, random_walk, GeneratorSet, WalkConfig,
};
use twistlab::error::TwistError;
use twistlab::euler::relative_euler_class;
use twistlab::surface::{ChainCurve, ChainRep};

#[derive(Parser)]
#[command(name = "twistlab", version, about = "Numerics for Deroin-Tholozan representations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a chain representation from angles, moment values and twists
    Construct(ConstructArgs),
    /// Relative Euler class and volume of a representation
    Volume(VolumeArgs),
    /// Apply a twist flow for time t along a chain curve
    Flow(FlowArgs),
    /// Apply a twist word (whitespace-separated b<i>^<m> / d<i>^<m>)
    Twist(TwistArgs),
    /// Scan the Poisson bracket along a b_i-orbit
    BracketScan(BracketScanArgs),
    /// Random campaign checking the two-zero bound on bracket orbits
    KeyLemma(KeyLemmaArgs),
    /// Random walk on the twist subgroup, emitting moment-map samples
    Walk(WalkArgs),
    /// Kolmogorov-Smirnov test of moment samples against the DH reference
    DhTest(DhTestArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Peripheral angles in radians, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// Moment values theta(b_i), comma-separated (n-3 values)
    #[arg(long, value_delimiter = ',', conflicts_with = "seed")]
    x: Option<Vec<f64>>,
    /// Twist parameters, comma-separated (n-3 values)
    #[arg(long, value_delimiter = ',', conflicts_with = "seed")]
    twists: Option<Vec<f64>>,
    /// Sample x and twists uniformly instead of passing them explicitly
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VolumeArgs {
    #[arg(long)]
    rep: PathBuf,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    rep: PathBuf,
    /// Chain curve, e.g. b1 or d2
    #[arg(long)]
    curve: String,
    /// Flow time
    #[arg(long)]
    t: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TwistArgs {
    #[arg(long)]
    rep: PathBuf,
    /// Twist word, e.g. "b1^3 d2^-1 b1^-3"
    #[arg(long)]
    word: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BracketScanArgs {
    #[arg(long)]
    rep: PathBuf,
    /// Curve index of the (b_i, d_i) pair
    #[arg(long)]
    i: usize,
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// CSV output (columns: t, residual, fd_bracket)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct KeyLemmaArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Twist range for the set-E membership statistic
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: i64,
    /// JSON report path (stdout when omitted)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Record every k-th step
    #[arg(long, default_value_t = 10)]
    thin: usize,
    #[arg(long, value_enum, default_value_t = GensArg::All)]
    gens: GensArg,
    /// CSV output (columns: step, x_1..x_{n-3})
    #[arg(long)]
    emit: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum GensArg {
    All,
    BOnly,
}

#[derive(Args)]
struct DhTestArgs {
    /// Moment-sample CSV produced by `walk`
    #[arg(long)]
    moments: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    /// Reference sample size
    #[arg(long, default_value_t = 100_000)]
    reference: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON report path (stdout when omitted)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Twist(TwistError),
    Io(String),
}

impl From<TwistError> for CliError {
    fn from(e: TwistError) -> Self {
        CliError::Twist(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Io(_) => 2,
        CliError::Twist(t) => match t {
            TwistError::AnglesConditionViolated { .. }
            | TwistError::PolytopeViolation
            | TwistError::DimensionMismatch { .. }
            | TwistError::InvalidInput(_)
            | TwistError::UnsupportedCurve(_)
            | TwistError::EmptySample => 2,
            _ => 3,
        },
    }
}

/// 17-significant-digit formatting: round-trips f64 exactly.
fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

fn read_rep(path: &PathBuf) -> Result<ChainRep, CliError> {
    let text = fs::read_to_string(path)?;
    let rep: ChainRep =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    rep.verify(1e-7)?;
    Ok(rep)
}

fn write_rep(path: &PathBuf, rep: &ChainRep) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string_pretty(rep).unwrap())?;
    Ok(())
}

fn write_report(path: &Option<PathBuf>, report: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).unwrap();
    match path {
        Some(p) => fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn parse_curve(s: &str, n: usize) -> Result<ChainCurve, CliError> {
    let c: ChainCurve = s.parse()?;
    c.validate(n)?;
    Ok(c)
}

/// Scheduling-independent per-trial seed (splitmix64 over master ^ index).
fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn init_threads() {
    if let Ok(v) = std::env::var("TWISTLAB_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Construct(a) => {
            let alpha = AngleVector::new(a.alpha)?;
            let rep = match a.seed {
                Some(s) => random_dt_rep(&alpha, s)?,
                None => {
                    let x = a.x.ok_or_else(|| {
                        CliError::Io("either --x/--twists or --seed is required".into())
                    })?;
                    let twists = a.twists.ok_or_else(|| {
                        CliError::Io("either --x/--twists or --seed is required".into())
                    })?;
                    build_rep(&alpha, &ActionCoords(x), &twists)?
                }
            };
            write_rep(&a.out, &rep)?;
            eprintln!("wrote {}", a.out.display());
        }
        Cmd::Volume(a) => {
            let rep = read_rep(&a.rep)?;
            let report = relative_euler_class(&rep)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Cmd::Flow(a) => {
            let rep = read_rep(&a.rep)?;
            let c = parse_curve(&a.curve, rep.n)?;
            write_rep(&a.out, &twist_flow(&rep, &c, a.t)?)?;
        }
        Cmd::Twist(a) => {
            let rep = read_rep(&a.rep)?;
            let word: TwistWord = a.word.parse()?;
            word.validate(rep.n)?;
            write_rep(&a.out, &apply_twist_word(&rep, &word)?)?;
        }
        Cmd::BracketScan(a) => {
            let rep = read_rep(&a.rep)?;
            let scan = bracket_scan(&rep, a.i, a.grid)?;
            if let Some(csv) = &a.csv {
                let mut f = fs::File::create(csv)?;
                writeln!(f, "t,residual,fd_bracket")?;
                for k in 0..scan.ts.len() {
                    writeln!(
                        f,
                        "{},{},{}",
                        fmt17(scan.ts[k]),
                        fmt17(scan.residuals[k]),
                        fmt17(scan.fd_values[k])
                    )?;
                }
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "version": twistlab::VERSION,
                    "i": scan.i,
                    "zeros": scan.zeros,
                    "grid": a.grid,
                }))
                .unwrap()
            );
        }
        Cmd::KeyLemma(a) => {
            init_threads();
            use rayon::prelude::*;
            let alpha = AngleVector::new(a.alpha.clone())?;
            let dim = alpha.n() - 3;
            if dim == 0 {
                return Err(CliError::Twist(TwistError::InvalidInput(
                    "key-lemma needs n >= 4".into(),
                )));
            }
            let results: Vec<Result<(usize, f64, usize, usize), TwistError>> = (0..a.trials)
                .into_par_iter()
                .map(|t| {
                    let rep = random_dt_rep(&alpha, trial_seed(a.seed, t as u64))?;
                    let mut max_zeros = 0usize;
                    let mut worst_sep = 0.0f64;
                    let mut degenerate = 0usize;
                    let mut in_e_count = 0usize;
                    for i in 1..=dim {
                        match find_bracket_zeros(&rep, i) {
                            Ok(scan) => {
                                max_zeros = max_zeros.max(scan.zeros.len());
                                if scan.zeros.len() == 2 {
                                    let sep = scan.zeros[1] - scan.zeros[0];
                                    worst_sep =
                                        worst_sep.max((sep - std::f64::consts::PI / 2.0).abs());
                                }
                            }
                            Err(TwistError::DegenerateOrbit { .. }) => degenerate += 1,
                            Err(e) => return Err(e),
                        }
                        if in_e(&rep, i, a.m_max)? {
                            in_e_count += 1;
                        }
                    }
                    Ok((max_zeros, worst_sep, degenerate, in_e_count))
                })
                .collect();
            let mut max_zeros = 0usize;
            let mut worst_sep = 0.0f64;
            let mut degenerate = 0usize;
            let mut in_e_count = 0usize;
            for r in results {
                let (z, s, d, e) = r?;
                max_zeros = max_zeros.max(z);
                worst_sep = worst_sep.max(s);
                degenerate += d;
                in_e_count += e;
            }
            let report = json!({
                "version": twistlab::VERSION,
                "config": {
                    "alpha": a.alpha,
                    "trials": a.trials,
                    "seed": a.seed,
                    "m_max": a.m_max,
                },
                "max_zeros": max_zeros,
                "max_separation_error": worst_sep,
                "degenerate_orbits": degenerate,
                "orbit_pairs_tested": a.trials * dim,
                "in_e_count": in_e_count,
            });
            write_report(&a.report, &report)?;
        }
        Cmd::Walk(a) => {
            let cfg = WalkConfig {
                alpha: AngleVector::new(a.alpha)?,
                steps: a.steps,
                seed: a.seed,
                generator_set: match a.gens {
                    GensArg::All => GeneratorSet::All,
                    GensArg::BOnly => GeneratorSet::BOnly,
                },
                thinning: a.thin,
            };
            let samples = random_walk(&cfg)?;
            let mut f = fs::File::create(&a.emit)?;
            let dim = cfg.alpha.n() - 3;
            let header: Vec<String> = std::iter::once("step".to_string())
                .chain((1..=dim).map(|i| format!("x_{i}")))
                .collect();
            writeln!(f, "{}", header.join(","))?;
            for s in &samples {
                let row: Vec<String> = std::iter::once(s.step.to_string())
                    .chain(s.x.iter().map(|&v| fmt17(v)))
                    .collect();
                writeln!(f, "{}", row.join(","))?;
            }
            eprintln!("wrote {} samples to {}", samples.len(), a.emit.display());
        }
        Cmd::DhTest(a) => {
            let alpha = AngleVector::new(a.alpha.clone())?;
            let dim = alpha.n() - 3;
            let text = fs::read_to_string(&a.moments)?;
            let mut cols: Vec<Vec<f64>> = vec![Vec::new(); dim];
            for (lineno, line) in text.lines().enumerate().skip(1) {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != dim + 1 {
                    return Err(CliError::Io(format!(
                        "{}:{}: expected {} columns",
                        a.moments.display(),
                        lineno + 1,
                        dim + 1
                    )));
                }
                for j in 0..dim {
                    cols[j].push(fields[j + 1].parse().map_err(|e| {
                        CliError::Io(format!("{}:{}: {e}", a.moments.display(), lineno + 1))
                    })?);
                }
            }
            let reference = dh_reference_sampler(&alpha, a.reference, a.seed)?;
            let mut ks = Vec::with_capacity(dim);
            for j in 0..dim {
                let mut ref_j: Vec<f64> = reference.iter().map(|s| s.0[j]).collect();
                ref_j.sort_by(|a, b| a.total_cmp(b));
                let cdf = move |x: f64| {
                    let k = ref_j.partition_point(|&v| v <= x);
                    k as f64 / ref_j.len() as f64
                };
                ks.push(ks_statistic(&cols[j], cdf)?);
            }
            let worst = ks.iter().cloned().fold(0.0f64, f64::max);
            let report = json!({
                "version": twistlab::VERSION,
                "config": {
                    "alpha": a.alpha,
                    "moments": a.moments.display().to_string(),
                    "reference": a.reference,
                    "seed": a.seed,
                },
                "n_samples": cols[0].len(),
                "ks_per_coordinate": ks,
                "warning": if worst >= 0.05 {
                    Some(format!("KS distance {worst} exceeds the 0.05 smoke threshold"))
                } else {
                    None
                },
            });
            write_report(&a.report, &report)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Twist(t) => eprintln!("error: {t}"),
                CliError::Io(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
