//! `ocm` command line: `predict`, `simulate`, `curve` and `verify`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analytics::{
    cr_du, degree2_benchmarks, extremality_alpha, psi_leading, AnalyticsError, ConfigModelLaw,
};
use crate::degree_dist::{DegreeDistribution, DistKind};
use crate::harness::{
    compare_analytic, curve_sweep, default_workers, parse_algorithms, predictions_at_ratio, run_trials,
    trial_graph, ExperimentConfig, HarnessError,
};
use crate::num_format;
use crate::verify::{run_all, VerifyOptions, CRITERIA};

const FIXED_POINT_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "ocm", version, about = "Irregular cuckoo hashing instances: analytic predictions and simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print analytic quantities for a degree law as JSON.
    Predict(PredictArgs),
    /// Run seeded trials and compare them with the analytic predictions.
    Simulate(SimulateArgs),
    /// Sweep the D_u family and compare greedy with its analytic ratio.
    Curve(CurveArgs),
    /// Run the acceptance suite; exits 1 if any criterion fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here as well (CSV if the name ends in .csv, JSON otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Degree law: main, trunc:D, epsmass:D:EPS, du:U, unif:D or explicit:d=p,...
    #[arg(long)]
    pub dist: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Degree law: main, trunc:D, epsmass:D:EPS, du:U, unif:D or explicit:d=p,...
    #[arg(long)]
    pub dist: String,
    /// Number of users.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Number of ads [default: same as --n].
    #[arg(long)]
    pub ads: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Master seed; falls back to OCM_SEED, then 42.
    #[arg(long, env = "OCM_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Comma-separated subset of greedy, ranking, karp_sipser, max_matching.
    #[arg(long, default_value = "greedy,max_matching")]
    pub algs: String,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Largest degree the sampler may emit [default: number of ads].
    #[arg(long)]
    pub cap: Option<usize>,
    /// Dump the first trial's graph to this path.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
    /// Record per-algorithm wall times (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Comma-separated u values in (0, 1].
    #[arg(long)]
    pub u: String,
    /// Number of ads; each row uses ceil(u·n) users.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Master seed; falls back to OCM_SEED, then 42.
    #[arg(long, env = "OCM_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Master seed; falls back to OCM_SEED, then 42.
    #[arg(long, env = "OCM_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    /// Bad flags or values: exit 2.
    Usage(String),
    /// Anything that went wrong after validation: exit 1.
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Dist(_) | HarnessError::InvalidConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for Failure {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Dist(_) | AnalyticsError::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let line = msg.lines().next().unwrap_or("invalid arguments");
                    eprintln!("ocm: {}", line.trim_start_matches("error: "));
                    2
                }
            };
        }
    };
    let result = match cli.command {
        Command::Predict(a) => predict(a),
        Command::Simulate(a) => simulate(a),
        Command::Curve(a) => curve(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("ocm: {m}");
            2
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("ocm: {m}");
            1
        }
    }
}

fn workers(flag: Option<usize>) -> Result<usize, Failure> {
    match flag {
        Some(0) => Err(Failure::Usage("--workers must be >= 1".into())),
        Some(w) => Ok(w),
        None => Ok(default_workers()),
    }
}

/// Refuses to clobber `path` unless `force`; creates missing parent directories.
fn check_writable(path: &Path, force: bool) -> Result<(), Failure> {
    if path.exists() && !force {
        return Err(Failure::Usage(format!(
            "{} already exists (pass --force to overwrite)",
            path.display()
        )));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn emit(json: &str) {
    let mut out = std::io::stdout().lock();
    // A closed pipe is not an error worth reporting.
    let _ = writeln!(out, "{json}");
}

#[derive(Debug, Serialize)]
struct PredictReport {
    dist: String,
    /// Users per ad the quantities refer to.
    #[serde(serialize_with = "num_format::ser")]
    ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    mean_degree: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    mu: Option<f64>,
    /// Greedy matched fraction of min(users, ads).
    #[serde(serialize_with = "num_format::ser")]
    greedy: f64,
    /// Maximum matching fraction of min(users, ads).
    #[serde(serialize_with = "num_format::ser")]
    max_matching: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_interval: Option<Interval>,
    /// Competitive ratio greedy / maximum.
    #[serde(serialize_with = "num_format::ser")]
    cr: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", serialize_with = "num_format::ser_slice")]
    fixed_point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    ks_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    ks_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    greedy_benchmark: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    max_benchmark: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    w_hat_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "num_format::ser_opt")]
    u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Interval {
    #[serde(serialize_with = "num_format::ser")]
    lower: f64,
    #[serde(serialize_with = "num_format::ser")]
    upper: f64,
}

fn predict_report(dist: &DegreeDistribution) -> Result<PredictReport, Failure> {
    let ratio = match *dist.kind() {
        DistKind::GeneralizedU { u } => u,
        _ => 1.0,
    };
    let p = predictions_at_ratio(dist, ratio)?;
    let mut r = PredictReport {
        dist: dist.to_string(),
        ratio,
        mean_degree: (!dist.is_unbounded()).then(|| dist.mean_degree()),
        mu: None,
        greedy: p.greedy.point,
        max_matching: p.max_matching.point,
        max_interval: p
            .max_matching
            .lower
            .zip(p.max_matching.upper)
            .map(|(lower, upper)| Interval { lower, upper }),
        cr: p.greedy.point / p.max_matching.point,
        fixed_point: Vec::new(),
        ks_lower: p.karp_sipser.as_ref().map(|k| k.point),
        ks_upper: None,
        greedy_benchmark: None,
        max_benchmark: None,
        alpha: None,
        w_hat_1: None,
        psi: None,
        u: None,
        delta: None,
    };
    if !dist.is_unbounded() {
        let law = ConfigModelLaw::new(dist, ratio)?;
        let fp = law.solve(FIXED_POINT_TOL)?;
        let b = law.bounds(&fp);
        r.mu = Some(law.mu());
        r.fixed_point = vec![fp.w_hat_1, fp.w_2];
        r.ks_upper = Some(b.upper_fraction / ratio.min(1.0));
    }
    match *dist.kind() {
        DistKind::UniformDegree { d: 2 } => {
            let (g, m) = degree2_benchmarks()?;
            r.greedy_benchmark = Some(g);
            r.max_benchmark = Some(m);
        }
        DistKind::EpsMass { delta, eps } => {
            let (alpha, w) = extremality_alpha(delta, eps)?;
            r.alpha = Some(alpha);
            r.w_hat_1 = Some(w);
            r.psi = Some(psi_leading(delta, eps));
        }
        DistKind::GeneralizedU { u } => {
            r.u = Some(u);
            r.delta = dist.max_degree();
            r.cr = cr_du(u)?;
        }
        _ => {}
    }
    Ok(r)
}

fn predict(a: PredictArgs) -> Result<i32, Failure> {
    let dist: DegreeDistribution = a.dist.parse().map_err(HarnessError::from)?;
    if let Some(path) = &a.output.out {
        check_writable(path, a.output.force)?;
    }
    let report = predict_report(&dist)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &a.output.out {
        write_file(path, format!("{json}\n").as_bytes())?;
    }
    emit(&json);
    Ok(0)
}

fn simulate(a: SimulateArgs) -> Result<i32, Failure> {
    let mut cfg = ExperimentConfig::new(a.dist.clone(), a.n, a.ads.unwrap_or(a.n));
    cfg.trials = a.trials;
    cfg.master_seed = a.seed;
    cfg.algorithms = parse_algorithms(&a.algs)?;
    cfg.workers = workers(a.workers)?;
    cfg.cap = a.cap;
    cfg.timing = a.timing;
    let dist = cfg.validate()?;
    if let Some(path) = &a.output.out {
        check_writable(path, a.output.force)?;
    }
    if let Some(path) = &a.dump_graph {
        check_writable(path, a.output.force)?;
    }

    if let Some(path) = &a.dump_graph {
        let g = trial_graph(&cfg, &dist, 0)?;
        let mut buf = Vec::new();
        g.write_dump(&mut buf)
            .map_err(|e| Failure::Runtime(format!("graph dump: {e}")))?;
        write_file(path, &buf)?;
    }

    let report = run_trials(&cfg)?;
    let report = match compare_analytic(report.clone()) {
        Ok(r) => r,
        Err(HarnessError::NoAnalyticModel(spec)) => {
            let mut r = report;
            r.warnings.push(format!("no analytic model for {spec}; predictions omitted"));
            r
        }
        Err(e) => return Err(e.into()),
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let json = report.to_json();
    if let Some(path) = &a.output.out {
        let bytes = if is_csv(path) {
            let mut buf = Vec::new();
            report.write_csv(&mut buf).expect("in-memory write");
            buf
        } else {
            format!("{json}\n").into_bytes()
        };
        write_file(path, &bytes)?;
    }
    emit(&json);
    Ok(0)
}

fn parse_u_list(list: &str) -> Result<Vec<f64>, Failure> {
    let us = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let u: f64 = s
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid u value '{}'", s.trim())))?;
            if u > 0.0 && u <= 1.0 {
                Ok(u)
            } else {
                Err(Failure::Usage(format!("u must lie in (0, 1], got {u}")))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if us.is_empty() {
        return Err(Failure::Usage("--u needs at least one value".into()));
    }
    Ok(us)
}

fn curve(a: CurveArgs) -> Result<i32, Failure> {
    let us = parse_u_list(&a.u)?;
    if a.n == 0 || a.trials == 0 {
        return Err(Failure::Usage("--n and --trials must be >= 1".into()));
    }
    let workers = workers(a.workers)?;
    if let Some(path) = &a.output.out {
        check_writable(path, a.output.force)?;
    }
    let table = curve_sweep(&us, a.n, a.trials, a.seed, workers)?;
    let json = serde_json::to_string_pretty(&table).expect("table serializes");
    if let Some(path) = &a.output.out {
        let bytes = if is_csv(path) {
            let mut buf = Vec::new();
            table.write_csv(&mut buf).expect("in-memory write");
            buf
        } else {
            format!("{json}\n").into_bytes()
        };
        write_file(path, &bytes)?;
    }
    emit(&json);
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<i32, Failure> {
    let opts = VerifyOptions {
        workers: workers(a.workers)?,
        seed: a.seed,
    };
    let results = run_all(&opts, |r| println!("{r}"));
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", CRITERIA.len());
    Ok(if passed == results.len() { 0 } else { 1 })
}
