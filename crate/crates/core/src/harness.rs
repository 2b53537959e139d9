//! Seeded Monte Carlo experiments over cuckoo instances, comparison with
//! the analytic predictions, the exhaustive coupling check and the `D_u`
//! curve sweep.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytics::{
    cr_du, extremality_alpha, greedy_prediction, poisson_pmf, AnalyticsError, ConfigModelLaw,
};
use crate::degree_dist::{DegreeDistribution, DistError, DistKind};
use crate::graph_gen::{config_model_from_pairing, sample_cuckoo, BipartiteMultigraph, DegreeSequence, GraphError};
use crate::matching::{greedy_online, hopcroft_karp, karp_sipser_phase1, ranking, Matching};
use crate::num_format::{self, sig17};

/// User count above which the maximum-matching oracle triggers a warning.
pub const ORACLE_WARN_USERS: usize = 1_000_000;

const STREAM_GRAPH: u64 = 0;
const STREAM_GREEDY: u64 = 1;
const STREAM_RANKING: u64 = 2;

const FIXED_POINT_TOL: f64 = 1e-12;

pub const CSV_HEADER: &str =
    "trial,n_users,n_ads,edges,greedy,ranking,karp_sipser,ks_upper,max_matching,ms_greedy,ms_ranking,ms_ks,ms_max";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no analytic model for {0}")]
    NoAnalyticModel(String),
    #[error("trial {trial}: {detail}")]
    Sanity { trial: usize, detail: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Greedy,
    Ranking,
    KarpSipser,
    MaxMatching,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Greedy,
        Algorithm::Ranking,
        Algorithm::KarpSipser,
        Algorithm::MaxMatching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Ranking => "ranking",
            Algorithm::KarpSipser => "karp_sipser",
            Algorithm::MaxMatching => "max_matching",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "greedy" => Ok(Algorithm::Greedy),
            "ranking" => Ok(Algorithm::Ranking),
            "karp_sipser" | "ks" => Ok(Algorithm::KarpSipser),
            "max_matching" | "max" => Ok(Algorithm::MaxMatching),
            other => Err(HarnessError::InvalidConfig(format!(
                "unknown algorithm '{other}' (expected greedy, ranking, karp_sipser, max_matching)"
            ))),
        }
    }
}

/// Comma-separated algorithm list, deduplicated into canonical order.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>, HarnessError> {
    let mut algs = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Algorithm>, _>>()?;
    algs.sort_unstable();
    algs.dedup();
    if algs.is_empty() {
        return Err(HarnessError::InvalidConfig("algorithm list is empty".into()));
    }
    Ok(algs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dist_spec: String,
    /// Degree cap; `None` clamps unbounded laws at `n_ads`.
    pub cap: Option<usize>,
    pub n_users: usize,
    pub n_ads: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    #[serde(skip)]
    pub workers: usize,
    /// Record wall times; off by default so that output is reproducible.
    #[serde(skip)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(dist_spec: impl Into<String>, n_users: usize, n_ads: usize) -> Self {
        Self {
            dist_spec: dist_spec.into(),
            cap: None,
            n_users,
            n_ads,
            trials: 5,
            master_seed: 42,
            algorithms: vec![Algorithm::Greedy, Algorithm::MaxMatching],
            workers: default_workers(),
            timing: false,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_algorithms(mut self, algorithms: &[Algorithm]) -> Self {
        self.algorithms = algorithms.to_vec();
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Checks the invariants and parses the distribution.
    pub fn validate(&self) -> Result<DegreeDistribution, HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidConfig("trials must be >= 1".into()));
        }
        if self.n_ads == 0 {
            return Err(HarnessError::InvalidConfig("n_ads must be >= 1".into()));
        }
        if self.n_users == 0 {
            return Err(HarnessError::InvalidConfig("n_users must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::InvalidConfig("algorithm list is empty".into()));
        }
        if self.workers == 0 {
            return Err(HarnessError::InvalidConfig("workers must be >= 1".into()));
        }
        let dist: DegreeDistribution = self.dist_spec.parse()?;
        Ok(match self.cap {
            Some(c) => dist.with_cap(c)?,
            None => dist,
        })
    }

    pub fn denominator(&self) -> usize {
        self.n_users.min(self.n_ads)
    }

    fn runs(&self, alg: Algorithm) -> bool {
        self.algorithms.contains(&alg)
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Independent stream for one purpose within one trial.
pub fn trial_rng(master_seed: u64, trial: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((trial as u64) << 3) | purpose);
    rng
}

/// The instance sampled for `trial`.
pub fn trial_graph(
    cfg: &ExperimentConfig,
    dist: &DegreeDistribution,
    trial: usize,
) -> Result<BipartiteMultigraph, HarnessError> {
    let mut rng = trial_rng(cfg.master_seed, trial, STREAM_GRAPH);
    Ok(sample_cuckoo(cfg.n_users, cfg.n_ads, dist, &mut rng)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub n_users: usize,
    pub n_ads: usize,
    pub edges: usize,
    pub greedy_size: Option<usize>,
    pub ranking_size: Option<usize>,
    pub ks_size: Option<usize>,
    pub ks_upper_bound: Option<usize>,
    pub max_size: Option<usize>,
    #[serde(serialize_with = "num_format::ser_opt")]
    pub ms_greedy: Option<f64>,
    #[serde(serialize_with = "num_format::ser_opt")]
    pub ms_ranking: Option<f64>,
    #[serde(serialize_with = "num_format::ser_opt")]
    pub ms_ks: Option<f64>,
    #[serde(serialize_with = "num_format::ser_opt")]
    pub ms_max: Option<f64>,
}

impl TrialRecord {
    pub fn size(&self, metric: &str) -> Option<usize> {
        match metric {
            "greedy" => self.greedy_size,
            "ranking" => self.ranking_size,
            "karp_sipser" => self.ks_size,
            "ks_upper" => self.ks_upper_bound,
            "max_matching" => self.max_size,
            _ => None,
        }
    }

    fn csv_row(&self) -> String {
        let int = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        let real = |x: Option<f64>| x.map(sig17).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trial_index,
            self.n_users,
            self.n_ads,
            self.edges,
            int(self.greedy_size),
            int(self.ranking_size),
            int(self.ks_size),
            int(self.ks_upper_bound),
            int(self.max_size),
            real(self.ms_greedy),
            real(self.ms_ranking),
            real(self.ms_ks),
            real(self.ms_max),
        )
    }
}

fn timed<T>(on: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let out = f();
    (out, on.then(|| start.elapsed().as_secs_f64() * 1e3))
}

fn run_trial(
    cfg: &ExperimentConfig,
    dist: &DegreeDistribution,
    trial: usize,
) -> Result<TrialRecord, HarnessError> {
    let g = trial_graph(cfg, dist, trial)?;
    let sanity = |detail: String| HarnessError::Sanity { trial, detail };
    let check = |name: &str, m: &Matching| {
        m.validate(&g)
            .map_err(|e| sanity(format!("{name} returned an invalid matching: {e}")))
    };
    let mut rec = TrialRecord {
        trial_index: trial,
        n_users: g.n_users(),
        n_ads: g.n_ads(),
        edges: g.n_edges(),
        greedy_size: None,
        ranking_size: None,
        ks_size: None,
        ks_upper_bound: None,
        max_size: None,
        ms_greedy: None,
        ms_ranking: None,
        ms_ks: None,
        ms_max: None,
    };
    if cfg.runs(Algorithm::Greedy) {
        let mut rng = trial_rng(cfg.master_seed, trial, STREAM_GREEDY);
        let (m, ms) = timed(cfg.timing, || greedy_online(&g, &mut rng));
        check("greedy", &m)?;
        rec.greedy_size = Some(m.size());
        rec.ms_greedy = ms;
    }
    if cfg.runs(Algorithm::Ranking) {
        let mut rng = trial_rng(cfg.master_seed, trial, STREAM_RANKING);
        let (m, ms) = timed(cfg.timing, || ranking(&g, &mut rng));
        check("ranking", &m)?;
        rec.ranking_size = Some(m.size());
        rec.ms_ranking = ms;
    }
    if cfg.runs(Algorithm::KarpSipser) {
        let (ks, ms) = timed(cfg.timing, || karp_sipser_phase1(&g));
        check("karp_sipser", &ks.partial)?;
        rec.ks_size = Some(ks.partial.size());
        rec.ks_upper_bound = Some(ks.upper_bound());
        rec.ms_ks = ms;
    }
    if cfg.runs(Algorithm::MaxMatching) {
        let (m, ms) = timed(cfg.timing, || hopcroft_karp(&g));
        check("max_matching", &m)?;
        rec.max_size = Some(m.size());
        rec.ms_max = ms;
    }

    if let Some(max) = rec.max_size {
        for (name, size) in [
            ("greedy", rec.greedy_size),
            ("ranking", rec.ranking_size),
            ("karp_sipser", rec.ks_size),
        ] {
            if let Some(s) = size.filter(|&s| s > max) {
                return Err(sanity(format!("{name} size {s} exceeds maximum {max}")));
            }
        }
        if let Some(ub) = rec.ks_upper_bound.filter(|&ub| max > ub) {
            return Err(sanity(format!("maximum {max} exceeds Karp-Sipser bound {ub}")));
        }
    }
    Ok(rec)
}

/// Analytic value attached to a metric, as a fraction of `min(n_users, n_ads)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub source: String,
    #[serde(serialize_with = "num_format::ser")]
    pub point: f64,
    #[serde(serialize_with = "num_format::ser_opt")]
    pub lower: Option<f64>,
    #[serde(serialize_with = "num_format::ser_opt")]
    pub upper: Option<f64>,
}

impl Prediction {
    fn point(source: &str, point: f64) -> Self {
        Self {
            source: source.into(),
            point,
            lower: None,
            upper: None,
        }
    }

    /// Whether `x` lies in the stated interval; open ends are unbounded.
    pub fn admits(&self, x: f64) -> bool {
        self.lower.is_none_or(|l| x >= l) && self.upper.is_none_or(|u| x <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: String,
    pub samples: usize,
    #[serde(serialize_with = "num_format::ser")]
    pub mean: f64,
    #[serde(serialize_with = "num_format::ser")]
    pub std_dev: f64,
    #[serde(serialize_with = "num_format::ser")]
    pub median: f64,
    #[serde(serialize_with = "num_format::ser")]
    pub min: f64,
    #[serde(serialize_with = "num_format::ser")]
    pub max: f64,
    pub prediction: Option<Prediction>,
    #[serde(serialize_with = "num_format::ser_opt")]
    pub delta: Option<f64>,
}

impl MetricSummary {
    fn from_fractions(metric: &str, xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std_dev = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        Self {
            metric: metric.into(),
            samples: xs.len(),
            mean,
            std_dev,
            median,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            prediction: None,
            delta: None,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.samples as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub denominator: usize,
    pub metrics: Vec<MetricSummary>,
    pub warnings: Vec<String>,
    pub records: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    /// Per-trial sizes of `metric` divided by `min(n_users, n_ads)`.
    pub fn fractions(&self, metric: &str) -> Vec<f64> {
        let d = self.denominator as f64;
        self.records
            .iter()
            .filter_map(|r| r.size(metric))
            .map(|s| s as f64 / d)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))
}

/// Runs every trial and aggregates the matched fractions.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let dist = cfg.validate()?;
    let mut warnings = Vec::new();
    if cfg.runs(Algorithm::MaxMatching) && cfg.n_users > ORACLE_WARN_USERS {
        warnings.push(format!(
            "oracle too slow: max_matching with {} users may take a long time",
            cfg.n_users
        ));
    }
    let pool = build_pool(cfg.workers)?;
    let records = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, &dist, t))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut report = ExperimentReport {
        config: cfg.clone(),
        denominator: cfg.denominator(),
        metrics: Vec::new(),
        warnings,
        records,
    };
    for name in ["greedy", "ranking", "karp_sipser", "ks_upper", "max_matching"] {
        let xs = report.fractions(name);
        if !xs.is_empty() {
            report.metrics.push(MetricSummary::from_fractions(name, &xs));
        }
    }
    for name in ["greedy", "ranking"] {
        let ratios: Vec<f64> = report
            .records
            .iter()
            .filter_map(|r| match (r.size(name), r.max_size) {
                (Some(_), Some(0)) => Some(1.0),
                (Some(s), Some(m)) => Some(s as f64 / m as f64),
                _ => None,
            })
            .collect();
        if !ratios.is_empty() {
            report
                .metrics
                .push(MetricSummary::from_fractions(&format!("{name}_over_max"), &ratios));
        }
    }
    Ok(report)
}

/// Analytic predictions for a cuckoo instance with the given side sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predictions {
    pub greedy: Prediction,
    pub karp_sipser: Option<Prediction>,
    pub max_matching: Prediction,
}

pub fn predictions(
    dist: &DegreeDistribution,
    n_users: usize,
    n_ads: usize,
) -> Result<Predictions, HarnessError> {
    if matches!(dist.kind(), DistKind::Explicit { .. }) {
        return Err(HarnessError::NoAnalyticModel(dist.to_string()));
    }
    predictions_at_ratio(dist, n_users as f64 / n_ads as f64)
}

/// Predictions for `ratio` users per ad, for any law including explicit
/// ones. The extremality interval applies at ratio 1 and the quasi-complete
/// value for `D_u` at ratio `u`.
pub fn predictions_at_ratio(dist: &DegreeDistribution, ratio: f64) -> Result<Predictions, HarnessError> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(HarnessError::InvalidConfig(format!("ratio must be positive, got {ratio}")));
    }
    let scale = ratio.min(1.0);
    let greedy = Prediction::point("greedy_online", greedy_prediction(dist, ratio)?);
    if dist.is_unbounded() {
        return Ok(Predictions {
            greedy,
            karp_sipser: None,
            max_matching: Prediction::point("quasi_complete", 1.0),
        });
    }
    let law = ConfigModelLaw::new(dist, ratio)?;
    let fp = law.solve(FIXED_POINT_TOL)?;
    let bounds = law.bounds(&fp);
    let lower = bounds.lower_fraction / scale;
    let upper = bounds.upper_fraction / scale;
    let ks = Prediction {
        source: "ks_lower_bound".into(),
        point: lower,
        lower: Some(lower),
        upper: None,
    };
    let max_matching = match *dist.kind() {
        DistKind::EpsMass { delta, eps } if ratio == 1.0 => {
            let (alpha, _) = extremality_alpha(delta, eps)?;
            Prediction {
                source: "extremality_alpha".into(),
                point: alpha,
                lower: Some(alpha - 0.02),
                upper: Some(alpha + 0.01),
            }
        }
        DistKind::GeneralizedU { u } if (ratio - u).abs() <= 1e-3 => Prediction::point("quasi_complete", 1.0),
        _ => Prediction {
            source: "ks_bounds".into(),
            point: upper,
            lower: Some(lower),
            upper: Some(upper),
        },
    };
    Ok(Predictions {
        greedy,
        karp_sipser: Some(ks),
        max_matching,
    })
}

/// Attaches predictions and `mean - point` deltas to every metric that has one.
pub fn compare_analytic(mut report: ExperimentReport) -> Result<ExperimentReport, HarnessError> {
    let dist: DegreeDistribution = report.config.dist_spec.parse()?;
    let p = predictions(&dist, report.config.n_users, report.config.n_ads)?;
    for m in &mut report.metrics {
        let pred = match m.metric.as_str() {
            "greedy" | "ranking" => Some(p.greedy.clone()),
            "karp_sipser" => p.karp_sipser.clone(),
            "max_matching" => Some(p.max_matching.clone()),
            _ => None,
        };
        m.delta = pred.as_ref().map(|p| m.mean - p.point);
        m.prediction = pred;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingCase {
    pub ad_degrees: Vec<usize>,
    pub cuckoo_outcomes: usize,
    #[serde(serialize_with = "num_format::ser")]
    pub cuckoo_mass: f64,
    pub pairings: usize,
    #[serde(serialize_with = "num_format::ser")]
    pub tv_distance: f64,
}

/// User neighbor multisets; the graph identity used by the coupling check.
type GraphKey = Vec<Vec<u32>>;

fn graph_key(g: &BipartiteMultigraph) -> GraphKey {
    (0..g.n_users())
        .map(|u| {
            let mut n = g.neighbors(u).to_vec();
            n.sort_unstable();
            n
        })
        .collect()
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    // Heap's algorithm.
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn tv_distance(a: &BTreeMap<GraphKey, usize>, b: &BTreeMap<GraphKey, usize>) -> f64 {
    let ta: usize = a.values().sum();
    let tb: usize = b.values().sum();
    let keys: std::collections::BTreeSet<&GraphKey> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let pa = a.get(k).copied().unwrap_or(0) as f64 / ta as f64;
            let pb = b.get(k).copied().unwrap_or(0) as f64 / tb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

/// Exhaustive comparison, for 3 users of degrees (1, 2, 1) and 3 ads, of
/// cuckoo outcomes conditioned on each reachable ad-degree sequence
/// against uniform configuration-model pairings with that sequence.
pub fn coupling_enumeration() -> Vec<CouplingCase> {
    let user_degrees = vec![1usize, 2, 1];
    let n_ads = 3usize;
    let points: usize = user_degrees.iter().sum();

    let mut cuckoo: BTreeMap<Vec<usize>, BTreeMap<GraphKey, usize>> = BTreeMap::new();
    let total = n_ads.pow(points as u32);
    for code in 0..total {
        let choices: Vec<usize> = (0..points).map(|k| code / n_ads.pow(k as u32) % n_ads).collect();
        let mut ad_degrees = vec![0usize; n_ads];
        for &a in &choices {
            ad_degrees[a] += 1;
        }
        let mut at = 0;
        let adjacency: Vec<Vec<usize>> = user_degrees
            .iter()
            .map(|&d| {
                let list = choices[at..at + d].to_vec();
                at += d;
                list
            })
            .collect();
        let g = BipartiteMultigraph::from_adjacency(n_ads, adjacency).expect("ads in range");
        *cuckoo.entry(ad_degrees).or_default().entry(graph_key(&g)).or_default() += 1;
    }

    cuckoo
        .into_iter()
        .map(|(ad_degrees, cuckoo_law)| {
            let seq = DegreeSequence {
                user_degrees: user_degrees.clone(),
                ad_degrees: ad_degrees.clone(),
            };
            let mut config_law: BTreeMap<GraphKey, usize> = BTreeMap::new();
            let mut pairings = 0;
            for_each_permutation(points, |p| {
                let g = config_model_from_pairing(&seq, p).expect("valid pairing");
                *config_law.entry(graph_key(&g)).or_default() += 1;
                pairings += 1;
            });
            let outcomes: usize = cuckoo_law.values().sum();
            let cuckoo_mass = cuckoo_law.values().map(|&c| c as f64 / outcomes as f64).sum();
            CouplingCase {
                tv_distance: tv_distance(&cuckoo_law, &config_law),
                ad_degrees,
                cuckoo_outcomes: outcomes,
                cuckoo_mass,
                pairings,
            }
        })
        .collect()
}

/// Largest total-variation distance over all ad-degree sequences.
pub fn coupling_enumeration_test() -> f64 {
    coupling_enumeration()
        .iter()
        .map(|c| c.tv_distance)
        .fold(0.0, f64::max)
}

/// Total-variation distance between the ad-degree histogram of `g` and
/// Poisson(`lambda`).
pub fn ad_degree_poisson_tv(g: &BipartiteMultigraph, lambda: f64) -> f64 {
    let (_, ads) = g.degree_histogram();
    let n = g.n_ads() as f64;
    let top = ads.keys().next_back().copied().unwrap_or(0);
    let mut covered = 0.0;
    let mut tv = 0.0;
    for i in 0..=top {
        let p = poisson_pmf(lambda, i);
        covered += p;
        let emp = ads.get(&i).copied().unwrap_or(0) as f64 / n;
        tv += (emp - p).abs();
    }
    0.5 * (tv + (1.0 - covered).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    #[serde(serialize_with = "num_format::ser")]
    pub u: f64,
    pub n_users: usize,
    pub n_ads: usize,
    #[serde(serialize_with = "num_format::ser")]
    pub analytic: f64,
    #[serde(serialize_with = "num_format::ser")]
    pub empirical: f64,
    #[serde(serialize_with = "num_format::ser")]
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
    #[serde(serialize_with = "num_format::ser")]
    pub analytic_argmin_u: f64,
    #[serde(serialize_with = "num_format::ser")]
    pub empirical_argmin_u: f64,
    /// Whether the analytic minimum over the sweep sits at `u = 1`.
    pub min_at_one: bool,
}

impl CurveTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "u,n_users,n_ads,analytic,empirical,delta")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                sig17(r.u),
                r.n_users,
                r.n_ads,
                sig17(r.analytic),
                sig17(r.empirical),
                sig17(r.delta)
            )?;
        }
        Ok(())
    }
}

/// Greedy on `D_u` with `⌈u·n⌉` users and `n` ads, against `cr_du(u)`.
pub fn curve_sweep(
    u_values: &[f64],
    n: usize,
    trials: usize,
    master_seed: u64,
    workers: usize,
) -> Result<CurveTable, HarnessError> {
    if u_values.is_empty() {
        return Err(HarnessError::InvalidConfig("no u values given".into()));
    }
    let mut rows = Vec::with_capacity(u_values.len());
    for &u in u_values {
        if !(u > 0.0 && u <= 1.0) {
            return Err(HarnessError::InvalidConfig(format!("u must lie in (0, 1], got {u}")));
        }
        let dist = DegreeDistribution::generalized_u(u)?;
        let n_users = ((u * n as f64).ceil() as usize).max(1);
        let cfg = ExperimentConfig::new(dist.to_string(), n_users, n)
            .with_trials(trials)
            .with_seed(master_seed)
            .with_algorithms(&[Algorithm::Greedy])
            .with_workers(workers);
        let report = run_trials(&cfg)?;
        let empirical = report.metric("greedy").expect("greedy ran").mean;
        let analytic = cr_du(u)?;
        rows.push(CurveRow {
            u,
            n_users,
            n_ads: n,
            analytic,
            empirical,
            delta: empirical - analytic,
        });
    }
    let argmin = |key: fn(&CurveRow) -> f64| {
        rows.iter()
            .min_by(|a, b| key(a).total_cmp(&key(b)))
            .map(|r| r.u)
            .expect("rows nonempty")
    };
    let analytic_argmin_u = argmin(|r| r.analytic);
    let empirical_argmin_u = argmin(|r| r.empirical);
    Ok(CurveTable {
        min_at_one: analytic_argmin_u == 1.0,
        analytic_argmin_u,
        empirical_argmin_u,
        rows,
    })
}
