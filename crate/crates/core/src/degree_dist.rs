//! User-degree laws: the unbounded main law, its truncations, the
//! ε-mass perturbation, the generalized `D_u` family and plain finite laws.
//!
//! Every law is immutable after construction. Finite laws keep a dense pmf
//! table indexed by degree, plus prefix/suffix sums used by the sampler and
//! by [`DegreeDistribution::tail`].

use std::fmt;
use std::str::FromStr;

use rand::distributions::Open01;
use rand::Rng;
use thiserror::Error;

/// Tolerance within which an explicit pmf is silently renormalized.
pub const EXPLICIT_NORMALIZATION_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("unbounded support: {0} has no finite generating polynomial")]
    UnboundedSupport(String),
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
    #[error("probabilities must sum to 1 (got {0})")]
    NotNormalized(f64),
    #[error("cannot parse distribution spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistKind {
    /// `Pr[D = d] = 1/(d(d-1))` for `d >= 2`.
    Main,
    /// Main law with all mass above `delta` moved to degree 0.
    Truncated { delta: usize },
    /// Truncated law with `eps` extra mass moved from degree 0 to `delta`.
    EpsMass { delta: usize, eps: f64 },
    /// Generalized instance for `u` users per ad; `u = 1` is the main law.
    GeneralizedU { u: f64 },
    /// Every user has degree `d`.
    UniformDegree { d: usize },
    /// Arbitrary finite pmf, `pmf[d] = Pr[D = d]`.
    Explicit { pmf: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct DegreeDistribution {
    kind: DistKind,
    cap: Option<usize>,
    /// Dense pmf for finite-support kinds, empty for the main law.
    table: Vec<f64>,
    /// `cdf[d] = Pr[D <= d]`.
    cdf: Vec<f64>,
    /// `tails[d] = Pr[D > d]`, summed from the top for accuracy.
    tails: Vec<f64>,
}

/// Smallest `Δ >= 2` with `u <= 1 - 1/Δ`.
///
/// The comparison carries a 1e-12 slack so that `u = (d-1)/d` typed as a
/// decimal lands on `Δ = d` instead of being pushed past it by rounding.
pub fn du_delta(u: f64) -> usize {
    let mut delta = 2usize;
    while u > 1.0 - 1.0 / delta as f64 + 1e-12 {
        delta += 1;
    }
    delta
}

impl DegreeDistribution {
    pub fn new(kind: DistKind) -> Result<Self, DistError> {
        let table = match &kind {
            DistKind::Main => Vec::new(),
            DistKind::Truncated { delta } => {
                if *delta < 2 {
                    return Err(DistError::InvalidParameter(format!(
                        "truncation degree must be >= 2, got {delta}"
                    )));
                }
                truncated_table(*delta)
            }
            DistKind::EpsMass { delta, eps } => {
                if *delta < 2 {
                    return Err(DistError::InvalidParameter(format!(
                        "ε-mass degree must be >= 2, got {delta}"
                    )));
                }
                let zero_mass = 1.0 / *delta as f64;
                if !eps.is_finite() || *eps < 0.0 || *eps > zero_mass {
                    return Err(DistError::InvalidParameter(format!(
                        "ε must lie in [0, 1/{delta}], got {eps}"
                    )));
                }
                let mut t = truncated_table(*delta);
                t[0] = zero_mass - eps;
                t[*delta] += eps;
                t
            }
            DistKind::GeneralizedU { u } => {
                if !(u.is_finite() && *u > 0.0 && *u <= 1.0) {
                    return Err(DistError::InvalidParameter(format!(
                        "u must lie in (0, 1], got {u}"
                    )));
                }
                if *u >= 1.0 {
                    Vec::new()
                } else {
                    generalized_u_table(*u)
                }
            }
            DistKind::UniformDegree { d } => {
                let mut t = vec![0.0; d + 1];
                t[*d] = 1.0;
                t
            }
            DistKind::Explicit { pmf } => validate_explicit(pmf)?,
        };
        let kind = match kind {
            DistKind::Explicit { .. } => DistKind::Explicit { pmf: table.clone() },
            k => k,
        };
        let mut cdf = Vec::with_capacity(table.len());
        let mut acc = 0.0;
        for p in &table {
            acc += p;
            cdf.push(acc);
        }
        let mut tails = vec![0.0; table.len()];
        let mut above = 0.0;
        for d in (0..table.len()).rev() {
            tails[d] = above;
            above += table[d];
        }
        Ok(Self {
            kind,
            cap: None,
            table,
            cdf,
            tails,
        })
    }

    pub fn main() -> Self {
        Self::new(DistKind::Main).expect("main law is always valid")
    }

    pub fn truncated(delta: usize) -> Result<Self, DistError> {
        Self::new(DistKind::Truncated { delta })
    }

    pub fn eps_mass(delta: usize, eps: f64) -> Result<Self, DistError> {
        Self::new(DistKind::EpsMass { delta, eps })
    }

    pub fn generalized_u(u: f64) -> Result<Self, DistError> {
        Self::new(DistKind::GeneralizedU { u })
    }

    pub fn uniform(d: usize) -> Self {
        Self::new(DistKind::UniformDegree { d }).expect("point mass is always valid")
    }

    pub fn explicit(pmf: Vec<f64>) -> Result<Self, DistError> {
        Self::new(DistKind::Explicit { pmf })
    }

    /// Sets the largest degree the sampler may emit.
    pub fn with_cap(mut self, cap: usize) -> Result<Self, DistError> {
        if cap == 0 {
            return Err(DistError::InvalidParameter("degree cap must be >= 1".into()));
        }
        self.cap = Some(cap);
        Ok(self)
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }

    /// Whether the law has infinite support (the main law, or `D_u` at `u = 1`).
    pub fn is_unbounded(&self) -> bool {
        self.table.is_empty()
    }

    /// Largest degree with positive mass, `None` for unbounded laws.
    pub fn max_degree(&self) -> Option<usize> {
        if self.is_unbounded() {
            return None;
        }
        self.table.iter().rposition(|&p| p > 0.0).or(Some(0))
    }

    /// Dense pmf table of a finite law.
    pub fn coefficients(&self) -> Option<&[f64]> {
        (!self.is_unbounded()).then_some(self.table.as_slice())
    }

    pub fn pmf(&self, d: usize) -> f64 {
        if self.is_unbounded() {
            if d < 2 {
                0.0
            } else {
                let d = d as f64;
                1.0 / (d * (d - 1.0))
            }
        } else {
            self.table.get(d).copied().unwrap_or(0.0)
        }
    }

    /// `Pr[D > d]`.
    pub fn tail(&self, d: usize) -> f64 {
        if self.is_unbounded() {
            if d == 0 {
                1.0
            } else {
                1.0 / d as f64
            }
        } else {
            self.tails.get(d).copied().unwrap_or(0.0)
        }
    }

    /// Inverse-CDF realization of a uniform `(0,1)` draw, clamped to `cap`.
    pub fn degree_from_uniform(&self, uniform: f64, cap: usize) -> usize {
        let raw = match &self.kind {
            DistKind::UniformDegree { d } => *d,
            _ if self.is_unbounded() => {
                let x = (1.0 / (1.0 - uniform)).ceil();
                if x >= cap as f64 {
                    cap
                } else {
                    // 1/(1-U) can round to exactly 1 for U within an ulp of 0.
                    (x as usize).max(2)
                }
            }
            _ => {
                let idx = self.cdf.partition_point(|&c| c <= uniform);
                if idx >= self.cdf.len() {
                    self.max_degree().unwrap_or(0)
                } else {
                    idx
                }
            }
        };
        raw.min(cap)
    }

    /// Draws one degree, clamped to the configured cap or to `default_cap`.
    pub fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R, default_cap: usize) -> usize {
        let cap = self.cap.unwrap_or(default_cap).max(1);
        if let DistKind::UniformDegree { d } = self.kind {
            return d.min(cap);
        }
        let u: f64 = rng.sample(Open01);
        self.degree_from_uniform(u, cap)
    }

    /// `f(x) = Σ z_i x^i`.
    pub fn gen_f(&self, x: f64) -> Result<f64, DistError> {
        let t = self.finite_table()?;
        Ok(t.iter().rev().fold(0.0, |acc, &z| acc * x + z))
    }

    /// `f'(x) = Σ i z_i x^(i-1)`.
    pub fn gen_f_prime(&self, x: f64) -> Result<f64, DistError> {
        let t = self.finite_table()?;
        Ok(t
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &z)| acc * x + i as f64 * z))
    }

    /// Expected degree; `+inf` for the main law.
    pub fn mean_degree(&self) -> f64 {
        if self.is_unbounded() {
            return f64::INFINITY;
        }
        self.table
            .iter()
            .enumerate()
            .map(|(i, &z)| i as f64 * z)
            .sum()
    }

    fn finite_table(&self) -> Result<&[f64], DistError> {
        if self.is_unbounded() {
            Err(DistError::UnboundedSupport(self.to_string()))
        } else {
            Ok(&self.table)
        }
    }
}

fn truncated_table(delta: usize) -> Vec<f64> {
    let mut t = vec![0.0; delta + 1];
    t[0] = 1.0 / delta as f64;
    for (d, slot) in t.iter_mut().enumerate().skip(2) {
        let d = d as f64;
        *slot = 1.0 / (d * (d - 1.0));
    }
    t
}

fn generalized_u_table(u: f64) -> Vec<f64> {
    let delta = du_delta(u);
    let mut t = vec![0.0; delta + 1];
    for (d, slot) in t.iter_mut().enumerate().take(delta).skip(2) {
        let d = d as f64;
        *slot = 1.0 / (u * d * (d - 1.0));
    }
    t[delta] = (1.0 - (1.0 - 1.0 / (delta as f64 - 1.0)) / u).max(0.0);
    t
}

fn validate_explicit(pmf: &[f64]) -> Result<Vec<f64>, DistError> {
    if pmf.is_empty() {
        return Err(DistError::InvalidParameter("explicit pmf is empty".into()));
    }
    if let Some(p) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(DistError::InvalidParameter(format!(
            "probabilities must be finite and nonnegative, got {p}"
        )));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > EXPLICIT_NORMALIZATION_SLACK {
        return Err(DistError::NotNormalized(total));
    }
    let mut out: Vec<f64> = pmf.iter().map(|p| p / total).collect();
    while out.len() > 1 && out.last() == Some(&0.0) {
        out.pop();
    }
    Ok(out)
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DistKind::Main => write!(f, "main"),
            DistKind::Truncated { delta } => write!(f, "trunc:{delta}"),
            DistKind::EpsMass { delta, eps } => write!(f, "epsmass:{delta}:{eps}"),
            DistKind::GeneralizedU { u } => write!(f, "du:{u}"),
            DistKind::UniformDegree { d } => write!(f, "unif:{d}"),
            DistKind::Explicit { pmf } => {
                write!(f, "explicit:")?;
                let mut first = true;
                for (d, p) in pmf.iter().enumerate().filter(|(_, p)| **p > 0.0) {
                    if !first {
                        write!(f, ",")?;
                    }
                    first = false;
                    write!(f, "{d}={p}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DegreeDistribution {
    type Err = DistError;

    /// Grammar: `main`, `trunc:Δ`, `epsmass:Δ:ε`, `du:u`, `unif:d`,
    /// `explicit:d1=p1,d2=p2,...`.
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| DistError::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let int = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(&format!("{what} must be a nonnegative integer")))
        };
        let real = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(&format!("{what} must be a decimal number")))
        };

        let mut parts = spec.splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        let kind = match (head, rest) {
            ("main", None) => DistKind::Main,
            ("trunc", Some(r)) => DistKind::Truncated {
                delta: int(r, "Δ")?,
            },
            ("epsmass", Some(r)) => {
                let (d, e) = r.split_once(':').ok_or_else(|| bad("expected epsmass:Δ:ε"))?;
                DistKind::EpsMass {
                    delta: int(d, "Δ")?,
                    eps: real(e, "ε")?,
                }
            }
            ("du", Some(r)) => DistKind::GeneralizedU { u: real(r, "u")? },
            ("unif", Some(r)) => DistKind::UniformDegree { d: int(r, "d")? },
            ("explicit", Some(r)) => {
                let mut pmf: Vec<f64> = Vec::new();
                let mut seen = std::collections::BTreeSet::new();
                for item in r.split(',') {
                    let (d, p) = item
                        .split_once('=')
                        .ok_or_else(|| bad("expected entries of the form d=p"))?;
                    let d = int(d.trim(), "degree")?;
                    let p = real(p.trim(), "probability")?;
                    if !seen.insert(d) {
                        return Err(bad(&format!("degree {d} listed twice")));
                    }
                    if pmf.len() <= d {
                        pmf.resize(d + 1, 0.0);
                    }
                    pmf[d] = p;
                }
                DistKind::Explicit { pmf }
            }
            _ => return Err(bad("unknown distribution kind")),
        };
        Self::new(kind)
    }
}
