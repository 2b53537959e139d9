//! Karp-Sipser yield on configuration models: the `(ŵ₁, w₂)` fixed point
//! and the matching bounds it implies.

use serde::Serialize;

use super::AnalyticsError;
use crate::degree_dist::DegreeDistribution;

pub const MAX_ITERATIONS: usize = 1_000_000;

/// Grid resolution used to locate the first sign change of the composite
/// map after the plain iteration has stalled.
const SCAN_POINTS: usize = 4096;

/// Plain iteration hands over to the scan once changes fall below this,
/// even if the requested tolerance is tighter.
const STALL: f64 = 1e-7;

/// Values of `h(y) - y` above `-SIGN_NOISE` are treated as nonnegative.
const SIGN_NOISE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub w_hat_1: f64,
    pub w_2: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchingBounds {
    pub lower_fraction: f64,
    pub upper_fraction: f64,
}

/// Smallest solution of `ŵ₁ = f̂'(w₂)/μ`, `w₂ = 1 - f'(1-ŵ₁)/μ`.
///
/// Iterates both equations from `(0, 0)`; the iterates increase to the
/// smallest solution. Near a degenerate root the plain iteration crawls, so
/// once successive changes drop below `tol` the limit is pinned down on the
/// composite map `h(y) = f̂'(1 - f'(1-y)/μ)/μ`: the first point past the
/// stalled iterate where `h(y) - y` turns negative is refined by bisection,
/// and if it never turns negative the limit is `ŵ₁ = 1`.
pub fn fixed_point_solve<F, G>(
    f_prime: F,
    f_hat_prime: G,
    mu: f64,
    tol: f64,
) -> Result<FixedPoint, AnalyticsError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(mu.is_finite() && mu > 0.0) {
        return Err(AnalyticsError::Domain(format!("μ must be positive, got {mu}")));
    }
    let mut w1 = 0.0f64;
    let mut w2 = 0.0f64;
    let mut iterations = 0;
    loop {
        let n1 = (f_hat_prime(w2) / mu).min(1.0);
        let n2 = (1.0 - f_prime(1.0 - w1) / mu).max(0.0);
        if n1 < w1 - tol || n2 < w2 - tol {
            return Err(AnalyticsError::MonotonicityViolated { iteration: iterations });
        }
        let change = (n1 - w1).abs().max((n2 - w2).abs());
        w1 = n1.max(w1);
        w2 = n2.max(w2);
        iterations += 1;
        if change < tol.max(STALL) {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(AnalyticsError::NoConvergence {
                iterations,
                change,
            });
        }
    }

    let w2_of = |y: f64| 1.0 - f_prime(1.0 - y) / mu;
    let gap = |y: f64| f_hat_prime(w2_of(y)) / mu - y;
    let y = refine_smallest_root(&gap, w1);
    let w_hat_1 = y;
    let w_2 = w2_of(y).clamp(0.0, 1.0);
    let residual = (w_hat_1 - f_hat_prime(w_2) / mu)
        .abs()
        .max((w_2 - w2_of(w_hat_1)).abs());
    if residual >= 10.0 * tol {
        return Err(AnalyticsError::ResidualTooLarge(residual));
    }
    Ok(FixedPoint {
        w_hat_1,
        w_2,
        iterations,
        residual,
    })
}

fn refine_smallest_root<G: Fn(f64) -> f64>(gap: &G, start: f64) -> f64 {
    if start >= 1.0 || gap(start) < -SIGN_NOISE {
        return start.min(1.0);
    }
    let step = (1.0 - start) / SCAN_POINTS as f64;
    let mut lo = start;
    for k in 1..=SCAN_POINTS {
        let hi = if k == SCAN_POINTS { 1.0 } else { start + step * k as f64 };
        if gap(hi) < -SIGN_NOISE {
            let mut hi = hi;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if gap(mid) < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return lo;
        }
        lo = hi;
    }
    1.0
}

/// `lower = f(1) - f(1-ŵ₁) - f'(1-ŵ₁)ŵ₁`, `upper = f̂(1) - f̂(w₂) + lower`.
pub fn ks_matching_bounds<F, Fh, Fp>(f: F, f_hat: Fh, f_prime: Fp, fp: &FixedPoint) -> MatchingBounds
where
    F: Fn(f64) -> f64,
    Fh: Fn(f64) -> f64,
    Fp: Fn(f64) -> f64,
{
    let y = fp.w_hat_1;
    let lower = f(1.0) - f(1.0 - y) - f_prime(1.0 - y) * y;
    let upper = f_hat(1.0) - f_hat(fp.w_2) + lower;
    MatchingBounds {
        lower_fraction: lower,
        upper_fraction: upper,
    }
}

/// Generating functions of a cuckoo instance with a finite user law and
/// `ratio` users per ad, normalized per ad. Ad degrees are Poisson with mean
/// `μ = ratio · E[D]`.
#[derive(Debug, Clone)]
pub struct ConfigModelLaw {
    coefficients: Vec<f64>,
    ratio: f64,
    mu: f64,
}

impl ConfigModelLaw {
    pub fn new(dist: &DegreeDistribution, ratio: f64) -> Result<Self, AnalyticsError> {
        let coefficients = dist
            .coefficients()
            .ok_or_else(|| AnalyticsError::Dist(crate::degree_dist::DistError::UnboundedSupport(dist.to_string())))?
            .iter()
            .map(|z| z * ratio)
            .collect::<Vec<_>>();
        let mu: f64 = coefficients
            .iter()
            .enumerate()
            .map(|(i, z)| i as f64 * z)
            .sum();
        if mu <= 0.0 {
            return Err(AnalyticsError::Domain(format!(
                "{dist} has no edges; the fixed point is undefined"
            )));
        }
        Ok(Self {
            coefficients,
            ratio,
            mu,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn f(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &z| acc * x + z)
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &z)| acc * x + i as f64 * z)
    }

    pub fn f_hat(&self, x: f64) -> f64 {
        (self.mu * (x - 1.0)).exp()
    }

    pub fn f_hat_prime(&self, x: f64) -> f64 {
        self.mu * (self.mu * (x - 1.0)).exp()
    }

    pub fn solve(&self, tol: f64) -> Result<FixedPoint, AnalyticsError> {
        fixed_point_solve(|x| self.f_prime(x), |x| self.f_hat_prime(x), self.mu, tol)
    }

    /// Bounds as fractions of the ad count.
    pub fn bounds(&self, fp: &FixedPoint) -> MatchingBounds {
        ks_matching_bounds(|x| self.f(x), |x| self.f_hat(x), |x| self.f_prime(x), fp)
    }
}
