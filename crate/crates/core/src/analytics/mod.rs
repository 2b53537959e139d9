//! Analytic predictions for greedy, Karp-Sipser and maximum matchings.

pub mod extremality;
pub mod fixed_point;
pub mod online;
pub mod quadrature;
pub mod special;

use thiserror::Error;

use crate::degree_dist::DistError;

pub use extremality::extremality_alpha;
pub use fixed_point::{fixed_point_solve, ks_matching_bounds, ConfigModelLaw, FixedPoint, MatchingBounds};
pub use online::{cr_du, greedy_ads_fraction, greedy_prediction};
pub use special::{
    arrival_integral, cr_main, degree2_benchmarks, harmonic, lambert_w0, lerch_phi_s1, poisson_pmf,
    psi_leading, q_availability,
};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("fixed point did not converge after {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("fixed-point iterates decreased at iteration {iteration}")]
    MonotonicityViolated { iteration: usize },
    #[error("fixed-point residual {0:e} exceeds tolerance")]
    ResidualTooLarge(f64),
    #[error(transparent)]
    Dist(#[from] DistError),
}
