//! Greedy online yield on i.i.d. user laws and the `D_u` competitive-ratio
//! curve.
//!
//! When an `x` fraction of the ads is matched, a user with law `z` finds an
//! unmatched neighbor with probability `q(x) = 1 - Σ z_i x^i`, so matching
//! a `β` fraction of the ads takes `∫_0^β dx/q(x)` users per ad.

use super::quadrature::{adaptive_simpson, bracketed_root};
use super::special::{cr_main, main_greedy_ads_fraction};
use super::AnalyticsError;
use crate::degree_dist::DegreeDistribution;

const QUAD_TOL: f64 = 1e-10;
const ROOT_TOL: f64 = 1e-14;

/// Fraction of ads matched by any greedy online algorithm on a finite user
/// law with `ratio` users per ad.
pub fn greedy_ads_fraction(coefficients: &[f64], ratio: f64) -> Result<f64, AnalyticsError> {
    if !(ratio.is_finite() && ratio >= 0.0) {
        return Err(AnalyticsError::Domain(format!("ratio must be >= 0, got {ratio}")));
    }
    if ratio == 0.0 {
        return Ok(0.0);
    }
    let q = |x: f64| 1.0 - coefficients.iter().rev().fold(0.0, |acc, &z| acc * x + z);
    let integrand = |x: f64| 1.0 / q(x);
    let users_needed = |beta: f64| adaptive_simpson(&integrand, 0.0, beta, QUAD_TOL);

    // q <= 1 - z_0, so β <= ratio·(1 - z_0).
    let z0 = coefficients.first().copied().unwrap_or(1.0);
    if z0 >= 1.0 {
        return Ok(0.0);
    }
    let mut hi = (ratio * (1.0 - z0)).min(1.0);
    if hi >= 1.0 {
        // Walk toward 1 until the bracket closes; q may vanish at x = 1.
        let mut k = 1;
        hi = 0.5;
        while users_needed(hi) < ratio {
            k += 1;
            if k > 45 {
                return Ok(1.0);
            }
            hi = 1.0 - 0.5f64.powi(k);
        }
    } else if users_needed(hi) < ratio {
        return Ok(hi);
    }
    Ok(bracketed_root(&|b| users_needed(b) - ratio, 0.0, hi, ROOT_TOL))
}

/// Competitive ratio of greedy on the `D_u` instance: matched users over
/// the quasi-complete optimum `u·n`.
pub fn cr_du(u: f64) -> Result<f64, AnalyticsError> {
    if !(u.is_finite() && u > 0.0 && u <= 1.0) {
        return Err(AnalyticsError::Domain(format!("u must lie in (0, 1], got {u}")));
    }
    if u == 1.0 {
        return Ok(cr_main());
    }
    let dist = DegreeDistribution::generalized_u(u)?;
    let coefficients = dist.coefficients().expect("u < 1 has finite support");
    Ok(greedy_ads_fraction(coefficients, u)? / u)
}

/// Greedy prediction as a fraction of `min(n_users, n_ads)`.
pub fn greedy_prediction(dist: &DegreeDistribution, ratio: f64) -> Result<f64, AnalyticsError> {
    let ads = match dist.coefficients() {
        None => main_greedy_ads_fraction(ratio),
        Some(c) => greedy_ads_fraction(c, ratio)?,
    };
    Ok(ads / ratio.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::quadrature::adaptive_simpson;

    #[test]
    fn cr_du_closed_form_region() {
        for u in [0.1, 0.25, 0.4, 0.5] {
            let v = cr_du(u).unwrap();
            assert!((v - u.tanh() / u).abs() < 1e-9, "u={u}: {v}");
        }
        assert!((cr_du(0.5).unwrap() - 0.924234).abs() < 1e-6);
    }

    #[test]
    fn cr_du_at_one() {
        assert!((cr_du(1.0).unwrap() - 0.8206259).abs() < 1e-7);
        assert!(cr_du(0.0).is_err());
        assert!(cr_du(1.01).is_err());
    }

    #[test]
    fn cr_du_dominates_main_bound() {
        for k in 1..=9 {
            let u = k as f64 / 10.0;
            assert!(cr_du(u).unwrap() >= cr_main() + (1.0 - u) / 500.0, "u={u}");
        }
    }

    #[test]
    fn cr_du_continuous_at_breakpoints() {
        for u in [0.5, 2.0 / 3.0, 0.75] {
            let a = cr_du(u - 1e-6).unwrap();
            let b = cr_du(u + 1e-6).unwrap();
            assert!((a - b).abs() <= 1e-3, "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn greedy_solution_satisfies_integral() {
        // Independent check: integrate 1/q to the returned β directly.
        let dist = DegreeDistribution::generalized_u(0.8).unwrap();
        let c = dist.coefficients().unwrap().to_vec();
        let beta = greedy_ads_fraction(&c, 0.8).unwrap();
        let q = |x: f64| 1.0 - c.iter().enumerate().map(|(i, z)| z * x.powi(i as i32)).sum::<f64>();
        let users = adaptive_simpson(&|x| 1.0 / q(x), 0.0, beta, 1e-12);
        assert!((users - 0.8).abs() < 1e-9);
    }

    #[test]
    fn degree_two_equal_sides_is_tanh_one() {
        let v = greedy_prediction(&DegreeDistribution::uniform(2), 1.0).unwrap();
        assert!((v - 1f64.tanh()).abs() < 1e-9);
    }

    #[test]
    fn degree_one_equal_sides() {
        // 1/(1-x) integrates to -ln(1-β) = 1.
        let v = greedy_prediction(&DegreeDistribution::uniform(1), 1.0).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn zero_mass_users() {
        // q = (1-x²)/2, so 2·artanh(β) = ratio.
        let d = DegreeDistribution::explicit(vec![0.5, 0.0, 0.5]).unwrap();
        let v = greedy_prediction(&d, 10.0).unwrap();
        assert!((v - 5f64.tanh()).abs() < 1e-9);
        let d = DegreeDistribution::explicit(vec![0.5, 1.0 / 6.0, 1.0 / 3.0]).unwrap();
        assert!(greedy_prediction(&d, 0.1).unwrap() <= 1.0);
        assert_eq!(greedy_prediction(&DegreeDistribution::uniform(0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn main_law_prediction() {
        let v = greedy_prediction(&DegreeDistribution::main(), 1.0).unwrap();
        assert!((v - cr_main()).abs() < 1e-15);
    }
}
