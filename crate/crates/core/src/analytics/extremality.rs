//! Perturbed truncated laws: mass `ε` moved from degree 0 to degree `Δ`
//! lowers the maximum matching below `1 - 1/Δ + ε`.

use super::special::lerch_phi_s1;
use super::AnalyticsError;

/// Returns `(α, ŵ₁)` for the law with `pmf(0) = 1/Δ - ε` and `pmf(Δ)` raised
/// by `ε`, where `α` is the limiting maximum-matching fraction and `ŵ₁`
/// solves `(1-y) Φ(1-y, 1, Δ) = Δ ε`.
pub fn extremality_alpha(delta: usize, eps: f64) -> Result<(f64, f64), AnalyticsError> {
    if delta < 2 {
        return Err(AnalyticsError::Domain(format!("Δ must be >= 2, got {delta}")));
    }
    let d = delta as f64;
    if !(eps > 0.0 && eps <= 1.0 / d) {
        return Err(AnalyticsError::Domain(format!(
            "ε must lie in (0, 1/Δ], got {eps}"
        )));
    }
    let target = d * eps;
    // g(y) = (1-y) Φ(1-y, 1, Δ) decreases from ~ -ln(0)/… to 0 on (0, 1].
    let g = |y: f64| -> Result<f64, AnalyticsError> {
        if y >= 1.0 {
            return Ok(0.0);
        }
        Ok((1.0 - y) * lerch_phi_s1(1.0 - y, delta)?)
    };
    let mut lo = 1e-15;
    let mut hi = 1.0;
    if g(lo)? <= target {
        return Err(AnalyticsError::Domain(format!(
            "ε = {eps} is too small to resolve for Δ = {delta}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    let tail = (1.0 - w).powi(delta as i32 - 1);
    let alpha = 1.0 + eps - 1.0 / d - tail * (eps * (1.0 + (d - 1.0) * w) - (1.0 - w) / d);
    Ok((alpha, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::fixed_point::ConfigModelLaw;
    use crate::analytics::special::psi_leading;
    use crate::degree_dist::DegreeDistribution;

    #[test]
    fn reference_point() {
        let (alpha, w) = extremality_alpha(2, 0.1).unwrap();
        assert!((w - 0.68630166896).abs() < 1e-9, "{w}");
        assert!((alpha - 0.59630431953).abs() < 1e-9, "{alpha}");
    }

    #[test]
    fn strictly_below_perturbed_ceiling() {
        let (alpha, _) = extremality_alpha(2, 0.01).unwrap();
        assert!(alpha < 0.51);
        for delta in 2..=6 {
            for eps in [1e-3, 1e-2, 0.05] {
                let (alpha, _) = extremality_alpha(delta, eps).unwrap();
                assert!(alpha < 1.0 - 1.0 / delta as f64 + eps, "Δ={delta} ε={eps}");
            }
        }
    }

    #[test]
    fn gap_matches_leading_order() {
        let eps = 0.001;
        let (alpha, _) = extremality_alpha(2, eps).unwrap();
        let gap = 0.5 + eps - alpha;
        let psi = psi_leading(2, eps);
        assert!(gap >= 0.5 * psi && gap <= 2.0 * psi, "gap {gap} psi {psi}");
    }

    #[test]
    fn root_approaches_one() {
        let mut prev = 0.0;
        for eps in [1e-3, 1e-4, 1e-5] {
            let (_, w) = extremality_alpha(3, eps).unwrap();
            assert!(w > prev && w < 1.0);
            prev = w;
        }
    }

    #[test]
    fn agrees_with_fixed_point_bounds() {
        let dist = DegreeDistribution::eps_mass(2, 0.1).unwrap();
        let law = ConfigModelLaw::new(&dist, 1.0).unwrap();
        let fp = law.solve(1e-13).unwrap();
        let (alpha, w) = extremality_alpha(2, 0.1).unwrap();
        assert!((fp.w_hat_1 - w).abs() < 1e-8, "{} vs {w}", fp.w_hat_1);
        assert!((law.bounds(&fp).upper_fraction - alpha).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(extremality_alpha(1, 0.1).is_err());
        assert!(extremality_alpha(2, 0.0).is_err());
        assert!(extremality_alpha(2, 0.6).is_err());
    }
}
