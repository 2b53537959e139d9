//! Closed-form quantities: availability function, arrival integral,
//! harmonic numbers, Poisson masses, Lerch Φ(z, 1, α) and Lambert W₀.

use std::f64::consts::E;

use super::AnalyticsError;

/// Probability that a fresh main-law user still sees an unmatched ad when
/// an `x` fraction of the ads is matched: `(1-x)(1-ln(1-x))`.
pub fn q_availability(x: f64) -> Result<f64, AnalyticsError> {
    if !(0.0..1.0).contains(&x) {
        return Err(AnalyticsError::Domain(format!(
            "availability needs 0 <= x < 1, got {x}"
        )));
    }
    Ok((1.0 - x) * (1.0 - (-x).ln_1p()))
}

/// `ln(1 - ln(1-a)) = ∫_0^a dx / q(x)`.
pub fn arrival_integral(a: f64) -> Result<f64, AnalyticsError> {
    if !(0.0..1.0).contains(&a) {
        return Err(AnalyticsError::Domain(format!(
            "arrival integral needs 0 <= a < 1, got {a}"
        )));
    }
    Ok((-(-a).ln_1p()).ln_1p())
}

/// `1 - e/e^e`.
pub fn cr_main() -> f64 {
    -(1.0 - E).exp_m1()
}

/// Fraction of ads matched by greedy on the main law with `ratio` users per
/// ad: the `a` solving `arrival_integral(a) = ratio`.
pub fn main_greedy_ads_fraction(ratio: f64) -> f64 {
    -(1.0 - ratio.exp()).exp_m1()
}

pub fn harmonic(k: usize) -> f64 {
    (1..=k).rev().map(|i| 1.0 / i as f64).sum()
}

/// `λ^i e^{-λ} / i!`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, i: usize) -> f64 {
    if lambda == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=i).map(|k| (k as f64).ln()).sum();
    (i as f64 * lambda.ln() - lambda - ln_fact).exp()
}

/// Lerch transcendent at `s = 1`: `Φ(z, 1, α) = Σ_{k>=0} z^k / (k + α)`.
///
/// Uses the identity `z^α Φ = -ln(1-z) - Σ_{i<α} z^i/i` when it is well
/// conditioned, and the direct series otherwise.
pub fn lerch_phi_s1(z: f64, alpha: usize) -> Result<f64, AnalyticsError> {
    if !(0.0..1.0).contains(&z) {
        return Err(AnalyticsError::Domain(format!(
            "Lerch Φ(z,1,α) needs 0 <= z < 1, got z = {z}"
        )));
    }
    if alpha == 0 {
        return Err(AnalyticsError::Domain("Lerch Φ(z,1,α) needs α >= 1".into()));
    }
    let a = alpha as f64;
    let za = z.powi(alpha as i32);
    let log_term = -(-z).ln_1p();
    // Relative error the identity would suffer from cancellation.
    let identity_err = f64::EPSILON * log_term * a / za;
    if z < 0.5 || identity_err > 1e-13 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut zk = 1.0;
        for k in 0.. {
            let term = zk / (k as f64 + a);
            neumaier_add(&mut sum, &mut comp, term);
            if term <= 1e-18 * sum || k > 50_000_000 {
                break;
            }
            zk *= z;
        }
        return Ok(sum + comp);
    }
    let mut sum = log_term;
    let mut comp = 0.0;
    let mut zi = 1.0;
    for i in 1..alpha {
        zi *= z;
        neumaier_add(&mut sum, &mut comp, -zi / i as f64);
    }
    Ok((sum + comp) / za)
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Principal branch of Lambert W on `[-1/e, ∞)`, by damped Halley steps.
pub fn lambert_w0(x: f64) -> Result<f64, AnalyticsError> {
    let branch = -(-1.0f64).exp();
    if !x.is_finite() || x < branch {
        return Err(AnalyticsError::Domain(format!(
            "Lambert W₀ needs x >= -1/e, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - 0.15 * x.ln_1p())
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    if w <= -1.0 {
        return Ok(-1.0);
    }
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let mut next = w - step;
        // Stay on the principal branch.
        if next <= -1.0 {
            next = 0.5 * (w - 1.0);
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// `(tanh 1, 1 + W/2 + W²/4)` with `W = W₀(-2e^{-2})`: greedy and maximum
/// matching fractions for users of degree exactly 2.
pub fn degree2_benchmarks() -> Result<(f64, f64), AnalyticsError> {
    let w = lambert_w0(-2.0 * (-2.0f64).exp())?;
    Ok((1.0f64.tanh(), 1.0 + w / 2.0 + w * w / 4.0))
}

/// Leading term `Δ^{2Δ} ε^{Δ+1} / (Δ+1)` of the extremality gap.
pub fn psi_leading(delta: usize, eps: f64) -> f64 {
    let d = delta as f64;
    (2.0 * d * d.ln() + (d + 1.0) * eps.ln()).exp() / (d + 1.0)
}
