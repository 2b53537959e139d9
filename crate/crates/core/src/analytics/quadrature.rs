//! Adaptive Simpson quadrature and a safeguarded secant root finder.

const MAX_DEPTH: u32 = 48;

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Root of a continuous `g` with `g(lo) <= 0 <= g(hi)`, by secant steps that
/// fall back to bisection whenever they leave the bracket or stall.
pub fn bracketed_root<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if g_lo == 0.0 {
        return lo;
    }
    if g_hi == 0.0 {
        return hi;
    }
    debug_assert!(g_lo < 0.0 && g_hi > 0.0, "root not bracketed");
    let mut use_bisection = false;
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        let secant = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        let mid = 0.5 * (lo + hi);
        let x = if use_bisection || !(secant > lo && secant < hi) {
            mid
        } else {
            secant
        };
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        let width = hi - lo;
        if gx < 0.0 {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
            g_hi = gx;
        }
        // Alternate in a bisection whenever the bracket shrank by less than half.
        use_bisection = !use_bisection && (hi - lo) > 0.5 * width;
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = adaptive_simpson(&|x: f64| 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_arctanh_derivative() {
        let b: f64 = 0.9;
        let v = adaptive_simpson(&|x: f64| 1.0 / (1.0 - x * x), 0.0, b, 1e-12);
        assert!((v - b.atanh()).abs() < 1e-10);
    }

    #[test]
    fn finds_roots() {
        let r = bracketed_root(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        let r = bracketed_root(&|x: f64| x.powi(9) - 1e-9, 0.0, 1.0, 1e-15);
        assert!((r - 0.1).abs() < 1e-12);
    }
}
