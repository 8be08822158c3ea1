//! Small numerical helpers: Gaussian tails, quadrature, root bracketing.

use libm::erfc;
use std::f64::consts::SQRT_2;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    q_function(-x)
}

/// Probability that a standard normal variable lies in `[lo, hi]`.
///
/// Computed from whichever tail is smaller so that narrow far-out
/// intervals keep their relative accuracy.
pub fn normal_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo >= 0.0 {
        q_function(lo) - q_function(hi)
    } else if hi <= 0.0 {
        q_function(-hi) - q_function(-lo)
    } else {
        1.0 - q_function(-lo) - q_function(hi)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // Pre-split so that narrow features near the origin are seen.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let mid = 0.5 * (lo + hi);
            let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
            let whole = simpson(flo, fmid, fhi, h);
            adaptive(&f, lo, hi, flo, fmid, fhi, whole, tol / PANELS as f64, 48)
        })
        .sum()
}

fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
    width / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
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
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Expectation of `f(g)` for `g ~ Exp(1)`, i.e. averaged over Rayleigh
/// power gain. Substitutes `g = t²` to remove the square-root behaviour of
/// Gaussian tails near `g = 0`.
pub fn rayleigh_average<F: Fn(f64) -> f64>(f: F) -> f64 {
    // e^{-t^2} is below 1e-31 past t = 8.5.
    integrate(|t| f(t * t) * 2.0 * t * (-t * t).exp(), 0.0, 8.5, 1e-13)
}

/// Bisection for a root of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < tol {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_function_reference_values() {
        assert_eq!(q_function(0.0), 0.5);
        // Q(1), Q(3), Q(5) from standard tables.
        let rel = |x: f64, want: f64| ((q_function(x) - want) / want).abs();
        assert!(rel(1.0, 0.158_655_253_931_457_05) < 1e-13);
        assert!(rel(3.0, 1.349_898_031_630_094_5e-3) < 1e-13);
        assert!(rel(5.0, 2.866_515_718_791_939e-7) < 1e-13);
        assert_eq!(q_function(f64::INFINITY), 0.0);
    }

    #[test]
    fn interval_matches_difference_of_cdfs() {
        for &(a, b) in &[(-1.0, 2.0), (0.5, 4.0), (-6.0, -0.5), (-3.0, 3.0)] {
            let direct = normal_cdf(b) - normal_cdf(a);
            assert!((normal_interval(a, b) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn rayleigh_average_of_exponential_moments() {
        // E[g] = 1, E[g^2] = 2, E[e^{-g}] = 1/2
        assert!((rayleigh_average(|g| g) - 1.0).abs() < 1e-10);
        assert!((rayleigh_average(|g| g * g) - 2.0).abs() < 1e-9);
        assert!((rayleigh_average(|g| (-g).exp()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - SQRT_2).abs() < 1e-12);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-9).is_none());
    }
}
