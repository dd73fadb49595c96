//! Scalar special functions: the Gaussian tail `Q`, its inverse, `erf`/`erfc`,
//! the two incomplete-gamma orders used by the Bussgang constants, and
//! Gauss-Legendre nodes and weights.

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use crate::error::{Error, Result};

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!("probability {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

const SQRT_PI: f64 = 1.772_453_850_905_516;

// Below this magnitude the Maclaurin series converges with bounded cancellation.
const SERIES_LIMIT: f64 = 3.0;

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while n < 200.0 {
        n += 1.0;
        term *= -x2 / n;
        let contrib = term / (2.0 * n + 1.0);
        sum += contrib;
        if contrib.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// Continued fraction for erfc, valid for x > 0 (used only for x >= 3).
/// Modified Lentz evaluation of 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (SQRT_PI * f)
}

pub fn erf(x: f64) -> f64 {
    if x.abs() < SERIES_LIMIT {
        erf_series(x)
    } else if x > 0.0 {
        1.0 - erfc_continued_fraction(x)
    } else {
        erfc_continued_fraction(-x) - 1.0
    }
}

pub fn erfc(x: f64) -> f64 {
    if x.abs() < SERIES_LIMIT {
        1.0 - erf_series(x)
    } else if x > 0.0 {
        erfc_continued_fraction(x)
    } else {
        2.0 - erfc_continued_fraction(-x)
    }
}

/// Standard normal upper tail, `Q(x) = P(Z > x)`.
pub fn q(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Two-exponential approximation of `Q` for positive arguments:
/// `e^(-x²/2)/12 + e^(-2x²/3)/4`.
pub fn q_bar(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("q_bar requires x > 0, got {x}")));
    }
    Ok((-x * x / 2.0).exp() / 12.0 + (-2.0 * x * x / 3.0).exp() / 4.0)
}

/// Inverse of `Q`: returns `x` with `|q(x) - p| <= tol`.
///
/// Bracketed bisection on `[-12, 12]` followed by a Newton polish.
pub fn q_inv(p: Probability, tol: f64) -> Result<f64> {
    let p = p.value();
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::Domain(format!("q_inv requires 0 < p < 1, got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (-12.0_f64, 12.0_f64);
    if p < q(hi) || p > q(lo) {
        return Err(Error::Domain(format!("q_inv: p = {p} outside Q([-12, 12])")));
    }
    // q is decreasing: q(lo) > p > q(hi).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let resid = q(x) - p;
        if resid.abs() <= tol * 1e-3 {
            break;
        }
        let density = (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
        let next = x + resid / density;
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
    }
    if (q(x) - p).abs() > tol {
        // fall back to full bisection
        while hi - lo > f64::EPSILON * 4.0 && (q(x) - p).abs() > tol {
            x = 0.5 * (lo + hi);
            if q(x) > p {
                lo = x;
            } else {
                hi = x;
            }
        }
    }
    Ok(x)
}

/// Upper incomplete gamma `Γ(s, x)` for the two orders `s ∈ {1/2, 1}`.
pub fn inc_gamma(s: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("inc_gamma requires x >= 0, got {x}")));
    }
    if s == 1.0 {
        Ok((-x).exp())
    } else if s == 0.5 {
        Ok(SQRT_PI * erfc(x.sqrt()))
    } else {
        Err(Error::Domain(format!("inc_gamma supports s in {{1/2, 1}}, got {s}")))
    }
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let k = k as f64;
        let next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let dp = nf * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Nodes (ascending) and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Roots are found by Newton iteration seeded with the Chebyshev-angle
/// estimate; weights are `2 / ((1 - x²) P_n'(x)²)`.
pub fn legendre_nodes_weights(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=64).contains(&n) {
        return Err(Error::Domain(format!("Gauss-Legendre order must be in 1..=64, got {n}")));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(q(0.0), 0.5);
    }

    #[test]
    fn q_symmetry() {
        for &x in &[-6.0, -3.3, -1.0, -0.2, 0.0, 0.7, 2.5, 5.0, 8.0] {
            assert!((q(x) + q(-x) - 1.0).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn q_strictly_decreasing() {
        // below about -5.3 the value rounds to 1
        let mut prev = q(-5.0);
        let mut x = -5.0;
        while x < 8.0 {
            x += 0.01;
            let v = q(x);
            assert!(v < prev, "q not decreasing at {x}");
            prev = v;
        }
        assert!(q(-8.0) >= q(-6.0) && q(-8.0) <= 1.0);
    }

    #[test]
    fn erf_odd_and_zero() {
        assert_eq!(erf(0.0), 0.0);
        for &x in &[0.1, 0.9, 2.0, 2.99, 3.0, 3.5, 6.0] {
            assert!((erf(-x) + erf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn erf_continuous_across_series_switch() {
        let below = erf(SERIES_LIMIT - 1e-12);
        let above = erf(SERIES_LIMIT + 1e-12);
        assert!((below - above).abs() < 1e-12);
        let below = erfc(SERIES_LIMIT - 1e-12);
        let above = erfc(SERIES_LIMIT + 1e-12);
        assert!((below - above).abs() / above < 1e-6);
    }

    #[test]
    fn q_bar_values_and_domain() {
        let expected = (-0.5f64).exp() / 12.0 + (-2.0f64 / 3.0).exp() / 4.0;
        assert!((q_bar(1.0).unwrap() - expected).abs() < 1e-15);
        assert!((q_bar(1.0).unwrap() - 0.178899).abs() < 1e-6);
        assert!(q_bar(40.0).unwrap() < 1e-300);
        assert!(q_bar(0.0).is_err());
        assert!(q_bar(-1.0).is_err());
    }

    #[test]
    fn q_bar_tracks_q_on_moderate_arguments() {
        let mut x = 0.5;
        while x <= 4.0 {
            // the worst gap, 0.0234, sits at the left end
            assert!((q_bar(x).unwrap() - q(x)).abs() < 0.024, "x = {x}");
            x += 0.01;
        }
    }

    #[test]
    fn q_inv_domain_and_center() {
        assert_eq!(q_inv(Probability::new(0.5).unwrap(), 1e-12).unwrap(), 0.0);
        assert!(q_inv(Probability::new(0.0).unwrap(), 1e-12).is_err());
        assert!(q_inv(Probability::new(1.0).unwrap(), 1e-12).is_err());
        assert!(Probability::new(1.5).is_err());
    }

    #[test]
    fn q_inv_round_trip() {
        for &x in &[-3.0, -1.0, 0.0, 1.0, 3.0] {
            let p = Probability::new(q(x)).unwrap();
            let back = q_inv(p, 1e-14).unwrap();
            assert!((back - x).abs() < 1e-8, "x = {x}, back = {back}");
        }
        let x = q_inv(Probability::new(0.158655).unwrap(), 1e-12).unwrap();
        assert!((x - 1.0).abs() < 1e-5);
    }

    #[test]
    fn inc_gamma_closed_forms() {
        assert_eq!(inc_gamma(1.0, 0.0).unwrap(), 1.0);
        assert!((inc_gamma(0.5, 0.0).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((inc_gamma(1.0, 2.0).unwrap() - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert!(inc_gamma(2.0, 1.0).is_err());
        assert!(inc_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn legendre_small_orders() {
        let (x, w) = legendre_nodes_weights(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - 2.0).abs() < 1e-15);
        let (x, w) = legendre_nodes_weights(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
        assert!(legendre_nodes_weights(0).is_err());
        assert!(legendre_nodes_weights(65).is_err());
    }

    #[test]
    fn legendre_nodes_sorted_symmetric_positive() {
        for n in 1..=64 {
            let (x, w) = legendre_nodes_weights(n).unwrap();
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n = {n}: sum {total}");
            for i in 0..n {
                assert!(x[i] > -1.0 && x[i] < 1.0);
                assert!(w[i] > 0.0);
                assert!((x[i] + x[n - 1 - i]).abs() < 1e-15);
                if i > 0 {
                    assert!(x[i] > x[i - 1]);
                }
            }
        }
    }
}
