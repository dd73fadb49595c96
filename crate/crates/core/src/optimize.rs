//! Derivative-free scalar search and projected gradient descent.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a scalar or two-variable minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<X> {
    pub x: X,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when
/// the bracket is narrower than `tol`. Non-finite values count as `+∞`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Minimum<f64> {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let mut iterations = 0;
    while b - a > tol && iterations < 500 {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    // the endpoints are never probed by the interior points
    let (fa, fb) = (eval(a), eval(b));
    let (x, value) = [(x, value), (a, fa), (b, fb)]
        .into_iter()
        .fold((x, value), |best, cand| if cand.1 < best.1 { cand } else { best });
    Minimum { x, value, iterations, converged: b - a <= tol }
}

/// Golden-section search on each of `splits` equal sub-brackets of `[a, b]`;
/// the best local minimum wins.
pub fn multi_start_golden<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, splits: usize, tol: f64) -> Minimum<f64> {
    let splits = splits.max(1);
    let width = (b - a) / splits as f64;
    let mut best: Option<Minimum<f64>> = None;
    let mut iterations = 0;
    for k in 0..splits {
        let lo = a + width * k as f64;
        let hi = if k + 1 == splits { b } else { lo + width };
        let m = golden_section(&mut f, lo, hi, tol);
        iterations += m.iterations;
        if best.map_or(true, |b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one split");
    Minimum { iterations, ..best }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientOptions {
    pub max_iter: usize,
    /// Converged once a projected step moves less than this.
    pub step_tol: f64,
    /// Relative step of the central-difference gradient.
    pub fd_step: f64,
}

impl Default for GradientOptions {
    fn default() -> Self {
        GradientOptions { max_iter: 1000, step_tol: 1e-8, fd_step: 1e-6 }
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Numerical gradient by central differences, one-sided where a stencil
/// point is infeasible (`f` non-finite there).
fn gradient<F: FnMut([f64; 2]) -> f64>(f: &mut F, x: [f64; 2], fx: f64, rel: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for i in 0..2 {
        let h = rel * x[i].abs().max(1.0);
        let mut xp = x;
        let mut xm = x;
        xp[i] += h;
        xm[i] -= h;
        let (fp, fm) = (f(xp), f(xm));
        g[i] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => 0.0,
        };
    }
    g
}

/// Projected gradient descent with Armijo backtracking.
pub fn projected_gradient<F, P>(mut f: F, project: P, start: [f64; 2], opts: &GradientOptions) -> Minimum<[f64; 2]>
where
    F: FnMut([f64; 2]) -> f64,
    P: Fn([f64; 2]) -> [f64; 2],
{
    let mut x = project(start);
    let mut fx = f(x);
    if !fx.is_finite() {
        return Minimum { x, value: fx, iterations: 0, converged: false };
    }
    let mut t = 1e-2;
    for it in 1..=opts.max_iter {
        let g = gradient(&mut f, x, fx, opts.fd_step);
        if norm(g) == 0.0 {
            return Minimum { x, value: fx, iterations: it, converged: true };
        }
        let mut accepted = None;
        let mut trial = t;
        for _ in 0..60 {
            let xn = project([x[0] - trial * g[0], x[1] - trial * g[1]]);
            let decrease = g[0] * (x[0] - xn[0]) + g[1] * (x[1] - xn[1]);
            let fxn = f(xn);
            if fxn.is_finite() && fxn <= fx - 1e-4 * decrease {
                accepted = Some((xn, fxn));
                break;
            }
            trial *= 0.5;
        }
        let Some((xn, fxn)) = accepted else {
            // no descent along the projected arc: stationary to working precision
            return Minimum { x, value: fx, iterations: it, converged: true };
        };
        let moved = norm([xn[0] - x[0], xn[1] - x[1]]);
        x = xn;
        fx = fxn;
        if moved < opts.step_tol {
            return Minimum { x, value: fx, iterations: it, converged: true };
        }
        t = (trial * 2.0).min(1.0);
    }
    Minimum { x, value: fx, iterations: opts.max_iter, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x| (x - 0.37).powi(2), -1.0, 2.0, 1e-10);
        assert!(m.converged);
        assert!((m.x - 0.37).abs() < 1e-9);
    }

    #[test]
    fn golden_handles_boundary_minimum() {
        let m = golden_section(|x| x, 0.0, 1.0, 1e-10);
        assert!(m.x < 1e-9);
        let m = golden_section(|x| -x, 0.0, 1.0, 1e-10);
        assert!(m.x > 1.0 - 1e-9);
    }

    #[test]
    fn multi_start_escapes_local_minimum() {
        // local minimum near -0.9, global near 1.2
        let f = |x: f64| (x * x - 1.0).powi(2) - 0.5 * x;
        let single = golden_section(f, -2.0, 2.0, 1e-10);
        let multi = multi_start_golden(f, -2.0, 2.0, 8, 1e-10);
        assert!(multi.value <= single.value + 1e-12);
        assert!(multi.x > 0.9);
    }

    #[test]
    fn projected_gradient_on_constrained_quadratic() {
        // unconstrained minimum (2, 3) lies outside |y| <= x; the projection is (2.5, 2.5)
        let f = |x: [f64; 2]| (x[0] - 2.0).powi(2) + (x[1] - 3.0).powi(2);
        let project = |x: [f64; 2]| {
            let (p0, pl) = (x[0], x[1]);
            if pl.abs() <= p0 {
                return x;
            }
            let t = ((p0 + pl.abs()) / 2.0).max(0.0);
            [t, pl.signum() * t]
        };
        let m = projected_gradient(f, project, [1.0, 0.0], &GradientOptions::default());
        assert!(m.converged);
        assert!((m.x[0] - 2.5).abs() < 1e-5 && (m.x[1] - 2.5).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn projected_gradient_reports_non_finite_start() {
        let m = projected_gradient(|_| f64::NAN, |x| x, [0.0, 0.0], &GradientOptions::default());
        assert!(!m.converged);
    }
}
