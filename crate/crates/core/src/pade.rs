//! Piecewise Padé approximation of the `D₁`/`D₂` integrands and the
//! closed-form integrals that turn it into the analytic forward model
//! `H_s(p0, p_l)`.
//!
//! Each integrand is replaced on `[0, π/8]`, `[π/8, 3π/8]` and `[3π/8, π/2]`
//! by a rational function expanded about `0`, `π/4` and `π/2` with orders
//! `[1/2]`, `[2/2]` and `[1/2]`. Taylor coefficients come from Richardson
//! extrapolated central differences; the rational coefficients from the
//! Hankel moment-matching system.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arcsine::{check_overflow, closed_term, d1_with, d2, LagParams, TailFn};
use crate::error::{Error, Result};

/// Hankel systems with a larger condition number are rejected.
pub const MAX_HANKEL_CONDITION: f64 = 1e12;

/// `H_s` outside `[-1 - δ, 1 + δ]` signals a breakdown of the approximation.
pub const RANGE_SLACK: f64 = 0.05;

/// Rational function `Σ aₙ tⁿ / Σ bₙ tⁿ` in `t = θ - expansion_point`, `b₀ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeApproximant {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    pub expansion_point: f64,
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

impl PadeApproximant {
    pub fn eval(&self, theta: f64) -> f64 {
        let t = theta - self.expansion_point;
        horner(&self.numerator, t) / horner(&self.denominator, t)
    }

    /// Taylor coefficients of the rational about its expansion point, through `order`.
    pub fn taylor(&self, order: usize) -> Vec<f64> {
        let coef = |v: &[f64], n: usize| v.get(n).copied().unwrap_or(0.0);
        let mut c = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut cn = coef(&self.numerator, n);
            for i in 1..=n.min(self.denominator.len().saturating_sub(1)) {
                cn -= self.denominator[i] * c[n - i];
            }
            c.push(cn / self.denominator[0]);
        }
        c
    }

    /// Real roots of the denominator (degree ≤ 2) in `θ` coordinates.
    pub fn denominator_roots(&self) -> Vec<f64> {
        let k = self.denominator[0];
        let g = self.denominator.get(1).copied().unwrap_or(0.0);
        let h = self.denominator.get(2).copied().unwrap_or(0.0);
        let mut roots = Vec::new();
        if h == 0.0 {
            if g != 0.0 {
                roots.push(-k / g);
            }
        } else {
            let disc = g * g - 4.0 * h * k;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                // numerically stable pair
                let qv = -0.5 * (g + g.signum() * sq);
                if qv != 0.0 {
                    roots.push(qv / h);
                    roots.push(k / qv);
                } else {
                    roots.push(0.0);
                }
            }
        }
        roots.into_iter().map(|t| t + self.expansion_point).collect()
    }

    pub fn has_pole_in(&self, lo: f64, hi: f64) -> bool {
        self.denominator_roots().iter().any(|&r| r >= lo && r <= hi)
    }

    /// Exact integral over `[lo, hi]` (θ coordinates) for numerator and
    /// denominator of degree at most two.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if self.numerator.len() > 3 || self.denominator.len() > 3 {
            return Err(Error::Domain("closed-form integral supports degrees up to two".into()));
        }
        if self.has_pole_in(lo, hi) {
            return Err(Error::Domain(format!("denominator vanishes inside [{lo}, {hi}]")));
        }
        let get = |v: &[f64], n: usize| v.get(n).copied().unwrap_or(0.0);
        let num = [get(&self.numerator, 0), get(&self.numerator, 1), get(&self.numerator, 2)];
        let den = [get(&self.denominator, 0), get(&self.denominator, 1), get(&self.denominator, 2)];
        Ok(rational_integral(num, den, lo - self.expansion_point, hi - self.expansion_point))
    }
}

/// `∫_{t0}^{t1} (a0 + a1 t + a2 t²) / (k + g t + h t²) dt` for a
/// denominator without roots on the interval. Handles all three signs of
/// the discriminant `4hk - g²` as well as degenerate lower-degree cases.
pub fn rational_integral(num: [f64; 3], den: [f64; 3], t0: f64, t1: f64) -> f64 {
    let [a0, a1, a2] = num;
    let [k, g, h] = den;
    let span = t0.abs().max(t1.abs());
    let scale = k.abs() + g.abs() * span;
    if h.abs() * span * span <= 1e-13 * scale {
        if g.abs() * span <= 1e-13 * k.abs() {
            // constant denominator
            let poly = |t: f64| (a0 * t + a1 * t * t / 2.0 + a2 * t * t * t / 3.0) / k;
            return poly(t1) - poly(t0);
        }
        let q1 = a2 / g;
        let q0 = (a1 - q1 * k) / g;
        let r = a0 - q0 * k;
        let anti = |t: f64| q1 * t * t / 2.0 + q0 * t;
        return anti(t1) - anti(t0) + r / g * ((k + g * t1) / (k + g * t0)).abs().ln();
    }
    let lead = a2 / h;
    let s = a1 - lead * g;
    let e = a0 - lead * k;
    let den_at = |t: f64| k + g * t + h * t * t;
    let log_part = s / (2.0 * h) * (den_at(t1) / den_at(t0)).abs().ln();
    let disc = 4.0 * h * k - g * g;
    let inv_den = if disc.abs() <= 1e-14 * (g * g).max((4.0 * h * k).abs()) {
        // repeated root
        -2.0 / (2.0 * h * t1 + g) + 2.0 / (2.0 * h * t0 + g)
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let (u0, u1) = ((2.0 * h * t0 + g) / sq, (2.0 * h * t1 + g) / sq);
        // atan(u1) - atan(u0) without cancellation between the two branches
        2.0 / sq * (u1 - u0).atan2(1.0 + u0 * u1)
    } else {
        let sq = (-disc).sqrt();
        let ratio = |t: f64| (2.0 * h * t + g - sq) / (2.0 * h * t + g + sq);
        1.0 / sq * (ratio(t1) / ratio(t0)).abs().ln()
    };
    lead * (t1 - t0) + log_part + (e - s * g / (2.0 * h)) * inv_den
}

/// Taylor coefficients `cₙ = f⁽ⁿ⁾(x0)/n!`, `n ≤ order ≤ 4`, from central
/// differences at steps `h0`, `h0/2`, `h0/4` combined by two rounds of
/// Richardson extrapolation.
pub fn taylor_coeffs<F>(f: F, x0: f64, order: usize, h0: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if order > 4 {
        return Err(Error::Domain(format!("taylor_coeffs supports order <= 4, got {order}")));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { at: x })
        }
    };
    let f0 = eval(x0)?;
    let mut coeffs = vec![f0];
    if order == 0 {
        return Ok(coeffs);
    }
    let need_two = order >= 3;
    // derivatives[level][k-1] for step h0 / 2^level
    let mut estimates = [[0.0; 4]; 3];
    for (level, row) in estimates.iter_mut().enumerate() {
        let h = h0 / f64::from(1u32 << level);
        let fp1 = eval(x0 + h)?;
        let fm1 = eval(x0 - h)?;
        let (fp2, fm2) = if need_two { (eval(x0 + 2.0 * h)?, eval(x0 - 2.0 * h)?) } else { (0.0, 0.0) };
        row[0] = (fp1 - fm1) / (2.0 * h);
        row[1] = (fp1 - 2.0 * f0 + fm1) / (h * h);
        row[2] = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
        row[3] = (fp2 - 4.0 * fp1 + 6.0 * f0 - 4.0 * fm1 + fm2) / (h * h * h * h);
    }
    let mut factorial = 1.0;
    for k in 1..=order {
        factorial *= k as f64;
        let d = |level: usize| estimates[level][k - 1];
        let r1a = (4.0 * d(1) - d(0)) / 3.0;
        let r1b = (4.0 * d(2) - d(1)) / 3.0;
        let r2 = (16.0 * r1b - r1a) / 15.0;
        coeffs.push(r2 / factorial);
    }
    Ok(coeffs)
}

/// `[L/M]` approximant from Taylor coefficients `c₀..c_{L+M}` about `expansion_point`.
pub fn pade_from_taylor(c: &[f64], l: usize, m: usize, expansion_point: f64) -> Result<PadeApproximant> {
    if c.len() != l + m + 1 {
        return Err(Error::Domain(format!("[{l}/{m}] approximant needs {} coefficients, got {}", l + m + 1, c.len())));
    }
    let coef = |n: isize| if n < 0 { 0.0 } else { c[n as usize] };
    let mut b = vec![1.0];
    if m > 0 {
        // row k: Σ_i b_i c_{L+k-i} = -c_{L+k}, k = 1..M
        let hankel = DMatrix::from_fn(m, m, |row, col| coef(l as isize + row as isize - col as isize));
        let rhs = DVector::from_fn(m, |row, _| -coef((l + row + 1) as isize));
        if hankel.iter().all(|&v| v == 0.0) && rhs.iter().all(|&v| v == 0.0) {
            b.extend(std::iter::repeat(0.0).take(m));
        } else {
            let sv = hankel.singular_values();
            let smax = sv.max();
            let smin = sv.min();
            let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
            if !(condition < MAX_HANKEL_CONDITION) {
                return Err(Error::HankelDegenerate { condition });
            }
            let sol = hankel.lu().solve(&rhs).ok_or(Error::HankelDegenerate { condition })?;
            b.extend(sol.iter().copied());
        }
    }
    let a = (0..=l)
        .map(|j| c[j] + (1..=m.min(j)).map(|i| b[i] * c[j - i]).sum::<f64>())
        .collect();
    Ok(PadeApproximant { numerator: a, denominator: b, expansion_point })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Segment {
    Low,
    Middle,
    High,
}

impl Segment {
    pub const ALL: [Segment; 3] = [Segment::Low, Segment::Middle, Segment::High];

    pub fn interval(self) -> (f64, f64) {
        match self {
            Segment::Low => (0.0, FRAC_PI_8),
            Segment::Middle => (FRAC_PI_8, 3.0 * FRAC_PI_8),
            Segment::High => (3.0 * FRAC_PI_8, FRAC_PI_2),
        }
    }

    pub fn expansion_point(self) -> f64 {
        match self {
            Segment::Low => 0.0,
            Segment::Middle => FRAC_PI_4,
            Segment::High => FRAC_PI_2,
        }
    }

    /// `(L, M)`
    pub fn order(self) -> (usize, usize) {
        match self {
            Segment::Middle => (2, 2),
            _ => (1, 2),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Segment::Low => "low",
            Segment::Middle => "mid",
            Segment::High => "high",
        }
    }
}

/// One segment of a piecewise model.
///
/// If the Hankel system is degenerate or the denominator has a root on
/// the segment, `fallback` holds the Taylor polynomial of the same total
/// order and is integrated instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub segment: Segment,
    pub approximant: Option<PadeApproximant>,
    pub fallback: Option<Vec<f64>>,
}

impl Piece {
    pub fn eval(&self, theta: f64) -> f64 {
        match (&self.approximant, &self.fallback) {
            (_, Some(poly)) => horner(poly, theta - self.segment.expansion_point()),
            (Some(ap), None) => ap.eval(theta),
            (None, None) => unreachable!("piece without approximant or fallback"),
        }
    }

    pub fn integral(&self) -> Result<f64> {
        let (lo, hi) = self.segment.interval();
        match (&self.approximant, &self.fallback) {
            (_, Some(poly)) => {
                let x0 = self.segment.expansion_point();
                let anti = |t: f64| {
                    poly.iter().enumerate().map(|(n, c)| c * t.powi(n as i32 + 1) / (n as f64 + 1.0)).sum::<f64>()
                };
                Ok(anti(hi - x0) - anti(lo - x0))
            }
            (Some(ap), None) => ap.integral(lo, hi),
            (None, None) => unreachable!("piece without approximant or fallback"),
        }
    }

    pub fn used_fallback(&self) -> bool {
        self.fallback.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PadeOptions {
    pub tail: TailFn,
    /// Initial finite-difference step for the Taylor coefficients.
    pub step: f64,
}

impl Default for PadeOptions {
    fn default() -> Self {
        PadeOptions { tail: TailFn::Exact, step: 1e-2 }
    }
}

/// Three-segment approximations of `D₁` and `D₂` for one lag.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseModel {
    pub d1: [Piece; 3],
    pub d2: [Piece; 3],
}

fn build_piece<F>(f: F, segment: Segment, step: f64) -> Result<Piece>
where
    F: Fn(f64) -> Result<f64>,
{
    let (l, m) = segment.order();
    let x0 = segment.expansion_point();
    let c = taylor_coeffs(f, x0, l + m, step)?;
    let (lo, hi) = segment.interval();
    match pade_from_taylor(&c, l, m, x0) {
        Ok(ap) if !ap.has_pole_in(lo, hi) => Ok(Piece { segment, approximant: Some(ap), fallback: None }),
        Ok(ap) => Ok(Piece { segment, approximant: Some(ap), fallback: Some(c) }),
        Err(Error::HankelDegenerate { .. }) => Ok(Piece { segment, approximant: None, fallback: Some(c) }),
        Err(e) => Err(e),
    }
}

/// Build the six approximants for `(p0, p_l, d)`; `d` must be nonzero.
pub fn build_piecewise(p: LagParams, d: f64, opts: &PadeOptions) -> Result<PiecewiseModel> {
    p.check()?;
    if d == 0.0 {
        return Err(Error::Domain("piecewise model is empty at d = 0 (integrands vanish)".into()));
    }
    check_overflow(p, d)?;
    // R_y is even in d; the positive branch keeps the tail argument positive
    let d = d.abs();
    let tail = opts.tail;
    let pieces = |which: u8| -> Result<[Piece; 3]> {
        let mut out = Vec::with_capacity(3);
        for seg in Segment::ALL {
            let piece = if which == 1 {
                build_piece(|t| d1_with(t, p, d, tail), seg, opts.step)?
            } else {
                build_piece(|t| d2(t, p, d), seg, opts.step)?
            };
            out.push(piece);
        }
        Ok(out.try_into().expect("three segments"))
    };
    Ok(PiecewiseModel { d1: pieces(1)?, d2: pieces(2)? })
}

impl PiecewiseModel {
    pub fn integral_d1(&self) -> Result<f64> {
        self.d1.iter().map(Piece::integral).sum()
    }

    pub fn integral_d2(&self) -> Result<f64> {
        self.d2.iter().map(Piece::integral).sum()
    }

    pub fn any_fallback(&self) -> bool {
        self.d1.iter().chain(self.d2.iter()).any(Piece::used_fallback)
    }

    /// CSV rows `piece,a0,a1,a2,b0,b1,b2` (fallback pieces report the
    /// Taylor polynomial with `b = (1, 0, 0)` and only its first three terms).
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("piece,a0,a1,a2,b0,b1,b2\n");
        for (name, pieces) in [("d1", &self.d1), ("d2", &self.d2)] {
            for piece in pieces.iter() {
                let (a, b): (Vec<f64>, Vec<f64>) = match (&piece.approximant, &piece.fallback) {
                    (Some(ap), None) => (ap.numerator.clone(), ap.denominator.clone()),
                    (_, Some(poly)) => (poly.clone(), vec![1.0]),
                    (None, None) => unreachable!(),
                };
                let g = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
                let _ = writeln!(
                    out,
                    "{}_{},{},{},{},{},{},{}",
                    name,
                    piece.segment.label(),
                    g(&a, 0),
                    g(&a, 1),
                    g(&a, 2),
                    g(&b, 0),
                    g(&b, 1),
                    g(&b, 2)
                );
            }
        }
        out
    }
}

/// Analytic forward model `H_s(p0, p_l)` built from the piecewise approximants.
pub fn h_s(p: LagParams, d: f64, opts: &PadeOptions) -> Result<f64> {
    p.check()?;
    let pre = p.prefactor(d);
    let closed = closed_term(p)?;
    let value = if d == 0.0 {
        pre * closed - 1.0
    } else {
        let model = build_piecewise(p, d, opts)?;
        pre * (closed + model.integral_d2()? - model.integral_d1()?) - 1.0
    };
    if !value.is_finite() || value.abs() > 1.0 + RANGE_SLACK {
        return Err(Error::Breakdown { value });
    }
    Ok(value)
}
