//! The forward model: one-bit autocorrelation `R_y(l)` as a function of the
//! effective variance `p0`, lag correlation `p_l` and threshold mean `d`.
//!
//! `R_y(l) = e^{-d²/(p0+p_l)} / (π √(p0²-p_l²)) · ∫₀^{π/2} (1/β + D₂ - D₁) dθ - 1`
//! with the θ-dependent `α`, `β` of [`alpha_beta`]. The `1/β` part has a
//! closed form; `D₁` and `D₂` are integrated numerically here and
//! approximated by the other forward models.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::adaptive_gk;
use crate::special::{q, q_bar};

/// Relative margin kept between `|p_l|` and `p0`.
pub const FEASIBILITY_MARGIN: f64 = 1e-6;

/// Largest admissible `α²/(4β)`.
pub const EXPONENT_CAP: f64 = 700.0;

/// Variance and lag correlations of `w = x - τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub p0: f64,
    /// Lags `1..=L`.
    pub p_l: Vec<f64>,
}

impl EffectiveParams {
    pub fn new(p0: f64, p_l: Vec<f64>) -> Result<Self> {
        for &pl in &p_l {
            LagParams::new(p0, pl)?;
        }
        Ok(EffectiveParams { p0, p_l })
    }

    /// Parameters at lag `l >= 1`.
    pub fn at(&self, l: usize) -> Option<LagParams> {
        self.p_l.get(l.checked_sub(1)?).map(|&pl| LagParams { p0: self.p0, pl })
    }
}

/// `(p0, p_l)` for a single lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagParams {
    pub p0: f64,
    pub pl: f64,
}

impl LagParams {
    pub fn new(p0: f64, pl: f64) -> Result<Self> {
        let p = LagParams { p0, pl };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.p0 > 0.0) || !(self.pl.abs() < self.p0) {
            return Err(Error::Infeasible { p0: self.p0, pl: self.pl });
        }
        Ok(())
    }

    /// `√(p0² - p_l²)`
    pub fn det_sqrt(&self) -> f64 {
        ((self.p0 - self.pl) * (self.p0 + self.pl)).sqrt()
    }

    /// `e^{-d²/(p0+p_l)} / (π √(p0² - p_l²))`
    pub fn prefactor(&self, d: f64) -> f64 {
        (-d * d / (self.p0 + self.pl)).exp() / (PI * self.det_sqrt())
    }

    /// Largest `α²/(4β)` over `θ ∈ [0, π/2]`, attained at `θ = π/4`.
    pub fn peak_exponent(&self, d: f64) -> f64 {
        d * d / (self.p0 + self.pl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandPoint {
    pub alpha: f64,
    pub beta: f64,
}

/// Which tail function `D₁` multiplies by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TailFn {
    #[default]
    Exact,
    /// The two-exponential `q_bar` approximation.
    Chiani,
}

pub fn alpha_beta(theta: f64, p: LagParams, d: f64) -> Result<IntegrandPoint> {
    p.check()?;
    Ok(alpha_beta_unchecked(theta, p, d))
}

#[inline]
fn alpha_beta_unchecked(theta: f64, p: LagParams, d: f64) -> IntegrandPoint {
    let (s, c) = theta.sin_cos();
    let alpha = d * (s + c) / (p.p0 + p.pl);
    let beta = (p.p0 - p.pl * (2.0 * theta).sin()) / (2.0 * (p.p0 - p.pl) * (p.p0 + p.pl));
    IntegrandPoint { alpha, beta }
}

fn exponent(pt: IntegrandPoint) -> Result<f64> {
    let e = pt.alpha * pt.alpha / (4.0 * pt.beta);
    if e > EXPONENT_CAP {
        return Err(Error::ExponentOverflow { exponent: e });
    }
    Ok(e)
}

/// `D₂ = √(π/β) · α/(2β) · e^{α²/(4β)}`
pub fn d2(theta: f64, p: LagParams, d: f64) -> Result<f64> {
    let pt = alpha_beta(theta, p, d)?;
    let e = exponent(pt)?;
    Ok((PI / pt.beta).sqrt() * pt.alpha / (2.0 * pt.beta) * e.exp())
}

/// `D₁ = √(π/β) · α/β · Q(α/√(2β)) · e^{α²/(4β)}`
pub fn d1(theta: f64, p: LagParams, d: f64) -> Result<f64> {
    d1_with(theta, p, d, TailFn::Exact)
}

pub fn d1_with(theta: f64, p: LagParams, d: f64, tail: TailFn) -> Result<f64> {
    let pt = alpha_beta(theta, p, d)?;
    let e = exponent(pt)?;
    let arg = pt.alpha / (2.0 * pt.beta).sqrt();
    let tail_value = match tail {
        TailFn::Exact => q(arg),
        TailFn::Chiani if arg > 0.0 => q_bar(arg)?,
        // the approximation is only defined for positive arguments
        TailFn::Chiani => 1.0 - q_bar(-arg).unwrap_or(0.5),
    };
    Ok((PI / pt.beta).sqrt() * pt.alpha / pt.beta * tail_value * e.exp())
}

/// `D₂ - D₁` without the per-call feasibility and overflow checks; callers
/// validate `p` and `peak_exponent` once.
#[inline]
pub(crate) fn d2_minus_d1_fast(theta: f64, p: LagParams, d: f64) -> f64 {
    let pt = alpha_beta_unchecked(theta, p, d);
    let scale = (PI / pt.beta).sqrt() * pt.alpha / pt.beta * (pt.alpha * pt.alpha / (4.0 * pt.beta)).exp();
    scale * (0.5 - q(pt.alpha / (2.0 * pt.beta).sqrt()))
}

pub(crate) fn check_overflow(p: LagParams, d: f64) -> Result<()> {
    let e = p.peak_exponent(d);
    if e > EXPONENT_CAP {
        return Err(Error::ExponentOverflow { exponent: e });
    }
    Ok(())
}

/// `∫₀^{π/2} 1/β dθ = √(p0²-p_l²) (π + 2 atan(p_l/√(p0²-p_l²)))`
pub fn closed_term(p: LagParams) -> Result<f64> {
    p.check()?;
    let s = p.det_sqrt();
    Ok(s * (PI + 2.0 * (p.pl / s).atan()))
}

/// Reference evaluation of `R_y(l)` by adaptive quadrature to `tol`.
pub fn ry_reference(p: LagParams, d: f64, tol: f64) -> Result<f64> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!("ry_reference tolerance must be in [1e-12, 1e-6], got {tol}")));
    }
    p.check()?;
    check_overflow(p, d)?;
    let pre = p.prefactor(d);
    let closed = closed_term(p)?;
    if d == 0.0 {
        return Ok((pre * closed - 1.0).clamp(-1.0, 1.0));
    }
    // scale the quadrature tolerance so the error in R_y stays below tol
    let integral = adaptive_gk(|t| d2_minus_d1_fast(t, p, d), 0.0, FRAC_PI_2, tol / pre)?;
    Ok((pre * (closed + integral) - 1.0).clamp(-1.0, 1.0))
}

/// Classical arcsine law `(2/π) asin(r_l / r0)`.
pub fn arcsine_classical(r0: f64, r_l: f64) -> Result<f64> {
    if !(r0 > 0.0) || r_l.abs() > r0 {
        return Err(Error::Domain(format!("arcsine law requires r0 > 0 and |r_l| <= r0, got ({r0}, {r_l})")));
    }
    Ok(2.0 / PI * (r_l / r0).asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::q;
    use std::f64::consts::FRAC_PI_4;

    fn lp(p0: f64, pl: f64) -> LagParams {
        LagParams::new(p0, pl).unwrap()
    }

    #[test]
    fn alpha_beta_values() {
        let pt = alpha_beta(0.3, lp(1.0, 0.4), 0.0).unwrap();
        assert_eq!(pt.alpha, 0.0);
        let pt = alpha_beta(FRAC_PI_4, lp(1.0, 0.0), 1.0).unwrap();
        assert!((pt.alpha - 2f64.sqrt()).abs() < 1e-15);
        assert!((pt.beta - 0.5).abs() < 1e-15);
        assert!(alpha_beta(0.1, LagParams { p0: 1.0, pl: 1.0 }, 0.3).is_err());
    }

    #[test]
    fn beta_minimized_at_quarter_pi_for_positive_pl() {
        let p = lp(1.2, 0.5);
        let at_center = alpha_beta(FRAC_PI_4, p, 0.3).unwrap().beta;
        for i in 0..=200 {
            let theta = FRAC_PI_2 * i as f64 / 200.0;
            assert!(alpha_beta(theta, p, 0.3).unwrap().beta >= at_center - 1e-15);
        }
    }

    #[test]
    fn integrands_vanish_at_zero_threshold_and_are_symmetric() {
        let p = lp(1.4, 0.2);
        assert_eq!(d1(0.4, p, 0.0).unwrap(), 0.0);
        assert_eq!(d2(0.4, p, 0.0).unwrap(), 0.0);
        for i in 0..=20 {
            let t = FRAC_PI_2 * i as f64 / 20.0;
            let a = d2(t, p, 0.3).unwrap();
            let b = d2(FRAC_PI_2 - t, p, 0.3).unwrap();
            assert!((a - b).abs() < 1e-13 * a.abs().max(1.0));
        }
    }

    #[test]
    fn d1_matches_scalar_evaluation() {
        let (p0, pl, d) = (1.4, 0.2, 0.3);
        let t = FRAC_PI_4;
        let alpha = d * 2f64.sqrt() / (p0 + pl);
        let beta = (p0 - pl) / (2.0 * (p0 * p0 - pl * pl));
        let expect = (PI / beta).sqrt() * alpha / beta * q(alpha / (2.0 * beta).sqrt()) * (alpha * alpha / (4.0 * beta)).exp();
        let v = d1(t, lp(p0, pl), d).unwrap();
        assert!(v > 0.0 && v.is_finite());
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn exponent_cap_reported() {
        let err = d2(FRAC_PI_4, lp(0.01, 0.0), 3.0).unwrap_err();
        assert!(matches!(err, Error::ExponentOverflow { .. }));
        assert!(ry_reference(lp(0.01, 0.0), 3.0, 1e-10).is_err());
    }

    #[test]
    fn chiani_tail_variant_differs_from_exact() {
        let p = lp(1.4, 0.2);
        let exact = d1(FRAC_PI_4, p, 0.3).unwrap();
        let approx = d1_with(FRAC_PI_4, p, 0.3, TailFn::Chiani).unwrap();
        assert!(approx < exact);
    }

    #[test]
    fn closed_term_limits() {
        assert!((closed_term(lp(2.0, 0.0)).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!(closed_term(lp(1.0, 1.0 - 1e-12)).unwrap() < 1e-5);
        let v = closed_term(lp(1.0, 0.5)).unwrap();
        assert!((v - 0.75f64.sqrt() * (PI + 2.0 * (0.5 / 0.75f64.sqrt()).atan())).abs() < 1e-15);
        assert!((v - 3.6276).abs() < 1e-4);
        assert!(closed_term(LagParams { p0: 1.0, pl: -1.0 }).is_err());
    }

    #[test]
    fn arcsine_classical_values() {
        assert!((arcsine_classical(1.0, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(arcsine_classical(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(arcsine_classical(2.0, -2.0).unwrap(), -1.0);
        assert!(arcsine_classical(1.0, 1.1).is_err());
    }

    #[test]
    fn reference_reduces_to_arcsine_and_independence() {
        for &pl in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
            let v = ry_reference(lp(1.0, pl), 0.0, 1e-12).unwrap();
            assert!((v - 2.0 / PI * pl.asin()).abs() < 1e-8);
        }
        for &(p0, d) in &[(1.0, 0.3), (1.4, 0.7), (0.5, 0.2)] {
            let v = ry_reference(lp(p0, 0.0), d, 1e-12).unwrap();
            let mu = 2.0 * q(d / f64::sqrt(p0)) - 1.0;
            assert!((v - mu * mu).abs() < 1e-9, "p0 = {p0}, d = {d}: {v} vs {}", mu * mu);
        }
    }

    #[test]
    fn reference_is_even_in_threshold_mean() {
        let p = lp(1.1, 0.35);
        let a = ry_reference(p, 0.4, 1e-12).unwrap();
        let b = ry_reference(p, -0.4, 1e-12).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn reference_tolerance_checked() {
        assert!(ry_reference(lp(1.0, 0.2), 0.3, 1e-3).is_err());
        assert!(ry_reference(lp(1.0, 0.2), 0.3, 1e-14).is_err());
    }

    #[test]
    fn effective_params_indexing() {
        let e = EffectiveParams::new(1.2, vec![0.5, -0.3]).unwrap();
        assert_eq!(e.at(0), None);
        assert_eq!(e.at(2), Some(LagParams { p0: 1.2, pl: -0.3 }));
        assert!(EffectiveParams::new(1.0, vec![1.0]).is_err());
    }
}
