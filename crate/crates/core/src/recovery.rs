//! Recovery of the effective and input autocorrelation from sign statistics.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcsine::{LagParams, FEASIBILITY_MARGIN};
use crate::error::{Error, Result};
use crate::optimize::{golden_section, multi_start_golden, projected_gradient, GradientOptions, Minimum};
use crate::pade::{h_s, PadeOptions};
use crate::quadrature::{f_s, j_s, GLRule, McNodes};
use crate::rng::uniform_stream;
use crate::signal::SampleStats;
use crate::special::{q_inv, Probability};

/// Criterion value used when the residual underflows (`ln(1e-600)`).
pub const CRITERION_FLOOR: f64 = -1380.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PadeFull,
    PadeFast,
    GaussLegendre,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::PadeFull, Method::PadeFast, Method::GaussLegendre, Method::MonteCarlo];

    pub fn name(self) -> &'static str {
        match self {
            Method::PadeFull => "pade_full",
            Method::PadeFast => "pade_fast",
            Method::GaussLegendre => "gauss_legendre",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method '{s}' (expected pade_full, pade_fast, gauss_legendre or monte_carlo)")))
    }
}

/// A forward model `(p0, p_l) ↦ R_y(l)`.
#[derive(Debug, Clone)]
pub enum Forward {
    Pade(PadeOptions),
    GaussLegendre(GLRule),
    MonteCarlo(McNodes),
}

impl Forward {
    pub fn for_method(method: Method, opts: &RecoveryOptions) -> Result<Self> {
        Ok(match method {
            Method::PadeFull | Method::PadeFast => Forward::Pade(opts.pade),
            Method::GaussLegendre => Forward::GaussLegendre(GLRule::new(opts.n_q)?),
            Method::MonteCarlo => Forward::MonteCarlo(McNodes::new(opts.n_m, opts.seed)?),
        })
    }

    pub fn eval(&self, p: LagParams, d: f64) -> Result<f64> {
        match self {
            Forward::Pade(o) => h_s(p, d, o),
            Forward::GaussLegendre(rule) => j_s(p, d, rule),
            Forward::MonteCarlo(nodes) => f_s(p, d, nodes),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub n_q: usize,
    pub n_m: usize,
    pub seed: u64,
    pub pade: PadeOptions,
    pub golden_tol: f64,
    /// Sub-brackets for the multi-start scalar search on the Padé model.
    pub pade_splits: usize,
    pub starts: usize,
    pub max_iter: usize,
    pub step_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            n_q: 13,
            n_m: 2000,
            seed: 0,
            pade: PadeOptions::default(),
            golden_tol: 1e-10,
            pade_splits: 8,
            starts: 20,
            max_iter: 1000,
            step_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub method: Method,
    pub p0_star: f64,
    /// Lags `1..=L`.
    pub p_hat: Vec<f64>,
    pub r0_hat: f64,
    pub r_hat: Vec<f64>,
    pub residuals: Vec<f64>,
    pub wall_time_s: f64,
    pub seed: u64,
    /// Set by [`map_to_input`] when the threshold variance exceeds `p0_star`.
    #[serde(skip)]
    pub over_subtracted: bool,
}

/// Optimal `p0` from the sign mean: `p0* = (d / Q⁻¹((μ+1)/2))²`.
pub fn estimate_p0(mu_hat: f64, d: f64) -> Result<f64> {
    if !(mu_hat > -1.0 && mu_hat < 1.0) {
        return Err(Error::Domain(format!("sign mean must lie in (-1, 1), got {mu_hat}")));
    }
    if d.abs() <= 1e-8 {
        return Err(Error::Unidentifiable("variance unidentifiable at a zero threshold mean".into()));
    }
    if mu_hat.abs() <= 1e-8 {
        return Err(Error::Unidentifiable("variance unidentifiable at this threshold mean (sign mean is zero)".into()));
    }
    let x = q_inv(Probability::new((mu_hat + 1.0) / 2.0)?, 1e-15)?;
    Ok((d / x).powi(2))
}

/// `ln |r_y_l − forward(p0, p_l)|²`, floored at [`CRITERION_FLOOR`].
pub fn criterion(forward: &Forward, r_y_l: f64, p0: f64, p_l: f64, d: f64) -> Result<f64> {
    let model = forward.eval(LagParams::new(p0, p_l)?, d)?;
    Ok(log_sq(r_y_l - model))
}

fn log_sq(res: f64) -> f64 {
    if res.abs() < 1e-300 {
        CRITERION_FLOOR
    } else {
        2.0 * res.abs().ln()
    }
}

fn margin(p0: f64) -> f64 {
    FEASIBILITY_MARGIN * p0
}

/// Scalar recovery with `p0` fixed by the sign mean.
pub fn solve_fast(forward: &Forward, r_y_lags: &[f64], mu_hat: f64, d: f64, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    let start = Instant::now();
    let p0 = estimate_p0(mu_hat, d)?;
    let (lo, hi) = (-p0 + margin(p0), p0 - margin(p0));
    let method = match forward {
        Forward::Pade(_) => Method::PadeFast,
        Forward::GaussLegendre(_) => Method::GaussLegendre,
        Forward::MonteCarlo(_) => Method::MonteCarlo,
    };
    let solved: Vec<Minimum<f64>> = r_y_lags
        .par_iter()
        .map(|&target| {
            let obj = |pl: f64| criterion(forward, target, p0, pl, d).unwrap_or(f64::INFINITY);
            match forward {
                Forward::Pade(_) => multi_start_golden(obj, lo, hi, opts.pade_splits, opts.golden_tol),
                _ => golden_section(obj, lo, hi, opts.golden_tol),
            }
        })
        .collect();
    let p_hat: Vec<f64> = solved.iter().map(|m| m.x.clamp(lo, hi)).collect();
    Ok(RecoveryResult {
        method,
        p0_star: p0,
        r0_hat: p0,
        r_hat: p_hat.clone(),
        p_hat,
        residuals: solved.iter().map(|m| m.value).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: opts.seed,
        over_subtracted: false,
    })
}

/// Euclidean projection onto `{p0 ≥ p_min, |p_l| ≤ (1−ε) p0}`.
pub fn project_feasible(x: [f64; 2], p_min: f64) -> [f64; 2] {
    let k = 1.0 - FEASIBILITY_MARGIN;
    let [mut p0, mut pl] = x;
    if pl.abs() > k * p0 {
        let t = ((p0 + k * pl.abs()) / (1.0 + k * k)).max(0.0);
        p0 = t;
        pl = pl.signum() * k * t;
    }
    if p0 < p_min {
        p0 = p_min;
        pl = pl.clamp(-k * p_min, k * p_min);
    }
    [p0, pl]
}

/// Outcome of one start of the two-variable search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartDiagnostic {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimise `C(p0, p_l)` for one lag by multi-start projected gradient descent.
pub fn solve_full_lag(forward: &Forward, target: f64, d: f64, lag_seed: u64, opts: &RecoveryOptions) -> Result<(Minimum<[f64; 2]>, Vec<StartDiagnostic>)> {
    let p_min = 1e-3;
    let gopts = GradientOptions { max_iter: opts.max_iter, step_tol: opts.step_tol, ..GradientOptions::default() };
    let mut rng = uniform_stream(lag_seed, 7);
    let mut best: Option<Minimum<[f64; 2]>> = None;
    let mut diags = Vec::with_capacity(opts.starts);
    for _ in 0..opts.starts {
        let p0 = 0.1 + 2.9 * (1.0 - rng.gen::<f64>());
        let pl = p0 * (2.0 * rng.gen::<f64>() - 1.0);
        let obj = |x: [f64; 2]| {
            LagParams::new(x[0], x[1])
                .and_then(|p| forward.eval(p, d))
                .map(|m| log_sq(target - m))
                .unwrap_or(f64::INFINITY)
        };
        let m = projected_gradient(obj, |x| project_feasible(x, p_min), [p0, pl], &gopts);
        diags.push(StartDiagnostic { start: [p0, pl], end: m.x, value: m.value, iterations: m.iterations, converged: m.converged });
        if m.converged && best.map_or(true, |b| m.value < b.value) {
            best = Some(m);
        }
    }
    match best {
        Some(m) => Ok((m, diags)),
        None => Err(Error::NoConvergence {
            starts: opts.starts,
            diagnostics: diags
                .iter()
                .map(|s| format!("start {:?} -> {:?}, C = {}, {} iterations", s.start, s.end, s.value, s.iterations))
                .collect(),
        }),
    }
}

/// Two-variable recovery on the Padé model; `p0` is the median of the
/// per-lag estimates and each `p̂_l` is clipped to feasibility at that `p0`.
pub fn solve_full_pa(r_y_lags: &[f64], d: f64, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    if r_y_lags.is_empty() {
        return Err(Error::Shape("no lags to recover".into()));
    }
    if d.abs() <= 1e-8 {
        return Err(Error::Unidentifiable("two-variable criterion is flat in p0 at d = 0; use the sign-mean estimate".into()));
    }
    let start = Instant::now();
    let forward = Forward::Pade(opts.pade);
    let per_lag: Vec<Minimum<[f64; 2]>> = r_y_lags
        .par_iter()
        .enumerate()
        .map(|(l, &target)| solve_full_lag(&forward, target, d, opts.seed.wrapping_add(l as u64 + 1), opts).map(|(m, _)| m))
        .collect::<Result<_>>()?;
    let mut p0s: Vec<f64> = per_lag.iter().map(|m| m.x[0]).collect();
    p0s.sort_by(f64::total_cmp);
    let n = p0s.len();
    let p0 = if n % 2 == 1 { p0s[n / 2] } else { 0.5 * (p0s[n / 2 - 1] + p0s[n / 2]) };
    let bound = p0 - margin(p0);
    let p_hat: Vec<f64> = per_lag.iter().map(|m| m.x[1].clamp(-bound, bound)).collect();
    Ok(RecoveryResult {
        method: Method::PadeFull,
        p0_star: p0,
        r0_hat: p0,
        r_hat: p_hat.clone(),
        p_hat,
        residuals: per_lag.iter().map(|m| m.value).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: opts.seed,
        over_subtracted: false,
    })
}

/// Remove the threshold covariance: `r̂₀ = p0* − σ²`, `r̂_l = p̂_l`.
pub fn map_to_input(mut res: RecoveryResult, sigma_diag: f64) -> RecoveryResult {
    res.r0_hat = res.p0_star - sigma_diag;
    res.r_hat = res.p_hat.clone();
    res.over_subtracted = res.r0_hat <= 0.0;
    res
}

/// Run `method` on sample statistics for lags `1..=max_lag` and map to the input.
pub fn recover(method: Method, stats: &SampleStats, max_lag: usize, d: f64, sigma_diag: f64, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    if max_lag == 0 || max_lag >= stats.r_y_lag.len() {
        return Err(Error::Shape(format!("max_lag must lie in 1..{}, got {max_lag}", stats.r_y_lag.len())));
    }
    let lags = &stats.r_y_lag[1..=max_lag];
    let res = match method {
        Method::PadeFull => solve_full_pa(lags, d, opts)?,
        _ => solve_fast(&Forward::for_method(method, opts)?, lags, stats.mu_hat, d, opts)?,
    };
    Ok(map_to_input(res, sigma_diag))
}

/// `|r0 − r̂0|² / |r0|²`
pub fn nmse(r0: f64, r0_hat: f64) -> Result<f64> {
    if r0 == 0.0 {
        return Err(Error::Domain("nmse undefined for r0 = 0".into()));
    }
    Ok((r0 - r0_hat).powi(2) / (r0 * r0))
}

/// Mean of `|r − r̂|²` over a lag-by-experiment table.
pub fn mse(truth: &[Vec<f64>], est: &[Vec<f64>]) -> Result<f64> {
    if truth.len() != est.len() || truth.iter().zip(est).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Shape("truth and estimate tables differ in shape".into()));
    }
    let count: usize = truth.iter().map(Vec::len).sum();
    if count == 0 {
        return Err(Error::Shape("empty table".into()));
    }
    let total: f64 = truth.iter().zip(est).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).powi(2))).sum();
    Ok(total / count as f64)
}
