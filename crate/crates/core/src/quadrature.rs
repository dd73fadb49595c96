//! Numerical forward models: Gauss-Legendre `J_s` and Monte-Carlo `F_s`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;

use crate::arcsine::{check_overflow, closed_term, d2_minus_d1_fast, LagParams};
use crate::error::{Error, Result};
use crate::rng::uniform_stream;
use crate::special::legendre_nodes_weights;

/// Gauss-Legendre rule mapped onto `[0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GLRule {
    pub n_q: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    mapped: Vec<f64>,
}

impl GLRule {
    pub fn new(n_q: usize) -> Result<Self> {
        let (nodes, weights) = legendre_nodes_weights(n_q)?;
        let mapped = nodes.iter().map(|x| FRAC_PI_4 * (x + 1.0)).collect();
        Ok(GLRule { n_q, nodes, weights, mapped })
    }
}

fn finish(p: LagParams, d: f64, sampled: impl FnOnce() -> f64) -> Result<f64> {
    p.check()?;
    check_overflow(p, d)?;
    let closed = closed_term(p)?;
    let integral = if d == 0.0 { 0.0 } else { sampled() };
    let v = p.prefactor(d) * (closed + integral) - 1.0;
    if !v.is_finite() {
        return Err(Error::NonFinite { at: p.pl });
    }
    Ok(v)
}

/// `J_s(p0, p_l)`: the `θ` integral by an `n_q`-point Gauss-Legendre rule.
pub fn j_s(p: LagParams, d: f64, rule: &GLRule) -> Result<f64> {
    finish(p, d, || {
        FRAC_PI_4 * rule.mapped.iter().zip(&rule.weights).map(|(&t, w)| w * d2_minus_d1_fast(t, p, d)).sum::<f64>()
    })
}

/// Uniform nodes on `[0, π/2]`, drawn once per seed and reused for every
/// evaluation so that `F_s` is a deterministic smooth function of `p_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct McNodes {
    pub seed: u64,
    pub thetas: Vec<f64>,
}

impl McNodes {
    pub fn new(n_m: usize, seed: u64) -> Result<Self> {
        if n_m == 0 {
            return Err(Error::Domain("n_m must be positive".into()));
        }
        let mut rng = uniform_stream(seed, u64::MAX);
        let thetas = (0..n_m).map(|_| rng.gen::<f64>() * FRAC_PI_2).collect();
        Ok(McNodes { seed, thetas })
    }

    pub fn n_m(&self) -> usize {
        self.thetas.len()
    }
}

/// `F_s(p0, p_l)`: the `θ` integral by a Monte-Carlo average over fixed nodes.
pub fn f_s(p: LagParams, d: f64, nodes: &McNodes) -> Result<f64> {
    finish(p, d, || {
        FRAC_PI_2 / nodes.n_m() as f64 * nodes.thetas.iter().map(|&t| d2_minus_d1_fast(t, p, d)).sum::<f64>()
    })
}
