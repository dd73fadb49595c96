//! Classical and modified Bussgang laws for the dithered sign quantizer.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{erf, inc_gamma};

/// Classical Bussgang constant of the sign nonlinearity, `√(2/π) / √r0`.
pub fn c_classical(r0: f64) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
    }
    Ok((2.0 / PI).sqrt() / r0.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BussgangConstants {
    pub c1: f64,
    pub c2: f64,
    pub p0: f64,
    pub d: f64,
}

/// `C₁ = √(2/(πp0)) Γ(1, x) − |d|/(√π p0) (Γ(1/2, x) − √π)` and
/// `C₂ = −erf(d/√(2p0)) / p0`, with `x = d²/(2p0)`.
///
/// `C₁` is `E|w| / p0` for `w ~ N(−d, p0)` and therefore even in `d`.
pub fn constants(p0: f64, d: f64) -> Result<BussgangConstants> {
    if !(p0 > 0.0) {
        return Err(Error::Domain(format!("p0 must be positive, got {p0}")));
    }
    let x = d * d / (2.0 * p0);
    let gamma_half = inc_gamma(0.5, x)?;
    let c1 = c_classical(p0)? * inc_gamma(1.0, x)? - d.abs() / (PI.sqrt() * p0) * (gamma_half - PI.sqrt());
    let c2 = -erf(d / (2.0 * p0).sqrt()) / p0;
    Ok(BussgangConstants { c1, c2, p0, d })
}

/// `E{w_i sign(w_j)} = C₁ p_l − C₂ d (p0 − p_l)`.
pub fn scalar_law(p0: f64, p_l: f64, d: f64) -> Result<f64> {
    let c = constants(p0, d)?;
    Ok(c.c1 * p_l - c.c2 * d * (p0 - p_l))
}

fn check_shapes(r_ytau: &DMatrix<f64>, r_x: &DMatrix<f64>) -> Result<()> {
    if r_ytau.shape() != r_x.shape() || !r_x.is_square() {
        return Err(Error::Shape(format!(
            "R_ytau is {:?} and R_x is {:?}; both must be the same square shape",
            r_ytau.shape(),
            r_x.shape()
        )));
    }
    Ok(())
}

/// `R_yx = R_yτ + C₁ P + C₂ d (P − p0 U)` with `P = R_x + σ² I` and `U` all ones.
pub fn recover_crosscorr(r_ytau: &DMatrix<f64>, r_x: &DMatrix<f64>, sigma_diag: f64, p0: f64, d: f64) -> Result<DMatrix<f64>> {
    check_shapes(r_ytau, r_x)?;
    let c = constants(p0, d)?;
    let n = r_x.nrows();
    let p = r_x + DMatrix::identity(n, n) * sigma_diag;
    let u = DMatrix::from_element(n, n, 1.0);
    Ok(r_ytau + &p * c.c1 + (&p - u * p0) * (c.c2 * d))
}

/// The same law grouped as `R_yτ + (C₁ + dC₂) P − dC₂ p0 U`.
pub fn recover_crosscorr_grouped(r_ytau: &DMatrix<f64>, r_x: &DMatrix<f64>, sigma_diag: f64, p0: f64, d: f64) -> Result<DMatrix<f64>> {
    check_shapes(r_ytau, r_x)?;
    let c = constants(p0, d)?;
    let n = r_x.nrows();
    let p = r_x + DMatrix::identity(n, n) * sigma_diag;
    Ok(r_ytau + p * (c.c1 + d * c.c2) - DMatrix::from_element(n, n, d * c.c2 * p0))
}
