//! Stationary Gaussian signals, Gaussian dither thresholds, one-bit
//! sampling and the sample statistics consumed by recovery.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::NormalStream;

/// AR(1) autocorrelation `r_l = r0 * rho^l` for `l = 0..=max_lag`.
pub fn ar1_acf(rho: f64, r0: f64, max_lag: usize) -> Result<Vec<f64>> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!("AR(1) coefficient must satisfy |rho| < 1, got {rho}")));
    }
    if !(r0 > 0.0) {
        return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
    }
    Ok((0..=max_lag as i32).map(|l| r0 * rho.powi(l)).collect())
}

/// Symmetric Toeplitz matrix `T(i, j) = acf(|i - j|)`, rejected unless a
/// jittered Cholesky factorization succeeds.
pub fn toeplitz_from_acf(acf: &[f64]) -> Result<DMatrix<f64>> {
    let t = toeplitz(acf)?;
    cholesky_with_jitter(&t, acf[0])?;
    Ok(t)
}

/// Symmetric Toeplitz matrix without the PSD check.
pub fn toeplitz(acf: &[f64]) -> Result<DMatrix<f64>> {
    if acf.is_empty() {
        return Err(Error::Domain("autocorrelation sequence is empty".into()));
    }
    let n = acf.len();
    Ok(DMatrix::from_fn(n, n, |i, j| acf[i.abs_diff(j)]))
}

/// Lower Cholesky factor of `t + jitter I` with `jitter = 1e-10 * r0`.
fn cholesky_with_jitter(t: &DMatrix<f64>, r0: f64) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let jitter = 1e-10 * r0.abs();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut diag = t[(j, j)] + jitter;
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPsd { row: j });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = t[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Stationary zero-mean Gaussian signal of dimension `acf.len()`.
#[derive(Debug, Clone)]
pub struct SignalModel {
    acf: Vec<f64>,
    chol: DMatrix<f64>,
}

impl SignalModel {
    pub fn new(acf: Vec<f64>) -> Result<Self> {
        let r0 = *acf.first().ok_or_else(|| Error::Domain("autocorrelation sequence is empty".into()))?;
        if !(r0 > 0.0) {
            return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
        }
        if let Some(bad) = acf.iter().find(|r| r.abs() > r0) {
            return Err(Error::Domain(format!("|r_l| = {} exceeds r0 = {r0}", bad.abs())));
        }
        let t = toeplitz(&acf)?;
        let chol = cholesky_with_jitter(&t, r0)?;
        Ok(SignalModel { acf, chol })
    }

    pub fn ar1(rho: f64, r0: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("signal dimension must be positive".into()));
        }
        SignalModel::new(ar1_acf(rho, r0, dim - 1)?)
    }

    pub fn dim(&self) -> usize {
        self.acf.len()
    }

    pub fn acf(&self) -> &[f64] {
        &self.acf
    }

    pub fn r0(&self) -> f64 {
        self.acf[0]
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.acf[i.abs_diff(j)])
    }
}

/// Gaussian threshold `τ ~ N(d·1, sigma_diag·I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdModel {
    pub d: f64,
    pub sigma_diag: f64,
    pub dim: usize,
}

impl ThresholdModel {
    pub fn new(d: f64, sigma_diag: f64, dim: usize) -> Result<Self> {
        if !(sigma_diag >= 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("threshold needs finite d and sigma >= 0, got d = {d}, sigma = {sigma_diag}")));
        }
        Ok(ThresholdModel { d, sigma_diag, dim })
    }
}

/// One-bit samples (`N × N_x`, one column per snapshot) with the threshold
/// and, when simulated, input realizations that produced them.
#[derive(Debug, Clone)]
pub struct SignDataset {
    pub y: DMatrix<i8>,
    pub tau: Option<DMatrix<f64>>,
    pub x: Option<DMatrix<f64>>,
    pub seed: u64,
    pub d: f64,
    pub sigma_diag: f64,
}

impl SignDataset {
    pub fn dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.y.ncols()
    }

    /// Dataset of the snapshots at `columns`, in order (used for resampling).
    pub fn select_snapshots(&self, columns: &[usize]) -> SignDataset {
        let pick_f = |m: &DMatrix<f64>| m.select_columns(columns.iter());
        SignDataset {
            y: self.y.select_columns(columns.iter()),
            tau: self.tau.as_ref().map(pick_f),
            x: self.x.as_ref().map(pick_f),
            seed: self.seed,
            d: self.d,
            sigma_diag: self.sigma_diag,
        }
    }
}

/// `sign(0)` is taken as `+1`.
#[inline]
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Draw `n_snapshots` independent snapshots `x(k) ~ N(0, R_x)`,
/// `τ(k) ~ N(d·1, Σ)` and record `y = sign(x - τ)`.
///
/// Snapshot `k` draws its input from stream `2k` and its threshold from
/// stream `2k + 1` of `seed`, so the result does not depend on scheduling.
pub fn sample_dataset(sig: &SignalModel, thr: &ThresholdModel, n_snapshots: usize, seed: u64) -> Result<SignDataset> {
    let n = sig.dim();
    if thr.dim != n {
        return Err(Error::Shape(format!("signal dimension {n} != threshold dimension {}", thr.dim)));
    }
    if n_snapshots == 0 {
        return Err(Error::Domain("n_snapshots must be positive".into()));
    }
    let mut x = DMatrix::<f64>::zeros(n, n_snapshots);
    let mut tau = DMatrix::<f64>::zeros(n, n_snapshots);
    let mut y = DMatrix::<i8>::zeros(n, n_snapshots);
    let chol = &sig.chol;
    let tau_sd = thr.sigma_diag.sqrt();
    x.as_mut_slice()
        .par_chunks_mut(n)
        .zip(tau.as_mut_slice().par_chunks_mut(n))
        .zip(y.as_mut_slice().par_chunks_mut(n))
        .enumerate()
        .for_each(|(k, ((xc, tc), yc))| {
            let mut zs = NormalStream::new(seed, 2 * k as u64);
            let z: Vec<f64> = (0..n).map(|_| zs.next_normal()).collect();
            let mut ts = NormalStream::new(seed, 2 * k as u64 + 1);
            for i in 0..n {
                let mut acc = 0.0;
                for (j, zj) in z.iter().enumerate().take(i + 1) {
                    acc += chol[(i, j)] * zj;
                }
                xc[i] = acc;
                tc[i] = thr.d + tau_sd * ts.next_normal();
                yc[i] = sign(xc[i] - tc[i]);
            }
        });
    Ok(SignDataset { y, tau: Some(tau), x: Some(x), seed, d: thr.d, sigma_diag: thr.sigma_diag })
}

fn y_as_f64(ds: &SignDataset) -> DMatrix<f64> {
    ds.y.map(f64::from)
}

/// Sample covariance `(1/N_x) Σ y(k) y(k)ᵀ` and its diagonal averages by lag.
pub fn sample_autocorr(ds: &SignDataset) -> (DMatrix<f64>, Vec<f64>) {
    let y = y_as_f64(ds);
    // sums of ±1 products are integers, exact in f64
    let r = (&y * y.transpose()) / ds.snapshots() as f64;
    let lags = lag_average(&r);
    (r, lags)
}

/// Mean of each diagonal of a square matrix, indexed by lag.
pub fn lag_average(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    (0..n)
        .map(|l| (0..n - l).map(|i| m[(i + l, i)] + m[(i, i + l)]).sum::<f64>() / (2 * (n - l)) as f64)
        .collect()
}

/// Average of all entries of the snapshot mean vector.
pub fn sample_mean(ds: &SignDataset) -> f64 {
    let total: i64 = ds.y.iter().map(|&v| v as i64).sum();
    total as f64 / (ds.dim() * ds.snapshots()) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossTarget {
    Thresholds,
    Inputs,
}

/// Sample cross-correlation `(1/N_x) Σ y(k) v(k)ᵀ` with `v` the
/// thresholds or the inputs.
pub fn sample_crosscorr(ds: &SignDataset, against: CrossTarget) -> Result<DMatrix<f64>> {
    let v = match against {
        CrossTarget::Thresholds => ds.tau.as_ref().ok_or(Error::NotRetained("thresholds"))?,
        CrossTarget::Inputs => ds.x.as_ref().ok_or(Error::NotRetained("inputs"))?,
    };
    let y = y_as_f64(ds);
    Ok((&y * v.transpose()) / ds.snapshots() as f64)
}

/// All statistics the recovery pipeline reads from a dataset.
#[derive(Debug, Clone)]
pub struct SampleStats {
    pub r_y_hat: DMatrix<f64>,
    pub r_y_lag: Vec<f64>,
    pub mu_hat: f64,
    pub r_ytau_hat: Option<DMatrix<f64>>,
}

impl SampleStats {
    pub fn compute(ds: &SignDataset) -> Self {
        let (r_y_hat, r_y_lag) = sample_autocorr(ds);
        SampleStats {
            r_y_hat,
            r_y_lag,
            mu_hat: sample_mean(ds),
            r_ytau_hat: sample_crosscorr(ds, CrossTarget::Thresholds).ok(),
        }
    }
}
