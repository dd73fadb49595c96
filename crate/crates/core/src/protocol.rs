//! Experiment protocols shared by the command-line tool and the test suites:
//! simulate, recover, compare methods, and recover the input/output
//! cross-correlation.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bussgang::recover_crosscorr;
use crate::error::{Error, Result};
use crate::recovery::{mse, nmse, recover, solve_fast, solve_full_pa, Forward, Method, RecoveryOptions, RecoveryResult};
use crate::rng::uniform_stream;
use crate::signal::{sample_crosscorr, sample_dataset, toeplitz, CrossTarget, SampleStats, SignDataset, SignalModel, ThresholdModel};

/// AR(1) input with a Gaussian dither threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub rho: f64,
    pub r0: f64,
    pub d: f64,
    pub sigma: f64,
}

impl Scenario {
    pub fn signal(&self) -> Result<SignalModel> {
        SignalModel::ar1(self.rho, self.r0, self.n)
    }

    pub fn thresholds(&self) -> Result<ThresholdModel> {
        ThresholdModel::new(self.d, self.sigma, self.n)
    }

    /// True input autocorrelation at lags `0..n`.
    pub fn truth(&self) -> Vec<f64> {
        (0..self.n as i32).map(|l| self.r0 * self.rho.powi(l)).collect()
    }

    pub fn simulate(&self, n_x: usize, seed: u64) -> Result<SignDataset> {
        sample_dataset(&self.signal()?, &self.thresholds()?, n_x, seed)
    }
}

/// Per-method threshold settings `(d, σ²)` of the autocorrelation experiments.
pub fn acf_thresholds(method: Method) -> (f64, f64) {
    match method {
        Method::PadeFull | Method::PadeFast => (0.3, 0.4),
        Method::GaussLegendre | Method::MonteCarlo => (0.3, 0.1),
    }
}

/// Per-method threshold settings `(d, σ²)` of the cross-correlation experiment.
pub fn crosscorr_thresholds(method: Method) -> (f64, f64) {
    match method {
        Method::PadeFull | Method::PadeFast => (0.1, 0.2),
        Method::GaussLegendre | Method::MonteCarlo => (0.3, 0.1),
    }
}

/// Distinct, reproducible seed for trial `trial` of configuration `config`.
pub fn trial_seed(base: u64, config: u64, trial: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(config.wrapping_mul(1_000_003)).wrapping_add(trial)
}

/// Recovered `(r̂0, r̂1, ..)` next to the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfOutcome {
    pub truth: Vec<f64>,
    pub result: RecoveryResult,
}

impl AcfOutcome {
    /// `r̂0` followed by `r̂_l`.
    pub fn estimate(&self) -> Vec<f64> {
        std::iter::once(self.result.r0_hat).chain(self.result.r_hat.iter().copied()).collect()
    }

    /// Mean absolute error over lags `0..=L`.
    pub fn mae(&self) -> f64 {
        let est = self.estimate();
        est.iter().zip(&self.truth).map(|(a, b)| (a - b).abs()).sum::<f64>() / est.len() as f64
    }
}

/// Recover lags `0..=max_lag` of a dataset whose truth is known.
pub fn acf_from_dataset(ds: &SignDataset, truth: &[f64], method: Method, max_lag: usize, opts: &RecoveryOptions) -> Result<AcfOutcome> {
    let stats = SampleStats::compute(ds);
    let result = recover(method, &stats, max_lag, ds.d, ds.sigma_diag, opts)?;
    Ok(AcfOutcome { truth: truth[..=max_lag].to_vec(), result })
}

pub fn acf_trial(scenario: &Scenario, n_x: usize, seed: u64, method: Method, max_lag: usize, opts: &RecoveryOptions) -> Result<AcfOutcome> {
    let ds = scenario.simulate(n_x, seed)?;
    let opts = RecoveryOptions { seed, ..*opts };
    acf_from_dataset(&ds, &scenario.truth(), method, max_lag, &opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub scenario: Scenario,
    pub lags: usize,
    pub trials: usize,
    pub n_x: Vec<usize>,
    pub methods: Vec<Method>,
    pub seed: u64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            scenario: Scenario { n: 5, rho: 0.5, r0: 1.0, d: 0.3, sigma: 0.1 },
            lags: 4,
            trials: 5,
            n_x: vec![1000, 3000, 6000, 10000],
            methods: vec![Method::PadeFast, Method::GaussLegendre, Method::MonteCarlo],
            seed: 0,
        }
    }
}

/// One `(method, N_x)` cell averaged over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: Method,
    pub n_x: usize,
    pub mse: f64,
    /// Standard deviation of the per-trial MSE.
    pub mse_std: f64,
    pub nmse_r0: f64,
    pub wall_time_s: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Method comparison: every method sees the same datasets in each trial.
pub fn benchmark(spec: &BenchmarkSpec, opts: &RecoveryOptions) -> Result<Vec<BenchmarkRow>> {
    if spec.lags == 0 || spec.lags >= spec.scenario.n {
        return Err(Error::Shape(format!("lags must lie in 1..{}, got {}", spec.scenario.n, spec.lags)));
    }
    if spec.trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let truth = spec.scenario.truth();
    let mut rows = Vec::new();
    for (k, &n_x) in spec.n_x.iter().enumerate() {
        let datasets: Vec<SignDataset> = (0..spec.trials)
            .map(|e| spec.scenario.simulate(n_x, trial_seed(spec.seed, k as u64, e as u64)))
            .collect::<Result<_>>()?;
        for &method in &spec.methods {
            let mut per_trial_mse = Vec::with_capacity(spec.trials);
            let mut per_trial_nmse = Vec::with_capacity(spec.trials);
            let start = Instant::now();
            for ds in &datasets {
                let trial_opts = RecoveryOptions { seed: ds.seed, ..*opts };
                let out = acf_from_dataset(ds, &truth, method, spec.lags, &trial_opts)?;
                per_trial_mse.push(mse(&[truth[1..=spec.lags].to_vec()], &[out.result.r_hat.clone()])?);
                per_trial_nmse.push(nmse(truth[0], out.result.r0_hat)?);
            }
            let elapsed = start.elapsed().as_secs_f64() / spec.trials as f64;
            let (mse_mean, mse_std) = mean_std(&per_trial_mse);
            rows.push(BenchmarkRow {
                method,
                n_x,
                mse: mse_mean,
                mse_std,
                nmse_r0: mean_std(&per_trial_nmse).0,
                wall_time_s: elapsed,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingComparison {
    pub fast_s: f64,
    pub full_s: f64,
}

impl TimingComparison {
    pub fn ratio(&self) -> f64 {
        self.full_s / self.fast_s
    }
}

/// Wall time of the scalar and two-variable Padé solvers on the same statistics.
pub fn timing_comparison(stats: &SampleStats, lags: usize, d: f64, opts: &RecoveryOptions) -> Result<TimingComparison> {
    let r = &stats.r_y_lag[1..=lags];
    let forward = Forward::Pade(opts.pade);
    let t = Instant::now();
    solve_fast(&forward, r, stats.mu_hat, d, opts)?;
    let fast_s = t.elapsed().as_secs_f64();
    let t = Instant::now();
    solve_full_pa(r, d, opts)?;
    let full_s = t.elapsed().as_secs_f64();
    Ok(TimingComparison { fast_s, full_s })
}

/// Sample oracle `R̂_yx` next to its modified-Bussgang estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossOutcome {
    pub oracle: DMatrix<f64>,
    pub estimate: DMatrix<f64>,
    pub result: RecoveryResult,
}

impl CrossOutcome {
    pub fn difference(&self) -> DMatrix<f64> {
        &self.estimate - &self.oracle
    }
}

/// Recover the ACF with `method`, then `R_yx` from `R̂_yτ`, the recovered
/// Toeplitz `R̂_x` and `p0*`; the dataset must retain thresholds and inputs.
pub fn crosscorr_from_dataset(ds: &SignDataset, method: Method, opts: &RecoveryOptions) -> Result<CrossOutcome> {
    let n = ds.dim();
    if n < 2 {
        return Err(Error::Shape("cross-correlation recovery needs at least two entries".into()));
    }
    let stats = SampleStats::compute(ds);
    let result = recover(method, &stats, n - 1, ds.d, ds.sigma_diag, opts)?;
    let acf: Vec<f64> = std::iter::once(result.r0_hat).chain(result.r_hat.iter().copied()).collect();
    let r_x = toeplitz(&acf)?;
    let r_ytau = stats.r_ytau_hat.clone().ok_or(Error::NotRetained("thresholds"))?;
    let estimate = recover_crosscorr(&r_ytau, &r_x, ds.sigma_diag, result.p0_star, ds.d)?;
    let oracle = sample_crosscorr(ds, CrossTarget::Inputs)?;
    Ok(CrossOutcome { oracle, estimate, result })
}

/// Entrywise bootstrap standard deviation of `estimate − oracle`, resampling
/// snapshots with replacement and rerunning the whole pipeline.
pub fn crosscorr_bootstrap_std(ds: &SignDataset, method: Method, opts: &RecoveryOptions, replicates: usize, seed: u64) -> Result<DMatrix<f64>> {
    if replicates < 2 {
        return Err(Error::Domain("bootstrap needs at least two replicates".into()));
    }
    let n = ds.dim();
    let n_x = ds.snapshots();
    let mut rng = uniform_stream(seed, 0xB007);
    let mut sum = DMatrix::<f64>::zeros(n, n);
    let mut sum_sq = DMatrix::<f64>::zeros(n, n);
    for _ in 0..replicates {
        let cols: Vec<usize> = (0..n_x).map(|_| rng.gen_range(0..n_x)).collect();
        let diff = crosscorr_from_dataset(&ds.select_snapshots(&cols), method, opts)?.difference();
        sum += &diff;
        sum_sq += diff.component_mul(&diff);
    }
    let b = replicates as f64;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let m = sum[(i, j)] / b;
        ((sum_sq[(i, j)] / b - m * m).max(0.0) * b / (b - 1.0)).sqrt()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_truth_is_ar1() {
        let s = Scenario { n: 4, rho: 0.5, r0: 2.0, d: 0.3, sigma: 0.1 };
        assert_eq!(s.truth(), vec![2.0, 1.0, 0.5, 0.25]);
    }

    #[test]
    fn trial_seeds_distinct() {
        let mut seen = std::collections::HashSet::new();
        for k in 0..4 {
            for e in 0..15 {
                assert!(seen.insert(trial_seed(7, k, e)));
            }
        }
    }

    #[test]
    fn gauss_legendre_trial_recovers_ar1() {
        let s = Scenario { n: 20, rho: 0.5, r0: 1.0, d: 0.3, sigma: 0.1 };
        let out = acf_trial(&s, 5000, 3, Method::GaussLegendre, 5, &RecoveryOptions::default()).unwrap();
        assert_eq!(out.estimate().len(), 6);
        assert!(out.mae() < 0.08, "mae {}", out.mae());
    }

    #[test]
    fn benchmark_shape() {
        let spec = BenchmarkSpec { trials: 2, n_x: vec![500, 1000], methods: vec![Method::GaussLegendre], ..BenchmarkSpec::default() };
        let rows = benchmark(&spec, &RecoveryOptions::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.mse.is_finite() && r.mse_std >= 0.0 && r.nmse_r0 >= 0.0));
        let bad = BenchmarkSpec { lags: 5, ..BenchmarkSpec::default() };
        assert!(benchmark(&bad, &RecoveryOptions::default()).is_err());
    }

    #[test]
    fn crosscorr_pipeline_shapes() {
        let s = Scenario { n: 6, rho: 0.5, r0: 1.0, d: 0.3, sigma: 0.1 };
        let ds = s.simulate(4000, 1).unwrap();
        let out = crosscorr_from_dataset(&ds, Method::GaussLegendre, &RecoveryOptions::default()).unwrap();
        assert_eq!(out.estimate.shape(), (6, 6));
        // zero-lag entries agree in sign with the sample oracle
        for i in 0..6 {
            assert!(out.estimate[(i, i)].is_finite());
            assert_eq!(out.estimate[(i, i)].signum(), out.oracle[(i, i)].signum());
        }
        let sd = crosscorr_bootstrap_std(&ds, Method::GaussLegendre, &RecoveryOptions::default(), 5, 2).unwrap();
        assert!(sd.iter().all(|v| v.is_finite() && *v > 0.0));
    }
}
