use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use onebit_core::io::{read_dataset, write_dataset, write_matrix, write_result_json, write_stats, write_table};
use onebit_core::protocol::{benchmark, crosscorr_from_dataset, crosscorr_thresholds, timing_comparison, BenchmarkSpec, Scenario};
use onebit_core::recovery::recover;
use onebit_core::signal::lag_average;
use onebit_core::{Method, RecoveryOptions, SampleStats};

use crate::config::{pick, FileConfig};
use crate::Common;

/// Settings shared by every subcommand after merging flags and config.
pub struct Settings {
    pub file: FileConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub methods: Option<Vec<Method>>,
    pub opts: RecoveryOptions,
}

impl Settings {
    pub fn resolve(common: &Common) -> Result<Self> {
        let file = match &common.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let seed = pick(common.seed, file.seed, 0);
        let out = pick(common.out.clone(), file.out.clone(), PathBuf::from("."));
        let methods = if common.method.is_empty() { file.methods()? } else { Some(common.method.clone()) };
        let opts = RecoveryOptions {
            n_q: pick(common.nq, file.nq, 13),
            n_m: pick(common.nm, file.nm, 2000),
            seed,
            ..RecoveryOptions::default()
        };
        Ok(Settings { file, seed, out, methods, opts })
    }

    fn methods_or(&self, default: &[Method]) -> Vec<Method> {
        self.methods.clone().unwrap_or_else(|| default.to_vec())
    }

    fn scenario(&self, flags: &ScenarioFlags, default_n: usize, thresholds: (f64, f64)) -> Scenario {
        Scenario {
            n: pick(flags.n, self.file.n, default_n),
            rho: pick(flags.rho, self.file.rho, 0.5),
            r0: pick(flags.r0, self.file.r0, 1.0),
            d: pick(flags.d, self.file.d, thresholds.0),
            sigma: pick(flags.sigma, self.file.sigma, thresholds.1),
        }
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating output directory {}", self.out.display()))?;
        Ok(self.out.join(name))
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct ScenarioFlags {
    /// Signal dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// AR(1) coefficient of the input.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Input variance.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Threshold mean.
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    /// Threshold variance (diagonal).
    #[arg(long)]
    pub sigma: Option<f64>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn f(v: f64) -> String {
    v.to_string()
}

pub fn simulate(s: &Settings, flags: &ScenarioFlags, nx: Option<usize>) -> Result<Vec<PathBuf>> {
    let scenario = s.scenario(flags, 31, (0.3, 0.1));
    let n_x = pick(nx, s.file.nx.as_ref().map(|v| v.to_vec()[0]), 10_000);
    let ds = scenario.simulate(n_x, s.seed)?;
    let stats = SampleStats::compute(&ds);

    let y_path = s.path("dataset.csv")?;
    let mut w = create(&y_path)?;
    write_dataset(&mut w, &ds)?;
    finish(w, &y_path)?;

    let stats_path = s.path("stats.csv")?;
    let mut w = create(&stats_path)?;
    write_stats(&mut w, &stats, n_x)?;
    finish(w, &stats_path)?;

    let truth_path = s.path("truth.csv")?;
    let rows: Vec<Vec<String>> = scenario.truth().iter().enumerate().map(|(l, r)| vec![l.to_string(), f(*r)]).collect();
    let mut w = create(&truth_path)?;
    write_table(&mut w, &[("rho", f(scenario.rho)), ("r0", f(scenario.r0))], &["lag", "r_x"], &rows)?;
    finish(w, &truth_path)?;
    Ok(vec![y_path, stats_path, truth_path])
}

fn read_truth(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("lag"))
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (_, v) = l.split_once(',').with_context(|| format!("malformed truth row '{l}'"))?;
            v.trim().parse::<f64>().with_context(|| format!("malformed truth value '{v}'"))
        })
        .collect()
}

pub fn recover_cmd(s: &Settings, dataset: &Path, truth: Option<&Path>, lags: Option<usize>) -> Result<Vec<PathBuf>> {
    let ds = read_dataset(BufReader::new(File::open(dataset).with_context(|| format!("opening dataset {}", dataset.display()))?))
        .with_context(|| format!("reading dataset {}", dataset.display()))?;
    let stats = SampleStats::compute(&ds);
    let max_lag = pick(lags, s.file.lags, (ds.dim() - 1).min(30));
    let truth_path = truth.map(Path::to_path_buf).or_else(|| {
        let sibling = dataset.with_file_name("truth.csv");
        sibling.exists().then_some(sibling)
    });
    let truth = truth_path.as_deref().map(read_truth).transpose()?;
    let mut written = Vec::new();
    for method in s.methods_or(&[Method::GaussLegendre]) {
        let res = recover(method, &stats, max_lag, ds.d, ds.sigma_diag, &s.opts).with_context(|| format!("{method} recovery failed"))?;
        if res.over_subtracted {
            eprintln!("warning: {method}: recovered r0 = {} <= 0 (threshold variance exceeds p0*)", res.r0_hat);
        }
        let json = s.path(&format!("recovery_{method}.json"))?;
        let mut w = create(&json)?;
        write_result_json(&mut w, &res)?;
        finish(w, &json)?;
        written.push(json);
        if let Some(t) = &truth {
            if t.len() <= max_lag {
                bail!("truth file has {} lags, recovery needs {}", t.len(), max_lag + 1);
            }
            let est: Vec<f64> = std::iter::once(res.r0_hat).chain(res.r_hat.iter().copied()).collect();
            let rows: Vec<Vec<String>> = est.iter().enumerate().map(|(l, e)| vec![l.to_string(), f(t[l]), f(*e)]).collect();
            let csv = s.path(&format!("recovery_{method}.csv"))?;
            let mut w = create(&csv)?;
            write_table(&mut w, &[("method", method.to_string()), ("d", f(ds.d)), ("sigma", f(ds.sigma_diag))], &["lag", "true_r", "est_r"], &rows)?;
            finish(w, &csv)?;
            written.push(csv);
        }
    }
    Ok(written)
}

pub fn benchmark_cmd(s: &Settings, flags: &ScenarioFlags) -> Result<Vec<PathBuf>> {
    let defaults = BenchmarkSpec::default();
    let spec = BenchmarkSpec {
        scenario: s.scenario(flags, defaults.scenario.n, (defaults.scenario.d, defaults.scenario.sigma)),
        lags: s.file.lags.unwrap_or(defaults.lags),
        trials: s.file.trials.unwrap_or(defaults.trials),
        n_x: s.file.nx.as_ref().map(|v| v.to_vec()).unwrap_or(defaults.n_x),
        methods: s.methods_or(&defaults.methods),
        seed: s.seed,
    };
    let rows = benchmark(&spec, &s.opts)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.method.to_string(), r.n_x.to_string(), f(r.mse), f(r.nmse_r0), f(r.wall_time_s)])
        .collect();
    let meta = [("N", spec.scenario.n.to_string()), ("L", spec.lags.to_string()), ("E", spec.trials.to_string()), ("d", f(spec.scenario.d)), ("sigma", f(spec.scenario.sigma)), ("seed", s.seed.to_string())];
    let path = s.path("benchmark.csv")?;
    let mut w = create(&path)?;
    write_table(&mut w, &meta, &["method", "N_x", "mse", "nmse_r0", "wall_time_s"], &table)?;
    finish(w, &path)?;

    // full two-variable Padé path against the fast one on the largest sample size
    let n_x = *spec.n_x.iter().max().context("empty N_x list")?;
    let ds = spec.scenario.simulate(n_x, s.seed)?;
    let timing = timing_comparison(&SampleStats::compute(&ds), spec.lags, spec.scenario.d, &s.opts)?;
    let tpath = s.path("timing_ratio.csv")?;
    let mut w = create(&tpath)?;
    write_table(
        &mut w,
        &[("N_x", n_x.to_string()), ("L", spec.lags.to_string())],
        &["fast_s", "full_s", "ratio"],
        &[vec![f(timing.fast_s), f(timing.full_s), f(timing.ratio())]],
    )?;
    finish(w, &tpath)?;
    Ok(vec![path, tpath])
}

pub fn crosscorr_cmd(s: &Settings, flags: &ScenarioFlags, nx: Option<usize>) -> Result<Vec<PathBuf>> {
    let n_x = pick(nx, s.file.nx.as_ref().map(|v| v.to_vec()[0]), 10_000);
    let mut written = Vec::new();
    for method in s.methods_or(&[Method::PadeFast, Method::GaussLegendre, Method::MonteCarlo]) {
        let scenario = s.scenario(flags, 30, crosscorr_thresholds(method));
        let ds = scenario.simulate(n_x, s.seed)?;
        let out = crosscorr_from_dataset(&ds, method, &s.opts).with_context(|| format!("{method} cross-correlation failed"))?;
        let (oracle, estimate) = (lag_average(&out.oracle), lag_average(&out.estimate));
        let rows: Vec<Vec<String>> = oracle.iter().zip(&estimate).enumerate().map(|(l, (a, b))| vec![l.to_string(), f(*a), f(*b)]).collect();
        let meta = [("method", method.to_string()), ("N", scenario.n.to_string()), ("N_x", n_x.to_string()), ("d", f(scenario.d)), ("sigma", f(scenario.sigma)), ("seed", s.seed.to_string())];
        let csv = s.path(&format!("crosscorr_{method}.csv"))?;
        let mut w = create(&csv)?;
        write_table(&mut w, &meta, &["lag", "sample_r_yx", "est_r_yx"], &rows)?;
        finish(w, &csv)?;
        written.push(csv);
        for (tag, m) in [("sample", &out.oracle), ("estimate", &out.estimate)] {
            let p = s.path(&format!("crosscorr_{method}_{tag}.csv"))?;
            let mut w = create(&p)?;
            write_matrix(&mut w, m, scenario.d, scenario.sigma, out.result.p0_star)?;
            finish(w, &p)?;
            written.push(p);
        }
    }
    Ok(written)
}
