//! Shared fixtures for the benchmarks.

use onebit_core::protocol::Scenario;
use onebit_core::SampleStats;

/// Lag statistics of one simulated dataset, `n=5`, `rho=0.5`, `r0=1`, `d=0.3`, `sigma=0.1`.
pub fn sample_stats(n_x: usize, seed: u64) -> SampleStats {
    let scenario = Scenario { n: 5, rho: 0.5, r0: 1.0, d: 0.3, sigma: 0.1 };
    let ds = scenario.simulate(n_x, seed).expect("valid scenario");
    SampleStats::compute(&ds)
}
