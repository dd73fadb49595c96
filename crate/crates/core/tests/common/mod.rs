//! Independent numerical oracles for the integration tests. None of these
//! call into the library's special functions or quadrature.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Composite Simpson rule with `2n` panels, refined by one Richardson step.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let rule = |m: usize| {
        let h = (b - a) / (2 * m) as f64;
        let mut s = f(a) + f(b);
        for i in 1..2 * m {
            s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let (coarse, fine) = (rule(n), rule(2 * n));
    fine + (fine - coarse) / 15.0
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper normal tail by direct integration of the density.
pub fn tail_oracle(x: f64) -> f64 {
    if x >= 0.0 {
        simpson(normal_pdf, x, x + 40.0, 20_000)
    } else {
        1.0 - tail_oracle(-x)
    }
}

/// `Γ(s, x) = ∫_x^∞ t^{s−1} e^{−t} dt`, with `t = x + u²` to remove the
/// endpoint singularity at `x = 0, s = 1/2`.
pub fn upper_gamma_oracle(s: f64, x: f64) -> f64 {
    simpson(|u: f64| 2.0 * u * (x + u * u).powf(s - 1.0) * (-(x + u * u)).exp(), 0.0, 12.0, 40_000)
}

/// `E{sign(w_i) sign(w_j)}` for `w ~ N(−d, [[p0, pl], [pl, p0]])` via the
/// one-dimensional orthant representation.
pub fn sign_correlation_oracle(p0: f64, pl: f64, d: f64) -> f64 {
    let a = d / p0.sqrt();
    let rho = pl / p0;
    let s = (1.0 - rho * rho).sqrt();
    // P(u_i > a, u_j > a) = ∫_a^∞ φ(z) P(u_i > a | u_j = z) dz
    let both = simpson(|z| normal_pdf(z) * tail_oracle_fast((a - rho * z) / s), a, a + 40.0, 4000);
    let single = tail_oracle(a);
    4.0 * both - 4.0 * single + 1.0
}

/// Coarser density integration for the inner integrand.
fn tail_oracle_fast(x: f64) -> f64 {
    if x >= 0.0 {
        simpson(normal_pdf, x, x + 12.0, 600)
    } else {
        1.0 - tail_oracle_fast(-x)
    }
}

/// Standard normal pairs from a generator unrelated to the library's streams.
pub struct Normals {
    rng: ChaCha20Rng,
}

impl Normals {
    pub fn new(seed: u64) -> Self {
        Normals { rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    /// Marsaglia polar method.
    pub fn pair(&mut self) -> (f64, f64) {
        loop {
            let u: f64 = 2.0 * self.rng.gen::<f64>() - 1.0;
            let v: f64 = 2.0 * self.rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                return (u * m, v * m);
            }
        }
    }
}

/// Mean and standard error of a sample.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
