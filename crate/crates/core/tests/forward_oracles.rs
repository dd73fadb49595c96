mod common;

use common::sign_correlation_oracle;
use onebit_core::arcsine::{ry_reference, LagParams};
use onebit_core::pade::{h_s, PadeOptions};
use onebit_core::quadrature::{j_s, GLRule};

const GRID: [(f64, f64, f64); 8] = [
    (1.0, 0.3, 0.3),
    (1.4, 0.2, 0.3),
    (1.0, -0.6, 0.5),
    (2.0, 1.5, 0.4),
    (0.7, 0.0, 0.2),
    (1.1, 0.55, 0.7),
    (1.3, -0.2, 1.2),
    (1.0, 0.3, -0.3),
];

#[test]
fn reference_matches_orthant_integral() {
    for (p0, pl, d) in GRID {
        let r = ry_reference(LagParams::new(p0, pl).unwrap(), d, 1e-12).unwrap();
        let o = sign_correlation_oracle(p0, pl, d);
        assert!((r - o).abs() < 1e-8, "({p0},{pl},{d}): {r} vs {o}");
    }
}

#[test]
fn gauss_legendre_matches_orthant_integral() {
    let rule = GLRule::new(13).unwrap();
    // 13 nodes hold 1e-6 for moderate correlation; near |p_l| = p0 the
    // integrand sharpens around π/4 and the error grows (5.5e-6 at 0.75)
    for (p0, pl, d) in GRID.into_iter().filter(|g| g.2.abs() <= 0.5 && (g.1 / g.0).abs() <= 0.6) {
        let v = j_s(LagParams::new(p0, pl).unwrap(), d, &rule).unwrap();
        let o = sign_correlation_oracle(p0, pl, d);
        assert!((v - o).abs() < 1e-6, "({p0},{pl},{d}): {v} vs {o}");
    }
}

#[test]
fn pade_within_paper_regime_tolerance() {
    for (p0, pl, d) in GRID.into_iter().filter(|g| g.2.abs() <= 0.3) {
        let v = h_s(LagParams::new(p0, pl).unwrap(), d, &PadeOptions::default()).unwrap();
        let o = sign_correlation_oracle(p0, pl, d);
        assert!((v - o).abs() < 5e-3, "({p0},{pl},{d}): {v} vs {o}");
    }
}

#[test]
fn pade_bounded_jump_between_pieces() {
    use onebit_core::pade::build_piecewise;
    use std::f64::consts::FRAC_PI_2;
    for (p0, pl, d) in GRID.into_iter().filter(|g| g.2.abs() <= 0.3) {
        let p = LagParams::new(p0, pl).unwrap();
        let model = build_piecewise(p, d, &PadeOptions::default()).unwrap();
        for pieces in [&model.d1, &model.d2] {
            let max = (0..=200).map(|i| pieces[0].eval(FRAC_PI_2 * i as f64 / 200.0).abs()).fold(0.0, f64::max).max(1e-300);
            for w in pieces.windows(2) {
                let edge = w[0].segment.interval().1;
                let jump = (w[0].eval(edge) - w[1].eval(edge)).abs();
                assert!(jump < 0.05 * max, "({p0},{pl},{d}) jump {jump} vs scale {max}");
            }
        }
    }
}
