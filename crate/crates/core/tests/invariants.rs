use nalgebra::DMatrix;
use onebit_core::arcsine::{ry_reference, LagParams};
use onebit_core::bussgang::{recover_crosscorr, recover_crosscorr_grouped};
use onebit_core::pade::pade_from_taylor;
use onebit_core::quadrature::{j_s, GLRule};
use onebit_core::special::{q, q_inv, Probability};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sign_correlation_is_scale_invariant(p0 in 0.3f64..3.0, ratio in -0.95f64..0.95, d in -1.0f64..1.0, c in 0.2f64..5.0) {
        let a = ry_reference(LagParams::new(p0, ratio * p0).unwrap(), d, 1e-11).unwrap();
        let b = ry_reference(LagParams::new(c * p0, c * ratio * p0).unwrap(), c.sqrt() * d, 1e-11).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn gauss_legendre_even_in_threshold_mean(p0 in 0.5f64..2.0, ratio in -0.9f64..0.9, d in 0.0f64..0.8) {
        let rule = GLRule::new(13).unwrap();
        let p = LagParams::new(p0, ratio * p0).unwrap();
        prop_assert!((j_s(p, d, &rule).unwrap() - j_s(p, -d, &rule).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn q_inv_inverts_q(x in -7.0f64..7.0) {
        let p = q(x);
        let back = q_inv(Probability::new(p).unwrap(), 1e-15).unwrap();
        prop_assert!((q(back) - p).abs() <= 1e-14_f64.max(1e-12 * p));
    }

    #[test]
    fn pade_matches_its_moments(c in proptest::collection::vec(-1.0f64..1.0, 3), c0 in 0.5f64..2.0) {
        let coeffs = [c0, c[0], c[1], c[2]];
        if let Ok(ap) = pade_from_taylor(&coeffs, 1, 2, 0.0) {
            for (a, b) in ap.taylor(3).iter().zip(coeffs) {
                prop_assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn bussgang_groupings_agree(sigma in 0.0f64..1.0, p0 in 0.5f64..3.0, d in -1.0f64..1.0, rho in -0.9f64..0.9) {
        let n = 5;
        let r_x = DMatrix::from_fn(n, n, |i, j| rho.powi(i.abs_diff(j) as i32));
        let r_ytau = DMatrix::from_fn(n, n, |i, j| 0.02 * (i as f64) - 0.01 * (j as f64));
        let a = recover_crosscorr(&r_ytau, &r_x, sigma, p0, d).unwrap();
        let b = recover_crosscorr_grouped(&r_ytau, &r_x, sigma, p0, d).unwrap();
        prop_assert!((a - b).amax() < 1e-14);
    }
}
