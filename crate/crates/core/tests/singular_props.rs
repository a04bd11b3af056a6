mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rosenau_waves::model::{validate_problem, FluxSpec};
use rosenau_waves::singular::{
    branch_solve, branch_sweep, eps_star, eps_star_point, hadeler_rothe, z0_profile, ROOT_RESIDUAL,
};

use common::{reference, simpson};

fn residual(alpha: f64, eps: f64, g: f64, w: f64) -> f64 {
    eps * w / (1.0 + w * w).powf(alpha) - g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roots_satisfy_equation(alpha in 0.0f64..4.0, eps in 0.05f64..5.0, s in 0.0f64..=1.0) {
        let p = reference(alpha);
        let v = 2.0 * s;
        let b = branch_solve(&p, alpha, eps, v).unwrap();
        let g = p.g(v);
        for w in [b.w_plus, b.w_minus].into_iter().flatten() {
            prop_assert!(w <= 0.0);
            prop_assert!(residual(alpha, eps, g, w).abs() < ROOT_RESIDUAL);
        }
        if let (Some(wp), Some(wm)) = (b.w_plus, b.w_minus) {
            prop_assert!(wp >= wm);
        }
    }

    #[test]
    fn single_root_below_half(alpha in 0.0f64..0.5, eps in 0.01f64..5.0, s in 0.001f64..0.999) {
        let p = reference(alpha);
        let b = branch_solve(&p, alpha, eps, 2.0 * s).unwrap();
        prop_assert!(b.w_plus.is_some());
        prop_assert!(b.w_minus.is_none());
    }

    /// At alpha = 1/2 the response is bounded by eps, so a root exists
    /// exactly when eps exceeds |g(v)|.
    #[test]
    fn single_root_at_half_above_s(eps in 0.5001f64..5.0, s in 0.001f64..0.999) {
        let p = reference(0.5);
        let b = branch_solve(&p, 0.5, eps, 2.0 * s).unwrap();
        prop_assert!(b.w_plus.is_some());
        prop_assert!(b.w_minus.is_none());
    }
}

#[test]
fn full_branch_iff_above_h() {
    for alpha in [0.6, 0.75, 1.0, 1.5, 3.0] {
        let p = reference(alpha);
        let h = p.h_closed_form(alpha).unwrap();
        let covered = |eps: f64| {
            branch_sweep(&p, alpha, eps, 401)
                .unwrap()
                .iter()
                .all(|b| b.w_plus.is_some())
        };
        assert!(covered(h), "alpha {alpha} at H");
        assert!(covered(h * (1.0 + 1e-6)));
        assert!(covered(2.0 * h));
        assert!(!covered(h - 2e-9), "alpha {alpha} below H");
        assert!(!covered(0.9 * h));
    }
}

#[test]
fn hadeler_rothe_equals_closed_form() {
    for alpha in [0.6, 0.75, 1.0, 1.5, 3.0] {
        let p = reference(alpha);
        let (_, value) = hadeler_rothe(&p, alpha).unwrap();
        let closed = p.h_closed_form(alpha).unwrap();
        assert!(
            (value - closed).abs() < 1e-8,
            "alpha {alpha}: {value} vs {closed}"
        );
    }
}

#[test]
fn hadeler_rothe_minimiser_reference() {
    // (1 + A^2 S^2)^alpha / A is minimal at A = 1 / (S sqrt(2 alpha - 1)).
    for alpha in [0.75, 1.0, 2.0] {
        let (a, _) = hadeler_rothe(&reference(alpha), alpha).unwrap();
        let expect = 1.0 / (0.5 * (2.0 * alpha - 1.0).sqrt());
        assert!((a - expect).abs() < 1e-4 * expect);
    }
}

#[test]
fn eps_star_equals_half_alpha_bound() {
    for (flux, hi, lo) in [
        (FluxSpec::burgers(), 2.0, 0.0),
        (
            FluxSpec::polynomial(vec![0.0, 0.3, 1.0, 0.2]).unwrap(),
            1.5,
            -0.5,
        ),
    ] {
        let p = validate_problem(flux, hi, lo, 0.5).unwrap();
        let b = p.bounds_report(0.5, None).half_alpha_bound;
        assert!((eps_star(&p) - b).abs() < 1e-10);
    }
}

#[test]
fn eps_star_matches_quadrature_oracle() {
    let p = validate_problem(
        FluxSpec::polynomial(vec![0.0, 0.3, 1.0, 0.2]).unwrap(),
        1.5,
        -0.5,
        0.5,
    )
    .unwrap();
    let brute = (1..=2000)
        .map(|i| {
            let v = -0.5 + 2.0 * i as f64 / 2000.0;
            simpson(|x| p.g(x), -0.5, v, 400).abs() / (v + 0.5)
        })
        .fold(0.0, f64::max);
    let e = eps_star(&p);
    assert!(e >= brute - 1e-12 && e - brute < 1e-6);
}

#[test]
fn eps_star_scales_quadratically() {
    for c in [0.1, 0.5, 2.0, 7.0] {
        let p = validate_problem(FluxSpec::burgers(), 2.0 * c, 0.0, 0.5).unwrap();
        let (v, e) = eps_star_point(&p);
        assert_abs_diff_eq!(e, 0.375 * c * c, epsilon = 1e-12 * c * c);
        assert_abs_diff_eq!(v, 1.5 * c, epsilon = 1e-6 * c);
    }
}

#[test]
fn eps_star_vanishes_with_width() {
    let mut prev = f64::INFINITY;
    for w in [1e-1, 1e-2, 1e-3, 1e-4] {
        let p = validate_problem(FluxSpec::burgers(), 1.0 + w, 1.0, 0.5).unwrap();
        let e = eps_star(&p);
        assert!(e < prev && e <= w * w);
        prev = e;
    }
}

#[test]
fn profile_is_real_above_eps_star() {
    let p = reference(0.5);
    for eps in [0.375, 0.4, 1.0] {
        let prof = z0_profile(&p, eps, 1001).unwrap();
        assert_eq!(prof.z0[0], 0.0);
        assert!(prof.z0.iter().all(|z| z.is_finite() && *z >= 0.0));
        let brute = prof.z0.iter().cloned().fold(0.0, f64::max);
        assert!(prof.z0_max >= brute);
    }
    let prof = z0_profile(&p, 0.375, 2048).unwrap();
    assert_abs_diff_eq!(prof.z0_max, (1.0f64 / 6.0).sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(prof.z0_argmax, 0.5, epsilon = 1e-6);
    assert_abs_diff_eq!(prof.predicted_min_w(1e-4), -40.824829, epsilon = 1e-5);
}
