//! Randomized checks of the invariants across modules.

use std::f64::consts::PI;

use proptest::prelude::*;

use crate::branch::{lambda_bounds, solve_at_amplitude, BranchOptions, Sign};
use crate::model::{f_lambda, h_lambda, potential_lambda, ProblemParams};
use crate::numeric::ode::Tolerances;
use crate::shooting::{integrate, verify_segment_inequalities, RadialSolution};
use crate::specfun::{bessel_j0, bessel_j0_prime, dirichlet_eigen, neumann_eigen};
use crate::timemap::{self, limits, phi_bar};
use crate::verify::phi_direct;

/// Admissible `s` for `λ`, drawn through `t = √λ s ∈ ]-1, 30[`.
fn admissible() -> impl Strategy<Value = (f64, f64)> {
    (-1.0f64..2.0, -0.999f64..30.0).prop_map(|(e, t)| {
        let lambda = 10f64.powf(e);
        (lambda, t / lambda.sqrt())
    })
}

fn shot() -> impl Strategy<Value = (f64, f64)> {
    (0.5f64..60.0, -0.95f64..1.0, 0u8..2).prop_map(|(lambda, a, big)| {
        // half the shots start above 1, up to 20
        let t = if big == 1 { 1.0 + 19.0 * a.abs() } else { a };
        (lambda, t / lambda.sqrt())
    })
}

fn run(lambda: f64, h0: f64, tol: Tolerances) -> RadialSolution {
    integrate(&ProblemParams::new(lambda, 1.0).unwrap(), h0, tol).unwrap()
}

#[test]
fn bessel_zeros_and_interlacing_up_to_ten() {
    for k in 1..=10 {
        let (n, d) = (
            neumann_eigen(k, 1.0).unwrap(),
            dirichlet_eigen(k, 1.0).unwrap(),
        );
        assert!(bessel_j0_prime(n.zero).unwrap().abs() < 1e-11);
        assert!(bessel_j0(d.zero).unwrap().abs() < 1e-11);
        assert!(d.nu < n.mu && n.mu < dirichlet_eigen(k + 1, 1.0).unwrap().nu);
    }
}

#[test]
fn neumann_modes_solve_the_radial_eigenproblem() {
    let d = 5e-5;
    for k in 1..=10 {
        let m = neumann_eigen(k, 1.0).unwrap();
        let mut worst: f64 = 0.0;
        let mut rho = 0.01;
        while rho < 1.0 - d {
            let (a, b, c) = (m.eval(rho - d), m.eval(rho), m.eval(rho + d));
            let lap = (a - 2.0 * b + c) / (d * d) + (c - a) / (2.0 * d * rho);
            worst = worst.max((lap + m.mu * b).abs());
            rho += 1e-3;
        }
        assert!(worst < 1e-6 * m.mu, "k = {k}: {worst}");
    }
}

#[test]
fn time_map_limits_are_approached_monotonically() {
    for lambda in [0.3, 1.0, 7.0] {
        let p = ProblemParams::new(lambda, 1.0).unwrap();
        let lim = limits(lambda);
        let dist = |h: f64, target: f64| (timemap::phi(&p, h).unwrap().phi - target).abs();
        let sl = p.sqrt_lambda();
        let small: Vec<f64> = (1..=6)
            .map(|i| dist(10f64.powi(-i) / sl, lim.zero_plus))
            .collect();
        let large: Vec<f64> = (1..=6)
            .map(|i| dist(10f64.powi(i) / sl, lim.plus_infinity))
            .collect();
        let neg: Vec<f64> = (1..=6)
            .map(|i| dist(-(10f64.powi(-i)) / sl, lim.zero_minus))
            .collect();
        let floor: Vec<f64> = [0.9, 0.99, 0.999, 1.0 - 1e-5, 1.0 - 1e-7, 1.0 - 1e-9]
            .iter()
            .map(|&a| dist(-a / sl, lim.floor))
            .collect();
        for (name, v) in [
            ("0+", &small),
            ("inf", &large),
            ("0-", &neg),
            ("floor", &floor),
        ] {
            assert!(
                v.windows(2).all(|w| w[1] < w[0]),
                "lambda {lambda}, {name}: {v:?}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn potential_derivative_is_the_nonlinearity((lambda, s) in admissible()) {
        let p = ProblemParams::new(lambda, 1.0).unwrap();
        let d = 1e-5 * p.gap(s) / p.sqrt_lambda();
        let fd = (potential_lambda(&p, s + d).unwrap() - potential_lambda(&p, s - d).unwrap()) / (2.0 * d);
        let f = f_lambda(&p, s).unwrap();
        prop_assert!((fd - f).abs() < 1e-6 * (1.0 + f.abs()), "{fd} vs {f}");
    }

    #[test]
    fn potential_peaks_only_at_zero((lambda, s) in admissible()) {
        let p = ProblemParams::new(lambda, 1.0).unwrap();
        let v = potential_lambda(&p, s).unwrap();
        let peak = if s == 0.0 { v == 0.0 } else { v < 0.0 };
        prop_assert!(peak, "F({s}) = {v}");
    }

    #[test]
    fn linear_part_and_h_recover_f((lambda, s) in admissible()) {
        let p = ProblemParams::new(lambda, 1.0).unwrap();
        let h = h_lambda(&p, s).unwrap();
        let f = f_lambda(&p, s).unwrap();
        let scale = (2.0 * lambda * s).abs().max(h.abs()).max(f64::MIN_POSITIVE);
        prop_assert!((2.0 * lambda * s - h + f).abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn time_map_scaling_identity((lambda, h) in admissible()) {
        prop_assume!(h != 0.0);
        let p = ProblemParams::new(lambda, 1.0).unwrap();
        let s = p.sqrt_lambda() * h;
        let lhs = 2f64.sqrt() * p.sqrt_lambda() * phi_direct(&p, h).unwrap();
        let rhs = phi_bar(s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn time_map_has_the_sign_of_h((lambda, h) in admissible()) {
        prop_assume!(h != 0.0);
        let p = ProblemParams::new(lambda, 1.0).unwrap();
        let v = timemap::phi(&p, h).unwrap().phi;
        prop_assert!(v * h > 0.0);
        prop_assert!(v.abs() < PI / (2.0 * lambda.sqrt()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shots_stay_admissible((lambda, h0) in shot()) {
        let sol = run(lambda, h0, Tolerances::default());
        prop_assert!(sol.min_admissibility() > 0.0);
        // the state carries ln(1 + √λ w), finite exactly when the gap is positive
        prop_assert!(sol.log_gap.iter().all(|q| q.is_finite()));
    }

    #[test]
    fn energy_identity_on_every_interval((lambda, h0) in shot()) {
        let sol = run(lambda, h0, Tolerances::default());
        for e in sol.energy_identity() {
            prop_assert!(e.relative() < 1e-7, "[{}, {}]: {}", e.r1, e.r2, e.relative());
        }
    }

    #[test]
    fn node_count_survives_tighter_tolerances((lambda, h0) in shot()) {
        let a = run(lambda, h0, Tolerances::default());
        // a zero grazing the end of the interval is not a stable feature
        let end = a.sample_at(a.end_rho).unwrap();
        let amp = a.sup_w.abs().max(a.inf_w.abs());
        prop_assume!(end.w.abs() > 1e-6 * amp);
        let b = run(lambda, h0, Tolerances::default().tightened(10.0));
        prop_assert_eq!(a.node_count(), b.node_count());
    }

    #[test]
    fn complete_segments_satisfy_every_inequality((lambda, h0) in shot()) {
        let sol = run(lambda, h0, Tolerances::default());
        prop_assume!(sol.classification_error.is_none());
        for seg in &sol.segments {
            let rep = verify_segment_inequalities(&sol, seg, 6).unwrap();
            let bad: Vec<_> = rep.failures(1e-8).map(|c| (c.name.clone(), c.relative())).collect();
            prop_assert!(bad.is_empty(), "{:?}: {:?}", seg.case_tag, bad);
        }
    }

    #[test]
    fn small_amplitude_follows_the_mode(k in 1usize..=3, e in -8.0f64..-5.0) {
        let h0 = 10f64.powf(e);
        let m = neumann_eigen(k, 1.0).unwrap();
        let sol = run(0.5 * m.mu, h0, Tolerances::default());
        let dist = sol.resample(301).unwrap().iter().map(|s| (s.w - h0 * m.eval(s.rho)).abs()).fold(0.0, f64::max);
        prop_assert!(dist <= 1e-4 * h0, "{}", dist / h0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn branch_points_recheck_independently(k in 1usize..=3, e in -3.0f64..2.0) {
        let opts = BranchOptions::default();
        let p = solve_at_amplitude(k, Sign::Plus, 10f64.powf(e), &opts).unwrap();
        let b = lambda_bounds(k, 1.0).unwrap();
        prop_assert!(p.certified);
        prop_assert_eq!(p.node_count, k);
        prop_assert!(p.lambda > 0.0 && b.contains(p.lambda));
    }
}
