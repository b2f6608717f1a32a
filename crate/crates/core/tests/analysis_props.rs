use proptest::prelude::*;

use degen_front::analysis::sobolev::radial_sobolev_quotient;
use degen_front::analysis::{
    estimate_sobolev_constant, lady_bound, lady_threshold, make_iteration_params, support_radius, waiting_time,
};
use degen_front::laws::make_constant;
use degen_front::solver::{run, Boundary, Grid, InitialProfile, SimConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lady_closed_form_matches_equality_recursion(
        c in 0.2f64..8.0,
        b in 1.05f64..6.0,
        delta in 0.05f64..1.5,
        scale in 0.05f64..1.0,
        n in 1u32..15,
    ) {
        let y0 = scale * lady_threshold(c, b, delta);
        let mut y = y0;
        for k in 0..n {
            y = c * b.powi(k as i32) * y.powf(1.0 + delta);
        }
        prop_assume!(y.is_normal());
        let bound = lady_bound(c, b, delta, y0, n);
        prop_assert!(((bound - y) / y).abs() < 1e-9);
    }

    #[test]
    fn exponent_identity_on_random_lattice(n in 3u32..40, lam in 0.01f64..1.0, eps in 0.05f64..0.95) {
        let p = make_iteration_params(n, lam, eps, 1.0, 0.2, 1.0).unwrap();
        let identity = (2.0 - 2.0 * (1.0 + p.j) * p.k) / (1.0 - p.k);
        prop_assert!((identity - p.lambda_small).abs() < 1e-12);
        prop_assert!(p.beta_time > 0.0);
        prop_assert!((p.eps_n(0) - 1.0).abs() < 1e-15);
        for k in 0..10 {
            prop_assert!(p.eps_n(k + 1) < p.eps_n(k) && p.eps_n(k + 1) > eps);
        }
    }

    #[test]
    fn sobolev_quotients_stay_below_estimate(
        n in 3u32..6,
        w1 in 0.3f64..3.0,
        w2 in 0.3f64..3.0,
        mix in 0.0f64..1.0,
        q in 0.0f64..2.0,
    ) {
        // Two-scale profile with extra algebraic decay.
        let e = (n as f64 - 2.0) / 2.0 + q;
        let psi = move |r: f64| {
            (1.0 - mix) * (-(r / w1).powi(2)).exp() + mix * (1.0 + (r / w2).powi(2)).powf(-e)
        };
        let dpsi = move |r: f64| {
            (1.0 - mix) * (-2.0 * r / (w1 * w1)) * (-(r / w1).powi(2)).exp()
                + mix * (-2.0 * e * r / (w2 * w2)) * (1.0 + (r / w2).powi(2)).powf(-e - 1.0)
        };
        let s = estimate_sobolev_constant(n).unwrap();
        let quotient = radial_sobolev_quotient(n, psi, dpsi).unwrap();
        prop_assert!(quotient <= s.raw_max * (1.0 + 1e-9), "{quotient} > {}", s.raw_max);
    }
}

#[test]
fn sobolev_needs_three_dimensions() {
    assert!(estimate_sobolev_constant(2).is_err());
}

#[test]
fn heat_waiting_times_and_radii_order_with_eps() {
    let series = run(&SimConfig {
        law: make_constant(0.5).unwrap(),
        grid: Grid::interval(4.0, 321).unwrap(),
        cfl: 0.5,
        t_end: 0.3,
        snapshot_every: 0.005,
        boundary: Boundary::Neumann,
        initial: InitialProfile::Bump { width: 1.0 },
        max_steps: 10_000_000,
    })
    .unwrap();
    let ladder = [1e-2, 1e-3, 1e-4, 1e-6, 1e-8];
    let times: Vec<f64> = ladder.iter().map(|&e| waiting_time(&series, 1.5, e).unwrap().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[1] < w[0]), "{times:?}");
    for snap in &series.snapshots {
        let r: Vec<f64> = ladder.iter().map(|&e| support_radius(&series.grid, &snap.values, e)).collect();
        assert!(r.windows(2).all(|w| w[1] >= w[0]));
    }
}
