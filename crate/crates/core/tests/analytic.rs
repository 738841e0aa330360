use std::f64::consts::FRAC_PI_2;

use bstirap_core::analytic::*;
use bstirap_core::domain::*;
use proptest::prelude::*;

fn entrance(n_tau: usize) -> (SimulationGrid, FieldSlice) {
    let grid = make_grid(-8.0, 8.0, n_tau, 20.0, 10).unwrap();
    let slice = gaussian_entrance(&InputPulseSpec::default(), &grid).unwrap();
    (grid, slice)
}

fn profiles(q: f64) -> (EntranceProfiles, MediumParams) {
    let params = MediumParams::new(q, 40.0).unwrap();
    let (_, slice) = entrance(2048);
    (EntranceProfiles::from_slice(&slice, &params).unwrap(), params)
}

/// Constant photon density `n̄` with θ falling linearly from π/2 to 0.
fn box_profiles(q: f64, n_bar: f64) -> (EntranceProfiles, MediumParams) {
    let params = MediumParams::with_strengths(q, q, 40.0, 0.0).unwrap();
    let grid = make_grid(-5.0, 5.0, 2001, 1.0, 1).unwrap();
    let amp = (q * n_bar).sqrt();
    let (p, s): (Vec<f64>, Vec<f64>) = grid
        .tau
        .iter()
        .map(|t| {
            let th = FRAC_PI_2 * (5.0 - t) / 10.0;
            (amp * th.sin(), amp * th.cos())
        })
        .unzip();
    let slice = FieldSlice::from_amplitudes(grid.tau, p, s).unwrap();
    (EntranceProfiles::from_slice(&slice, &params).unwrap(), params)
}

#[test]
fn q_examples() {
    assert!((q_of_theta(0.0, 3.0, 7.0) - 7.0).abs() < 1e-12);
    let hm = 2.0 * 3.0 * 7.0 / 10.0;
    assert!((q_of_theta(FRAC_PI_2 / 2.0, 3.0, 7.0) - hm).abs() < 1e-12);
    assert!((q_of_theta(1.1, 4.0, 4.0) - 4.0).abs() < 1e-12);
}

#[test]
fn xi_closed_form_for_constant_density() {
    for (q, n_bar) in [(1.0, 2.0), (0.5, 4.0), (3.0, 1.5)] {
        let (p, m) = box_profiles(q, n_bar);
        for (zeta, tau) in [(1.0, -3.0), (2.5, -1.0), (4.0, 0.5)] {
            let expected = tau + zeta / (q * n_bar);
            let Xi::Root(xi) = solve_xi(zeta, tau, &p, &m).unwrap() else { panic!("no root") };
            assert!((xi - expected).abs() < 1e-8, "q {q}: xi {xi} vs {expected}");
        }
    }
}

#[test]
fn entrance_characteristics_are_identity() {
    let (p, m) = profiles(0.1);
    let sol = characteristics(0.0, &p, &m).unwrap();
    for (i, t) in p.tau.iter().enumerate() {
        assert_eq!(sol.xi[i], Some(t));
        assert!((sol.theta[i] - p.theta0[i]).abs() < 1e-12);
    }
}

#[test]
fn factor_a_is_one_for_equal_strengths() {
    let (p, m) = profiles(1.0);
    for zeta in [3.0, 7.0, 20.0] {
        let sol = characteristics(zeta, &p, &m).unwrap();
        for a in sol.a.iter().flatten() {
            assert!((a - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn factor_a_at_least_one_for_weak_pump() {
    let (p, m) = profiles(0.1);
    for zeta in [1.0, 7.0, 20.0] {
        let sol = characteristics(zeta, &p, &m).unwrap();
        assert!(sol.a.iter().flatten().count() > 100);
        assert!(sol.a.iter().flatten().all(|&a| a >= 1.0));
    }
}

#[test]
fn strong_pump_steepens_theta() {
    let max_slope = |q: f64| {
        let (p, m) = profiles(q);
        let sol = characteristics(20.0, &p, &m).unwrap();
        sol.theta.windows(2).map(|w| (w[1] - w[0]).abs() / p.tau.step).fold(0.0, f64::max)
    };
    let (weak, strong) = (max_slope(0.1), max_slope(14.0));
    assert!(strong > 5.0 * weak, "slopes {weak} vs {strong}");
    let (p, m) = profiles(14.0);
    let b = breakdown_length(&p, &m).unwrap();
    assert!(b.scanned < 30.0 && b.scanned < b.estimate);
}

#[test]
fn breakdown_matches_first_zero_of_a() {
    let (p, m) = profiles(14.0);
    let zb = breakdown_length(&p, &m).unwrap().scanned;
    let min_a = |z: f64| characteristics(z, &p, &m).unwrap().min_a().unwrap();
    assert!((min_a(0.9 * zb) - 0.1).abs() < 0.02);
    assert!((min_a(0.5 * zb) - 0.5).abs() < 0.02);
}

#[test]
fn transfer_curves_ordered_inversely_in_q() {
    let curves: Vec<TransferCurve> = [0.5, 1.0, 5.0]
        .iter()
        .map(|&q| {
            let (p, m) = profiles(q);
            transfer_curve_and_zmax(&p, &m)
        })
        .collect();
    let floor = 1e-9 * curves[2].zeta_max;
    for i in (0..curves[0].zeta.len()).filter(|&i| curves[2].zeta[i] > floor) {
        assert!(curves[0].zeta[i] > curves[1].zeta[i]);
        assert!(curves[1].zeta[i] > curves[2].zeta[i]);
    }
    for c in &curves {
        assert!(c.zeta.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn adiabatic_p3_completes_before_zmax() {
    let (p, m) = profiles(0.5);
    let curve = transfer_curve_and_zmax(&p, &m);
    let end = p.tau.end();
    assert!(p3_adiabatic(0.5 * curve.zeta_max, end, &p, &m).unwrap() > 0.99);
    assert_eq!(solve_xi(1.01 * curve.zeta_max, p.tau.start, &p, &m).unwrap(), Xi::BeyondPulse);
    assert_eq!(theta_analytic(1.01 * curve.zeta_max, p.tau.start, &p, &m).unwrap(), 0.0);
}

#[test]
fn negative_depth_rejected() {
    let (p, m) = profiles(1.0);
    assert!(solve_xi(-1.0, 0.0, &p, &m).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_between_strengths(theta in 0.0..FRAC_PI_2, qp in 0.01..20.0f64, qs in 0.01..20.0f64) {
        let q = q_of_theta(theta, qp, qs);
        prop_assert!(q >= qp.min(qs) * (1.0 - 1e-12) && q <= qp.max(qs) * (1.0 + 1e-12));
    }

    #[test]
    fn nonlinear_time_is_ahead(zeta in 1e-3..20.0f64, tau in -4.0..4.0f64, q in 0.1..14.0f64) {
        let (p, m) = profiles(q);
        match solve_xi(zeta, tau, &p, &m).unwrap() {
            Xi::Root(xi) => prop_assert!(xi > tau),
            Xi::BeyondPulse => {}
        }
    }
}
