use bstirap_core::atom::*;
use bstirap_core::domain::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mixing_angle_identities(p in 0.01..60.0f64, s in 0.01..60.0f64, d in 0.5..80.0f64) {
        let m = mixing_angles(p, s, d);
        let th = m.theta.unwrap();
        prop_assert!((th.tan() - p / s).abs() <= 1e-12 * (1.0 + p / s));
        prop_assert!(((2.0 * m.psi).tan() - 2.0 * m.omega / d).abs() <= 1e-12 * (1.0 + 2.0 * m.omega / d));
    }

    #[test]
    fn dressed_states_diagonalize(p in 0.01..60.0f64, s in 0.01..60.0f64, d in 0.5..80.0f64) {
        let f = dressed_frame(p, s, d).unwrap();
        let omega = p.hypot(s);
        prop_assert!(f.lambda_d.abs() <= 1e-9 * (omega + d));
        prop_assert!((f.lambda_b1 + omega * f.psi.tan()).abs() <= 1e-9 * (omega + d));
        prop_assert!((f.lambda_b2 - omega / f.psi.tan()).abs() <= 1e-9 * (omega + d));
        let h = hamiltonian(p, s, d, 0.0);
        for (v, l) in [(f.b1, f.lambda_b1), (f.b2, f.lambda_b2), (f.d, f.lambda_d)] {
            for i in 0..3 {
                let hv: f64 = (0..3).map(|j| h[i][j] * v[j]).sum();
                prop_assert!((hv - l * v[i]).abs() <= 1e-9 * (omega + d));
            }
        }
    }
}

#[test]
fn projections_complete_along_entrance_run() {
    let grid = make_grid(-8.0, 8.0, 4096, 0.0, 1).unwrap();
    let slice = gaussian_entrance(&InputPulseSpec::default(), &grid).unwrap();
    for q in [0.1, 1.0, 10.0] {
        let params = MediumParams::new(q, 40.0).unwrap();
        let traj = integrate_schrodinger(&slice, &params, &grid).unwrap();
        let pr = projections(&traj, &slice, &params).unwrap();
        let mut min_b1: f64 = 1.0;
        for i in 0..slice.len() {
            if let (Some(b1), Some(b2), Some(d)) = (pr.b1[i], pr.b2[i], pr.d[i]) {
                assert!((b1 + b2 + d - 1.0).abs() <= 1e-7);
                min_b1 = min_b1.min(b1);
            }
        }
        assert!(min_b1 >= 0.95, "min |<b1|phi>|^2 = {min_b1}");
    }
}
