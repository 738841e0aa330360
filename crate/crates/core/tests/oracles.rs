use bstirap_core::atom::{integrate_schrodinger, State};
use bstirap_core::domain::{make_grid, FieldSlice, MediumParams, SimulationGrid};
use num_complex::Complex64;
use proptest::prelude::*;

#[derive(Clone, Copy, Debug)]
struct SmoothFields {
    amp_p: f64,
    amp_s: f64,
    center_p: f64,
    center_s: f64,
    width_p: f64,
    width_s: f64,
    chirp: f64,
}

impl SmoothFields {
    fn omega_p(&self, t: f64) -> f64 {
        let x = (t - self.center_p) / self.width_p;
        self.amp_p * (-x * x).exp()
    }

    fn omega_s(&self, t: f64) -> f64 {
        let x = (t - self.center_s) / self.width_s;
        self.amp_s * (-x * x).exp()
    }

    fn phi_p(&self, t: f64) -> f64 {
        self.chirp * t * t
    }

    fn phi_p_rate(&self, t: f64) -> f64 {
        2.0 * self.chirp * t
    }

    fn slice(&self, grid: &SimulationGrid) -> FieldSlice {
        let pump: Vec<Complex64> = grid.tau.iter().map(|t| Complex64::from_polar(self.omega_p(t), self.phi_p(t))).collect();
        let stokes: Vec<Complex64> = grid.tau.iter().map(|t| Complex64::new(self.omega_s(t), 0.0)).collect();
        FieldSlice::from_envelopes(grid.tau, &pump, &stokes)
    }
}

fn fields_strategy() -> impl Strategy<Value = SmoothFields> {
    (4.0..10.0f64, 4.0..10.0f64, -1.5..0.0f64, 0.0..1.5f64, 0.7..1.3f64, 0.7..1.3f64, -0.3..0.3f64).prop_map(
        |(amp_p, amp_s, center_p, center_s, width_p, width_s, chirp)| SmoothFields {
            amp_p,
            amp_s,
            center_p,
            center_s,
            width_p,
            width_s,
            chirp,
        },
    )
}

type CMatrix = [[Complex64; 3]; 3];

fn mat_vec(m: &CMatrix, v: &State) -> State {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (i, row) in m.iter().enumerate() {
        out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

/// `exp(-i·H·h)·v` by Taylor series; `H·h` is tiny on the oracle grid.
fn exp_step(h_mat: &[[f64; 3]; 3], h: f64, v: &State) -> State {
    let gen: CMatrix = core::array::from_fn(|i| core::array::from_fn(|j| Complex64::new(0.0, -h * h_mat[i][j])));
    let mut term = *v;
    let mut sum = *v;
    for k in 1..=10 {
        term = mat_vec(&gen, &term);
        for c in term.iter_mut() {
            *c /= k as f64;
        }
        for i in 0..3 {
            sum[i] += term[i];
        }
    }
    sum
}

/// Brute-force reference: piecewise-constant midpoint Hamiltonian with
/// the exact field functions, `factor` steps per grid interval. Returns
/// the state at each grid node in the real-coupling frame.
fn brute_force(f: &SmoothFields, params: &MediumParams, grid: &SimulationGrid, factor: usize) -> Vec<State> {
    let h = grid.dtau() / factor as f64;
    let mut state: State = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let mut out = vec![state];
    for k in 0..grid.tau.len - 1 {
        let t0 = grid.tau.tau(k);
        for j in 0..factor {
            let t = t0 + (j as f64 + 0.5) * h;
            let dp = params.delta_p + f.phi_p_rate(t);
            let dt = params.delta_two + f.phi_p_rate(t);
            let (p, s) = (f.omega_p(t), f.omega_s(t));
            let ham = [[0.0, -p, 0.0], [-p, dp, -s], [0.0, -s, dt]];
            state = exp_step(&ham, h, &state);
        }
        out.push(state);
    }
    out
}

fn max_amplitude_error(a: &[State], b: &[State]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..3).map(move |i| (x[i] - y[i]).norm()))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn matches_brute_force_on_finer_grid(
        f in fields_strategy(),
        delta_p in 4.0..10.0f64,
        delta_two in -1.0..1.0f64,
    ) {
        let params = MediumParams::with_strengths(1.0, 1.0, delta_p, delta_two).unwrap();
        let grid = make_grid(-6.0, 6.0, 1024, 0.0, 1).unwrap();
        let traj = integrate_schrodinger(&f.slice(&grid), &params, &grid).unwrap();
        let reference = brute_force(&f, &params, &grid, 100);
        let err = max_amplitude_error(&traj.amplitudes, &reference);
        prop_assert!(err <= 1e-5, "max amplitude error {err:e}");
    }

    #[test]
    fn norm_conserved_on_fine_grid(f in fields_strategy(), delta_p in 4.0..40.0f64) {
        let params = MediumParams::new(1.0, delta_p).unwrap();
        let grid = make_grid(-6.0, 6.0, 4096, 0.0, 1).unwrap();
        let traj = integrate_schrodinger(&f.slice(&grid), &params, &grid).unwrap();
        prop_assert!(traj.norm_drift() <= 1e-8, "drift {:e}", traj.norm_drift());
    }
}

#[test]
fn fourth_order_step_halving() {
    let f = SmoothFields { amp_p: 3.0, amp_s: 3.0, center_p: -0.6, center_s: 0.6, width_p: 1.0, width_s: 1.0, chirp: 0.0 };
    let params = MediumParams::new(1.0, 3.0).unwrap();
    let final_state = |n: usize| {
        let grid = make_grid(-6.0, 6.0, n, 0.0, 1).unwrap().with_substeps(1).unwrap();
        let traj = integrate_schrodinger(&f.slice(&grid), &params, &grid).unwrap();
        *traj.amplitudes.last().unwrap()
    };
    let (s1, s2, s4) = (final_state(513), final_state(1025), final_state(2049));
    let e1 = max_amplitude_error(&[s1], &[s2]);
    let e2 = max_amplitude_error(&[s2], &[s4]);
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "halving ratio {ratio}");
}
