//! Single-atom dynamics in the pump/Stokes fields: the RWA Hamiltonian,
//! dressed states and mixing angles, fixed-step integration of the
//! amplitude equations along τ, and adiabatic-following diagnostics.
//!
//! The integrator works with complex envelopes `G = Ω·e^{iφ}` in a frame
//! where the couplings carry the phases and the detunings stay at their
//! entrance values:
//!
//! ```text
//! i ḃ₁ = −G_p* b₂
//! i ḃ₂ = −G_p b₁ + Δ_p0 b₂ − G_s b₃
//! i ḃ₃ = −G_s* b₂ + δ0 b₃
//! ```
//!
//! This is the phase-transformed form of the real-coupling equations with
//! `Δ_p = Δ_p0 + φ̇_p` and `δ = δ0 + φ̇_p − φ̇_s`, related by
//! `a₁ = b₁`, `a₂ = b₂ e^{−iφ_p}`, `a₃ = b₃ e^{−i(φ_p−φ_s)}`.
//! Trajectories handed out by [`integrate_schrodinger`] are in the
//! real-coupling frame.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{FieldSlice, MediumParams, SimulationGrid, TauGrid};
use crate::error::{Error, Result};
use crate::math::{self, dot3};

pub type Matrix3 = [[f64; 3]; 3];
pub type Vector3 = [f64; 3];
pub type State = [Complex64; 3];

/// Largest tolerated deviation of `‖a‖²` from 1 before a trajectory is
/// rejected.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// RWA Hamiltonian in the bare basis `{|1⟩, |2⟩, |3⟩}`, in units of 1/T.
pub fn hamiltonian(omega_p: f64, omega_s: f64, delta_p: f64, delta_two: f64) -> Matrix3 {
    [
        [0.0, -omega_p, 0.0],
        [-omega_p, delta_p, -omega_s],
        [0.0, -omega_s, delta_two],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingAngles {
    /// `tan θ = Ω_p/Ω_s`, in `[0, π/2]`. Undefined when both fields vanish.
    pub theta: Option<f64>,
    /// `tan 2ψ = 2Ω/Δ_p`, in `[0, π/2)`.
    pub psi: f64,
    /// Generalized Rabi frequency `√(Ω_p²+Ω_s²)`.
    pub omega: f64,
}

pub fn mixing_angles(omega_p: f64, omega_s: f64, delta_p: f64) -> MixingAngles {
    let omega = omega_p.hypot(omega_s);
    let theta = if omega == 0.0 { None } else { Some(omega_p.atan2(omega_s)) };
    let psi = 0.5 * (2.0 * omega).atan2(delta_p);
    MixingAngles { theta, psi, omega }
}

/// Dressed eigenbasis at two-photon resonance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedFrame {
    pub theta: f64,
    pub psi: f64,
    pub lambda_b1: f64,
    pub lambda_b2: f64,
    pub lambda_d: f64,
    pub b1: Vector3,
    pub b2: Vector3,
    pub d: Vector3,
}

fn analytic_vectors(theta: f64, psi: f64) -> [Vector3; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    [
        [cp * st, sp, cp * ct],
        [sp * st, -cp, sp * ct],
        [ct, 0.0, -st],
    ]
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Pairs numerically diagonalized eigenpairs with reference vectors by
/// maximal total overlap, with the sign of each vector aligned to its
/// reference.
fn pair_by_overlap(reference: &[Vector3; 3], values: &[f64; 3], vectors: &[Vector3; 3]) -> ([f64; 3], [Vector3; 3]) {
    let overlap = |i: usize, j: usize| dot3(&reference[i], &vectors[j]);
    let best = PERMUTATIONS
        .iter()
        .max_by(|a, b| {
            let sa: f64 = (0..3).map(|i| overlap(i, a[i]).abs()).sum();
            let sb: f64 = (0..3).map(|i| overlap(i, b[i]).abs()).sum();
            sa.partial_cmp(&sb).unwrap_or(core::cmp::Ordering::Equal)
        })
        .copied()
        .unwrap_or([0, 1, 2]);
    let mut out_vals = [0.0; 3];
    let mut out_vecs = [[0.0; 3]; 3];
    for i in 0..3 {
        let j = best[i];
        let sign = if overlap(i, j) < 0.0 { -1.0 } else { 1.0 };
        out_vals[i] = values[j];
        out_vecs[i] = [sign * vectors[j][0], sign * vectors[j][1], sign * vectors[j][2]];
    }
    (out_vals, out_vecs)
}

/// Bright states `b₁`, `b₂` and the dark state `d` at exact two-photon
/// resonance. Eigenvalues come from diagonalizing the Hamiltonian and are
/// assigned to the analytic vectors by overlap rather than by ordering.
pub fn dressed_frame(omega_p: f64, omega_s: f64, delta_p: f64) -> Result<DressedFrame> {
    let angles = mixing_angles(omega_p, omega_s, delta_p);
    let theta = angles.theta.ok_or(Error::DegenerateFrame)?;
    let [b1, b2, d] = analytic_vectors(theta, angles.psi);
    let (values, vectors) = math::symmetric_eigen(&hamiltonian(omega_p, omega_s, delta_p, 0.0));
    let (lambda, _) = pair_by_overlap(&[b1, b2, d], &values, &vectors);
    Ok(DressedFrame {
        theta,
        psi: angles.psi,
        lambda_b1: lambda[0],
        lambda_b2: lambda[1],
        lambda_d: lambda[2],
        b1,
        b2,
        d,
    })
}

/// Dressed frame away from two-photon resonance: eigenvectors of the full
/// Hamiltonian, labelled by overlap with the resonant analytic states.
pub fn dressed_frame_detuned(omega_p: f64, omega_s: f64, delta_p: f64, delta_two: f64) -> Result<DressedFrame> {
    if delta_two == 0.0 {
        return dressed_frame(omega_p, omega_s, delta_p);
    }
    let angles = mixing_angles(omega_p, omega_s, delta_p);
    let theta = angles.theta.ok_or(Error::DegenerateFrame)?;
    let reference = analytic_vectors(theta, angles.psi);
    let (values, vectors) = math::symmetric_eigen(&hamiltonian(omega_p, omega_s, delta_p, delta_two));
    let (lambda, [b1, b2, d]) = pair_by_overlap(&reference, &values, &vectors);
    Ok(DressedFrame {
        theta,
        psi: angles.psi,
        lambda_b1: lambda[0],
        lambda_b2: lambda[1],
        lambda_d: lambda[2],
        b1,
        b2,
        d,
    })
}

/// Complex amplitudes `(a₁, a₂, a₃)` over the τ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTrajectory {
    pub tau: TauGrid,
    pub amplitudes: Vec<State>,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Population of bare level `level` (0-based) at sample `i`.
    pub fn population(&self, i: usize, level: usize) -> f64 {
        self.amplitudes[i][level].norm_sqr()
    }

    pub fn populations(&self, level: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a[level].norm_sqr()).collect()
    }

    /// Final-state population at the last grid time, `|a₃(τ_max)|²`.
    pub fn efficiency(&self) -> f64 {
        self.amplitudes.last().map_or(0.0, |a| a[2].norm_sqr())
    }

    /// `max_τ |‖a‖² − 1|`.
    pub fn norm_drift(&self) -> f64 {
        norm_drift(&self.amplitudes)
    }
}

fn norm_drift(states: &[State]) -> f64 {
    states
        .iter()
        .map(|a| (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

#[inline]
fn rhs(b: &State, gp: Complex64, gs: Complex64, delta_p: f64, delta_two: f64) -> State {
    let i = Complex64::i();
    [
        i * gp.conj() * b[1],
        i * (gp * b[0] - b[1] * delta_p + gs * b[2]),
        i * (gs.conj() * b[1] - b[2] * delta_two),
    ]
}

#[inline]
fn axpy(b: &State, h: f64, k: &State) -> State {
    [b[0] + k[0] * h, b[1] + k[1] * h, b[2] + k[2] * h]
}

/// Integrates the phase-carrying amplitude equations with classical RK4,
/// `substeps` steps per τ interval, starting from `|1⟩` at the first
/// sample. Envelopes between samples come from four-point cubic
/// interpolation. Returns the amplitudes in the phase-carrying frame.
pub(crate) fn integrate_envelopes(
    pump: &[Complex64],
    stokes: &[Complex64],
    params: &MediumParams,
    tau: TauGrid,
    substeps: usize,
) -> Result<Vec<State>> {
    let n = tau.len;
    if pump.len() != n || stokes.len() != n {
        return Err(Error::GridMismatch { expected: n, found: pump.len().min(stokes.len()) });
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    let mut b: State = [one, zero, zero];
    out.push(b);
    let s = substeps.max(1);
    let h = tau.step / s as f64;
    let (dp, dt) = (params.delta_p, params.delta_two);
    let inv = 1.0 / s as f64;
    for k in 0..n - 1 {
        let mut g0 = (pump[k], stokes[k]);
        for j in 0..s {
            let tm = (j as f64 + 0.5) * inv;
            let t1 = (j + 1) as f64 * inv;
            let gm = (math::interp_cubic_c(pump, k, tm), math::interp_cubic_c(stokes, k, tm));
            let g1 = if j + 1 == s {
                (pump[k + 1], stokes[k + 1])
            } else {
                (math::interp_cubic_c(pump, k, t1), math::interp_cubic_c(stokes, k, t1))
            };
            let k1 = rhs(&b, g0.0, g0.1, dp, dt);
            let k2 = rhs(&axpy(&b, 0.5 * h, &k1), gm.0, gm.1, dp, dt);
            let k3 = rhs(&axpy(&b, 0.5 * h, &k2), gm.0, gm.1, dp, dt);
            let k4 = rhs(&axpy(&b, h, &k3), g1.0, g1.1, dp, dt);
            for c in 0..3 {
                b[c] += (k1[c] + (k2[c] + k3[c]) * 2.0 + k4[c]) * (h / 6.0);
            }
            g0 = g1;
        }
        out.push(b);
    }
    let drift = norm_drift(&out);
    if !drift.is_finite() || drift > NORM_TOLERANCE {
        return Err(Error::NormDrift { drift, tolerance: NORM_TOLERANCE });
    }
    Ok(out)
}

/// Moves phase-carrying amplitudes into the real-coupling frame.
pub(crate) fn to_bare_frame(states: &[State], fields: &FieldSlice) -> Vec<State> {
    states
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (pp, ps) = (fields.phi_p[i], fields.phi_s[i]);
            [
                b[0],
                b[1] * Complex64::from_polar(1.0, -pp),
                b[2] * Complex64::from_polar(1.0, ps - pp),
            ]
        })
        .collect()
}

/// Solves the amplitude equations along τ for the given fields, starting
/// from the ground state at `tau_min`.
pub fn integrate_schrodinger(fields: &FieldSlice, params: &MediumParams, grid: &SimulationGrid) -> Result<AmplitudeTrajectory> {
    if fields.len() != grid.tau.len {
        return Err(Error::GridMismatch { expected: grid.tau.len, found: fields.len() });
    }
    let (pump, stokes) = fields.envelopes();
    let states = integrate_envelopes(&pump, &stokes, params, grid.tau, grid.substeps)?;
    Ok(AmplitudeTrajectory { tau: grid.tau, amplitudes: to_bare_frame(&states, fields) })
}

/// Populations of the dressed states along τ. `None` where the frame is
/// undefined (both fields zero).
#[derive(Clone, Debug, PartialEq)]
pub struct DressedProjections {
    pub b1: Vec<Option<f64>>,
    pub b2: Vec<Option<f64>>,
    pub d: Vec<Option<f64>>,
}

fn project(v: &Vector3, a: &State) -> f64 {
    (a[0] * v[0] + a[1] * v[1] + a[2] * v[2]).norm_sqr()
}

/// Projects the state onto the local dressed frame, using the effective
/// detunings carried by the field phases.
pub fn projections(traj: &AmplitudeTrajectory, fields: &FieldSlice, params: &MediumParams) -> Result<DressedProjections> {
    if traj.len() != fields.len() {
        return Err(Error::GridMismatch { expected: fields.len(), found: traj.len() });
    }
    let detunings = fields.effective_detunings(params);
    let n = fields.len();
    let mut out = DressedProjections {
        b1: Vec::with_capacity(n),
        b2: Vec::with_capacity(n),
        d: Vec::with_capacity(n),
    };
    for (i, a) in traj.amplitudes.iter().enumerate() {
        let frame = dressed_frame_detuned(
            fields.omega_p[i],
            fields.omega_s[i],
            detunings.delta_p_or(i, params.delta_p),
            detunings.delta_two_or(i, params.delta_two),
        );
        match frame {
            Ok(f) => {
                out.b1.push(Some(project(&f.b1, a)));
                out.b2.push(Some(project(&f.b2, a)));
                out.d.push(Some(project(&f.d, a)));
            }
            Err(_) => {
                out.b1.push(None);
                out.b2.push(None);
                out.d.push(None);
            }
        }
    }
    Ok(out)
}

/// Nonadiabatic coupling ratios
/// `|⟨b₂|ḃ₁⟩|/|λ_b1−λ_b2|` and `|⟨d|ḃ₁⟩|/|λ_b1−λ_d|` along τ.
#[derive(Clone, Debug, PartialEq)]
pub struct AdiabaticityMargins {
    pub bright: Vec<Option<f64>>,
    pub dark: Vec<Option<f64>>,
}

impl AdiabaticityMargins {
    /// Largest margin over samples where `include` holds.
    pub fn max_where(&self, include: impl Fn(usize) -> bool) -> f64 {
        self.bright
            .iter()
            .zip(&self.dark)
            .enumerate()
            .filter(|(i, _)| include(*i))
            .filter_map(|(_, (b, d))| Some(b.as_ref()?.max(*d.as_ref()?)))
            .fold(0.0, f64::max)
    }

    /// Number of samples where the frame or its derivative is undefined.
    pub fn undefined_count(&self) -> usize {
        self.bright.iter().filter(|m| m.is_none()).count()
    }
}

pub fn adiabaticity_margins(fields: &FieldSlice, params: &MediumParams) -> AdiabaticityMargins {
    let n = fields.len();
    let detunings = fields.effective_detunings(params);
    let frames: Vec<Option<DressedFrame>> = (0..n)
        .map(|i| {
            dressed_frame(fields.omega_p[i], fields.omega_s[i], detunings.delta_p_or(i, params.delta_p)).ok()
        })
        .collect();
    let h = fields.tau.step;
    let mut bright = Vec::with_capacity(n);
    let mut dark = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
        let margin = match (&frames[lo], &frames[i], &frames[hi]) {
            (Some(a), Some(f), Some(b)) if hi > lo => {
                let span = (hi - lo) as f64 * h;
                let db1 = [
                    (b.b1[0] - a.b1[0]) / span,
                    (b.b1[1] - a.b1[1]) / span,
                    (b.b1[2] - a.b1[2]) / span,
                ];
                let gap2 = (f.lambda_b1 - f.lambda_b2).abs();
                let gapd = (f.lambda_b1 - f.lambda_d).abs();
                Some((dot3(&f.b2, &db1).abs() / gap2, dot3(&f.d, &db1).abs() / gapd))
            }
            _ => None,
        };
        bright.push(margin.map(|m| m.0));
        dark.push(margin.map(|m| m.1));
    }
    AdiabaticityMargins { bright, dark }
}

/// Checks `|Δ_p T| ≫ 1` and `Ω₀²T/Δ_p ≫ 1` against `factor` (how many
/// times larger than 1 counts as "much larger").
pub fn smooth_pulse_adiabatic(omega0: f64, delta_p: f64, factor: f64) -> bool {
    delta_p.abs() >= factor && omega0 * omega0 / delta_p.abs() >= factor
}
