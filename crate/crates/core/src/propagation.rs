//! Field propagation through the medium and the conservation diagnostics.
//!
//! Envelopes are advanced as complex amplitudes `G = Ω·e^{iφ}`:
//!
//! ```text
//! ∂G_p/∂ζ = i·(q_p/q_s)·b₁*·b₂      ∂G_s/∂ζ = i·b₃*·b₂
//! ```
//!
//! which is the amplitude/phase pair
//! `∂Ω_p/∂ζ = −q·Im(a₁*a₂)`, `Ω_p·∂φ_p/∂ζ = q·Re(a₁*a₂)` (and likewise
//! for the Stokes field) without the `1/Ω` factor in the phase equations.
//! Each ζ step is an explicit midpoint step; the atoms are re-integrated
//! from `tau_min` at both stages.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::analytic::q_of_theta;
use crate::atom::{self, AmplitudeTrajectory, State};
use crate::domain::{gaussian_entrance, FieldSlice, InputPulseSpec, MediumParams, SimulationGrid};
use crate::error::{Error, Result};
use crate::math;

/// Complex pump and Stokes envelopes on the τ grid.
#[derive(Clone, Debug)]
struct Envelopes {
    pump: Vec<Complex64>,
    stokes: Vec<Complex64>,
}

impl Envelopes {
    fn from_slice(slice: &FieldSlice) -> Self {
        let (pump, stokes) = slice.envelopes();
        Self { pump, stokes }
    }

    fn to_slice(&self, slice_like: &SimulationGrid) -> FieldSlice {
        FieldSlice::from_envelopes(slice_like.tau, &self.pump, &self.stokes)
    }

    fn integrate(&self, params: &MediumParams, grid: &SimulationGrid) -> Result<Vec<State>> {
        atom::integrate_envelopes(&self.pump, &self.stokes, params, grid.tau, grid.substeps)
    }

    /// `self + h·(dp, ds)` with sources taken from `states`.
    fn advanced(&self, states: &[State], q: f64, h: f64) -> Self {
        let i = Complex64::i();
        let pump = self
            .pump
            .iter()
            .zip(states)
            .map(|(g, b)| g + i * b[0].conj() * b[1] * (q * h))
            .collect();
        let stokes = self
            .stokes
            .iter()
            .zip(states)
            .map(|(g, b)| g + i * b[2].conj() * b[1] * h)
            .collect();
        Self { pump, stokes }
    }

    fn all_finite(&self) -> bool {
        self.pump.iter().chain(&self.stokes).all(|g| g.re.is_finite() && g.im.is_finite())
    }
}

/// One explicit-midpoint step of size `dzeta`. `start` holds the atomic
/// states for the current fields when the caller already has them.
fn midpoint_step(
    env: &Envelopes,
    start: Option<Vec<State>>,
    params: &MediumParams,
    grid: &SimulationGrid,
    dzeta: f64,
) -> Result<Envelopes> {
    let q = params.ratio();
    let first = match start {
        Some(s) => s,
        None => env.integrate(params, grid)?,
    };
    let half = env.advanced(&first, q, 0.5 * dzeta);
    let mid_states = half.integrate(params, grid)?;
    Ok(env.advanced(&mid_states, q, dzeta))
}

/// Advances a field slice by `dzeta` through the medium.
pub fn step_depth(slice: &FieldSlice, params: &MediumParams, grid: &SimulationGrid, dzeta: f64) -> Result<FieldSlice> {
    if !(dzeta.is_finite() && dzeta > 0.0) {
        return Err(Error::InvalidParameter { name: "dzeta", reason: "must be finite and positive" });
    }
    if slice.len() != grid.tau.len {
        return Err(Error::GridMismatch { expected: grid.tau.len, found: slice.len() });
    }
    let env = Envelopes::from_slice(slice);
    let next = midpoint_step(&env, None, params, grid, dzeta)?;
    if !next.all_finite() {
        return Err(Error::NonFinite { zeta: dzeta });
    }
    Ok(next.to_slice(grid))
}

/// Rates of change of the amplitude/phase variables with depth.
/// Phase rates are `None` where the corresponding amplitude is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDerivatives {
    pub omega_p: Vec<f64>,
    pub omega_s: Vec<f64>,
    pub phi_p: Vec<Option<f64>>,
    pub phi_s: Vec<Option<f64>>,
}

/// Right-hand sides of the envelope and phase equations for given fields
/// and atomic trajectory.
pub fn field_derivatives(slice: &FieldSlice, traj: &AmplitudeTrajectory, params: &MediumParams) -> Result<FieldDerivatives> {
    if traj.len() != slice.len() {
        return Err(Error::GridMismatch { expected: slice.len(), found: traj.len() });
    }
    let q = params.ratio();
    let n = slice.len();
    let mut out = FieldDerivatives {
        omega_p: Vec::with_capacity(n),
        omega_s: Vec::with_capacity(n),
        phi_p: Vec::with_capacity(n),
        phi_s: Vec::with_capacity(n),
    };
    for (i, a) in traj.amplitudes.iter().enumerate() {
        let c12 = a[0].conj() * a[1];
        let c32 = a[2].conj() * a[1];
        out.omega_p.push(-q * c12.im);
        out.omega_s.push(-c32.im);
        let (wp, ws) = (slice.omega_p[i], slice.omega_s[i]);
        out.phi_p.push((wp > 0.0).then(|| q * c12.re / wp));
        out.phi_s.push((ws > 0.0).then(|| c32.re / ws));
    }
    Ok(out)
}

/// Per-sample diagnostics of a depth snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    /// Photon number density `Ω_p²/q_p + Ω_s²/q_s`.
    pub photon_density: Vec<f64>,
    /// Two-photon transition strength, undefined where θ is.
    pub q_two_photon: Vec<Option<f64>>,
    /// `δ0 + ∂(φ_p − φ_s)/∂τ`, defined inside the pulse overlap.
    pub delta_two: Vec<Option<f64>>,
    /// `Δ_p0 + ∂φ_p/∂τ`, defined where the pump phase is resolved.
    pub delta_p: Vec<Option<f64>>,
}

impl Diagnostics {
    /// Largest |δ_eff| over samples where it is defined.
    pub fn max_abs_delta_two(&self) -> f64 {
        self.delta_two.iter().flatten().fold(0.0, |m, d| m.max(d.abs()))
    }
}

pub fn diagnostics(slice: &FieldSlice, traj: &AmplitudeTrajectory, params: &MediumParams) -> Result<Diagnostics> {
    if traj.len() != slice.len() {
        return Err(Error::GridMismatch { expected: slice.len(), found: traj.len() });
    }
    let photon_density = (0..slice.len())
        .map(|i| params.photon_density(slice.omega_p[i], slice.omega_s[i]))
        .collect();
    let q_two_photon = (0..slice.len())
        .map(|i| slice.theta(i).map(|t| q_of_theta(t, params.q_p, params.q_s)))
        .collect();
    let det = slice.effective_detunings(params);
    Ok(Diagnostics { photon_density, q_two_photon, delta_two: det.delta_two, delta_p: det.delta_p })
}

/// Fields, atoms and diagnostics at one depth.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub zeta: f64,
    pub fields: FieldSlice,
    pub trajectory: AmplitudeTrajectory,
    pub diagnostics: Diagnostics,
    /// Mixing angle along τ; `None` where both fields vanish.
    pub theta: Vec<Option<f64>>,
}

impl Snapshot {
    fn new(zeta: f64, fields: FieldSlice, states: &[State], params: &MediumParams) -> Result<Self> {
        let trajectory = AmplitudeTrajectory { tau: fields.tau, amplitudes: atom::to_bare_frame(states, &fields) };
        let diagnostics = diagnostics(&fields, &trajectory, params)?;
        let theta = (0..fields.len()).map(|i| fields.theta(i)).collect();
        Ok(Self { zeta, fields, trajectory, diagnostics, theta })
    }

    /// Transfer efficiency `|a₃(τ_max)|²`.
    pub fn efficiency(&self) -> f64 {
        self.trajectory.efficiency()
    }
}

/// A propagation run: snapshots at increasing depth.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRecord {
    pub params: MediumParams,
    pub pulses: InputPulseSpec,
    pub grid: SimulationGrid,
    pub snapshots: Vec<Snapshot>,
}

impl SimulationRecord {
    /// `(ζ, P3(ζ))` for every snapshot.
    pub fn efficiencies(&self) -> Vec<(f64, f64)> {
        self.snapshots.iter().map(|s| (s.zeta, s.efficiency())).collect()
    }

    pub fn snapshot_at(&self, zeta: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.zeta - zeta).abs() <= 1e-9 * (1.0 + zeta.abs()))
    }

    /// `max_τ |‖a‖² − 1|` over all snapshots.
    pub fn max_norm_drift(&self) -> f64 {
        self.snapshots.iter().map(|s| s.trajectory.norm_drift()).fold(0.0, f64::max)
    }
}

/// A run that stopped early, with the snapshots recorded before the
/// failure.
#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub error: Error,
    pub partial: SimulationRecord,
}

impl core::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} (after {} snapshots)", self.error, self.partial.snapshots.len())
    }
}

impl core::error::Error for RunFailure {}

/// Propagates the entrance pulses to every requested depth.
///
/// Steps of `grid.dzeta()` are taken from ζ = 0, shortening the step that
/// would overshoot a requested snapshot so that it lands exactly on it.
/// Snapshots are returned in increasing depth order; the entrance
/// snapshot reproduces [`gaussian_entrance`].
#[allow(clippy::result_large_err)]
pub fn run(
    pulses: &InputPulseSpec,
    params: &MediumParams,
    grid: &SimulationGrid,
    snapshot_zetas: &[f64],
) -> core::result::Result<SimulationRecord, RunFailure> {
    let mut record = SimulationRecord { params: *params, pulses: *pulses, grid: *grid, snapshots: Vec::new() };
    let fail = |error: Error, record: SimulationRecord| RunFailure { error, partial: record };

    if let Err(e) = params.validate() {
        return Err(fail(e, record));
    }
    let mut targets: Vec<f64> = snapshot_zetas.to_vec();
    for &z in &targets {
        if !(z.is_finite() && z >= 0.0 && z <= grid.zeta_max * (1.0 + 1e-12)) {
            return Err(fail(Error::SnapshotOutOfRange { zeta: z, zeta_max: grid.zeta_max }, record));
        }
    }
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    targets.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));

    let entrance = match gaussian_entrance(pulses, grid) {
        Ok(f) => f,
        Err(e) => return Err(fail(e, record)),
    };
    let mut env = Envelopes::from_slice(&entrance);
    let mut zeta = 0.0;
    let dz = grid.dzeta();
    let mut fields = entrance;

    for &target in &targets {
        loop {
            let states = match env.integrate(params, grid) {
                Ok(s) => s,
                Err(e) => return Err(fail(e, record)),
            };
            let remaining = target - zeta;
            if remaining <= 1e-12 * (1.0 + target.abs()) {
                match Snapshot::new(target, fields.clone(), &states, params) {
                    Ok(s) => record.snapshots.push(s),
                    Err(e) => return Err(fail(e, record)),
                }
                break;
            }
            let (h, lands) = if remaining <= dz * (1.0 + 1e-9) { (remaining, true) } else { (dz, false) };
            env = match midpoint_step(&env, Some(states), params, grid, h) {
                Ok(e) => e,
                Err(e) => return Err(fail(e, record)),
            };
            zeta = if lands { target } else { zeta + h };
            if !env.all_finite() {
                return Err(fail(Error::NonFinite { zeta }, record));
            }
            fields = env.to_slice(grid);
        }
    }
    Ok(record)
}

/// Photon-number and two-photon-detuning law residuals between two
/// consecutive snapshots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairResidual {
    pub zeta_from: f64,
    pub zeta_to: f64,
    /// `max_τ |∂n/∂ζ + (1/q_s)·∂|a₂|²/∂τ|`.
    pub photon: f64,
    /// `max_τ |(1/q_s)·∂|a₂|²/∂τ|`, the peak flux derivative.
    pub photon_scale: f64,
    /// `max_τ |∂δ/∂ζ − 2(q_p−q_s)/Δ_p·∂n/∂ζ|` over the overlap region.
    pub delta: f64,
    /// `max_τ |∂δ/∂ζ|` over the overlap region.
    pub delta_scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservationResiduals {
    pub pairs: Vec<PairResidual>,
    /// Largest photon-law residual relative to the peak flux derivative.
    pub photon_law_residual: f64,
    /// Largest absolute two-photon-detuning law residual.
    pub delta_law_residual: f64,
}

/// Evaluates the photon-number law `∂n/∂ζ = −(1/q_s)·∂|a₂|²/∂τ` and the
/// two-photon-detuning law `∂δ/∂ζ = 2(q_p−q_s)/Δ_p·∂n/∂ζ` with finite
/// differences across consecutive snapshots.
pub fn conservation_residuals(record: &SimulationRecord) -> Result<ConservationResiduals> {
    let snaps = &record.snapshots;
    if snaps.len() < 2 {
        return Err(Error::TooFewSnapshots { found: snaps.len() });
    }
    let params = &record.params;
    let h = record.grid.dtau();
    let mut pairs = Vec::with_capacity(snaps.len() - 1);
    for w in snaps.windows(2) {
        let (s1, s2) = (&w[0], &w[1]);
        let dz = s2.zeta - s1.zeta;
        let flux = |s: &Snapshot| math::derivative(&s.trajectory.populations(1), h);
        let (f1, f2) = (flux(s1), flux(s2));
        let n1 = &s1.diagnostics.photon_density;
        let n2 = &s2.diagnostics.photon_density;
        let mut pr = PairResidual { zeta_from: s1.zeta, zeta_to: s2.zeta, photon: 0.0, photon_scale: 0.0, delta: 0.0, delta_scale: 0.0 };
        for i in 0..n1.len() {
            let dn = (n2[i] - n1[i]) / dz;
            let fl = 0.5 * (f1[i] + f2[i]) / params.q_s;
            pr.photon = pr.photon.max((dn + fl).abs());
            pr.photon_scale = pr.photon_scale.max(fl.abs());
            if let (Some(d1), Some(d2)) = (s1.diagnostics.delta_two[i], s2.diagnostics.delta_two[i]) {
                let dd = (d2 - d1) / dz;
                let predicted = 2.0 * (params.q_p - params.q_s) / params.delta_p * dn;
                pr.delta = pr.delta.max((dd - predicted).abs());
                pr.delta_scale = pr.delta_scale.max(dd.abs());
            }
        }
        pairs.push(pr);
    }
    let photon_law_residual = pairs
        .iter()
        .map(|p| if p.photon_scale > 0.0 { p.photon / p.photon_scale } else { p.photon })
        .fold(0.0, f64::max);
    let delta_law_residual = pairs.iter().map(|p| p.delta).fold(0.0, f64::max);
    Ok(ConservationResiduals { pairs, photon_law_residual, delta_law_residual })
}
