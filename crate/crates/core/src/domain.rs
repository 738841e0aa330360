//! Dimensionless parameters, grids and entrance conditions.
//!
//! Time is measured in units of the pulse duration `T`, frequencies are
//! multiplied by `T`, and depth is the dimensionless `ζ = q_s·N·z·T`. In
//! these units the field equations read
//! `∂Ω_p/∂ζ = −(q_p/q_s)·Im(a₁*a₂)` and `∂Ω_s/∂ζ = −Im(a₃*a₂)`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::math;

/// Oscillator strengths and detunings of the Λ medium.
///
/// Only the ratio `q_p/q_s` enters the dimensionless dynamics; `q_s` is
/// kept as the reference unit in which photon densities and the
/// two-photon strength are reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MediumParams {
    pub q_p: f64,
    pub q_s: f64,
    /// One-photon detuning × T at the entrance.
    pub delta_p: f64,
    /// Two-photon detuning × T at the entrance.
    pub delta_two: f64,
}

impl MediumParams {
    /// Medium with strength ratio `q = q_p/q_s` (reference `q_s = 1`) at
    /// two-photon resonance.
    pub fn new(q: f64, delta_p: f64) -> Result<Self> {
        Self::with_strengths(q, 1.0, delta_p, 0.0)
    }

    pub fn with_strengths(q_p: f64, q_s: f64, delta_p: f64, delta_two: f64) -> Result<Self> {
        let params = Self { q_p, q_s, delta_p, delta_two };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_p.is_finite() && self.q_p > 0.0) {
            return Err(Error::InvalidParameter { name: "q_p", reason: "must be finite and positive" });
        }
        if !(self.q_s.is_finite() && self.q_s > 0.0) {
            return Err(Error::InvalidParameter { name: "q_s", reason: "must be finite and positive" });
        }
        if !(self.delta_p.is_finite() && self.delta_p > 0.0) {
            return Err(Error::InvalidParameter { name: "delta_p", reason: "must be finite and positive" });
        }
        if !self.delta_two.is_finite() {
            return Err(Error::InvalidParameter { name: "delta_two", reason: "must be finite" });
        }
        Ok(())
    }

    /// Ratio `q = q_p/q_s`.
    pub fn ratio(&self) -> f64 {
        self.q_p / self.q_s
    }

    /// Photon number density `Ω_p²/q_p + Ω_s²/q_s`.
    pub fn photon_density(&self, omega_p: f64, omega_s: f64) -> f64 {
        omega_p * omega_p / self.q_p + omega_s * omega_s / self.q_s
    }
}

/// Uniform local-time axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TauGrid {
    pub fn tau(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.tau(self.len - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.tau(i))
    }
}

/// Default entrance-envelope floor at the τ window edges, relative to peak.
pub const DEFAULT_BOUNDARY_FLOOR: f64 = 1e-8;

/// Default number of Runge–Kutta substeps per τ interval.
pub const DEFAULT_SUBSTEPS: usize = 4;

/// τ and ζ discretization of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationGrid {
    pub tau: TauGrid,
    pub zeta_max: f64,
    pub n_zeta: usize,
    /// Runge–Kutta substeps per τ interval for the atomic integrator.
    pub substeps: usize,
    /// Maximum entrance envelope at the window edges, relative to peak.
    pub boundary_floor: f64,
}

impl SimulationGrid {
    pub fn dtau(&self) -> f64 {
        self.tau.step
    }

    pub fn dzeta(&self) -> f64 {
        self.zeta_max / self.n_zeta as f64
    }

    pub fn zeta(&self, j: usize) -> f64 {
        self.dzeta() * j as f64
    }

    pub fn with_substeps(mut self, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::InvalidParameter { name: "substeps", reason: "must be at least 1" });
        }
        self.substeps = substeps;
        Ok(self)
    }

    pub fn with_boundary_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor.is_finite() && floor > 0.0) {
            return Err(Error::InvalidParameter { name: "boundary_floor", reason: "must be finite and positive" });
        }
        self.boundary_floor = floor;
        Ok(self)
    }

    /// Same τ axis with a different ζ step count.
    pub fn with_depth_steps(mut self, n_zeta: usize) -> Result<Self> {
        if n_zeta == 0 {
            return Err(Error::InvalidParameter { name: "n_zeta", reason: "must be at least 1" });
        }
        self.n_zeta = n_zeta;
        Ok(self)
    }
}

/// Builds uniform τ and ζ grids.
pub fn make_grid(tau_min: f64, tau_max: f64, n_tau: usize, zeta_max: f64, n_zeta: usize) -> Result<SimulationGrid> {
    if !(tau_min.is_finite() && tau_max.is_finite()) {
        return Err(Error::InvalidParameter { name: "tau bounds", reason: "must be finite" });
    }
    if tau_min >= tau_max {
        return Err(Error::InvalidParameter { name: "tau bounds", reason: "tau_min must be below tau_max" });
    }
    if n_tau < 2 {
        return Err(Error::InvalidParameter { name: "n_tau", reason: "need at least 2 samples" });
    }
    if !(zeta_max.is_finite() && zeta_max >= 0.0) {
        return Err(Error::InvalidParameter { name: "zeta_max", reason: "must be finite and non-negative" });
    }
    if n_zeta == 0 {
        return Err(Error::InvalidParameter { name: "n_zeta", reason: "must be at least 1" });
    }
    let step = (tau_max - tau_min) / (n_tau - 1) as f64;
    Ok(SimulationGrid {
        tau: TauGrid { start: tau_min, step, len: n_tau },
        zeta_max,
        n_zeta,
        substeps: DEFAULT_SUBSTEPS,
        boundary_floor: DEFAULT_BOUNDARY_FLOOR,
    })
}

/// Order in which the pulses reach the atoms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PulseOrdering {
    /// Pump first.
    #[default]
    Intuitive,
    /// Stokes first; only used for diagnostics.
    Counterintuitive,
}

/// How the entrance amplitudes are scaled from `omega0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PeakConvention {
    /// The maximum over τ of `√(Ω_p²+Ω_s²)` equals `omega0`.
    GeneralizedPeak,
    /// Each pulse peaks at `omega0/√2`, so the squared peaks add up to
    /// `omega0²`.
    #[default]
    SplitPeaks,
}

/// Entrance Gaussian pulse pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputPulseSpec {
    /// Peak Rabi frequency × T.
    pub omega0: f64,
    /// Peak-to-peak delay over T.
    pub delay: f64,
    /// 1/e half-width over T.
    pub width: f64,
    pub ordering: PulseOrdering,
    pub peak: PeakConvention,
}

impl Default for InputPulseSpec {
    fn default() -> Self {
        Self {
            omega0: 40.0,
            delay: 1.3,
            width: 1.0,
            ordering: PulseOrdering::Intuitive,
            peak: PeakConvention::SplitPeaks,
        }
    }
}

impl InputPulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::InvalidParameter { name: "omega0", reason: "must be finite and positive" });
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidParameter { name: "width", reason: "must be finite and positive" });
        }
        if !self.delay.is_finite() || (self.ordering == PulseOrdering::Intuitive && self.delay <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "delay",
                reason: "must be finite, and positive for intuitive ordering",
            });
        }
        Ok(())
    }

    fn centers(&self) -> (f64, f64) {
        let half = 0.5 * self.delay;
        match self.ordering {
            PulseOrdering::Intuitive => (-half, half),
            PulseOrdering::Counterintuitive => (half, -half),
        }
    }

    fn unit_shape(&self, tau: f64, center: f64) -> f64 {
        let x = (tau - center) / self.width;
        (-x * x).exp()
    }

    /// Common amplitude of the two Gaussians.
    pub fn amplitude(&self) -> f64 {
        match self.peak {
            PeakConvention::SplitPeaks => self.omega0 / core::f64::consts::SQRT_2,
            PeakConvention::GeneralizedPeak => {
                let peak_sq = self.max_unit_intensity();
                self.omega0 / peak_sq.sqrt()
            }
        }
    }

    /// Maximum over τ of `g_p(τ)² + g_s(τ)²` for unit-amplitude Gaussians.
    fn max_unit_intensity(&self) -> f64 {
        let (cp, cs) = self.centers();
        let f = |t: f64| {
            let a = self.unit_shape(t, cp);
            let b = self.unit_shape(t, cs);
            a * a + b * b
        };
        // The sum is symmetric about the midpoint and has its maximum
        // within a half-width of the outer centers.
        let lo = cp.min(cs) - self.width;
        let hi = cp.max(cs) + self.width;
        let n = 2000;
        let h = (hi - lo) / n as f64;
        let (mut best_t, mut best) = (lo, f(lo));
        for i in 1..=n {
            let t = lo + h * i as f64;
            let v = f(t);
            if v > best {
                best = v;
                best_t = t;
            }
        }
        // golden-section refinement on the bracketing cell
        let (mut a, mut b) = (best_t - h, best_t + h);
        let g = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        for _ in 0..100 {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - g * (b - a);
            d = a + g * (b - a);
        }
        best.max(f(0.5 * (a + b)))
    }

    /// Pump and Stokes Rabi frequencies × T at local time τ.
    pub fn envelope(&self, tau: f64) -> (f64, f64) {
        let (cp, cs) = self.centers();
        let amp = self.amplitude();
        (amp * self.unit_shape(tau, cp), amp * self.unit_shape(tau, cs))
    }
}

/// Pump/Stokes envelopes and phases sampled on the τ grid at a fixed depth.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSlice {
    pub tau: TauGrid,
    pub omega_p: Vec<f64>,
    pub omega_s: Vec<f64>,
    pub phi_p: Vec<f64>,
    pub phi_s: Vec<f64>,
}

impl FieldSlice {
    /// Real envelopes with zero phase.
    pub fn from_amplitudes(tau: TauGrid, omega_p: Vec<f64>, omega_s: Vec<f64>) -> Result<Self> {
        for v in [&omega_p, &omega_s] {
            if v.len() != tau.len {
                return Err(Error::GridMismatch { expected: tau.len, found: v.len() });
            }
        }
        let phi_p = alloc::vec![0.0; tau.len];
        let phi_s = alloc::vec![0.0; tau.len];
        Ok(Self { tau, omega_p, omega_s, phi_p, phi_s })
    }

    /// Splits complex envelopes `Ω·e^{iφ}` into moduli and unwrapped phases.
    pub fn from_envelopes(tau: TauGrid, pump: &[Complex64], stokes: &[Complex64]) -> Self {
        let split = |g: &[Complex64]| {
            let amp: Vec<f64> = g.iter().map(|z| z.norm()).collect();
            let raw: Vec<f64> = g.iter().map(|z| z.im.atan2(z.re)).collect();
            (amp, math::unwrap_phase(&raw))
        };
        let (omega_p, phi_p) = split(pump);
        let (omega_s, phi_s) = split(stokes);
        Self { tau, omega_p, omega_s, phi_p, phi_s }
    }

    /// Complex envelopes `(Ω_p e^{iφ_p}, Ω_s e^{iφ_s})`.
    pub fn envelopes(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let join = |amp: &[f64], phase: &[f64]| -> Vec<Complex64> {
            amp.iter().zip(phase).map(|(&a, &p)| Complex64::from_polar(a, p)).collect()
        };
        (join(&self.omega_p, &self.phi_p), join(&self.omega_s, &self.phi_s))
    }

    pub fn len(&self) -> usize {
        self.tau.len
    }

    pub fn is_empty(&self) -> bool {
        self.tau.len == 0
    }

    pub fn generalized_rabi(&self, i: usize) -> f64 {
        self.omega_p[i].hypot(self.omega_s[i])
    }

    pub fn peak_generalized_rabi(&self) -> f64 {
        (0..self.len()).map(|i| self.generalized_rabi(i)).fold(0.0, f64::max)
    }

    /// Mixing angle `θ = atan2(Ω_p, Ω_s)`, or `None` where both vanish.
    pub fn theta(&self, i: usize) -> Option<f64> {
        let (p, s) = (self.omega_p[i], self.omega_s[i]);
        if p == 0.0 && s == 0.0 {
            None
        } else {
            Some(p.atan2(s))
        }
    }

    /// Marks samples inside the pulse overlap region `Ω_p·Ω_s > floor·peak²`.
    pub fn overlap_mask(&self, floor: f64) -> Vec<bool> {
        let peak = self.peak_generalized_rabi();
        let limit = floor * peak * peak;
        self.omega_p.iter().zip(&self.omega_s).map(|(p, s)| p * s > limit).collect()
    }
}

/// Overlap floor: a sample is inside the pulse overlap when
/// `Ω_p·Ω_s > OVERLAP_FLOOR·max(Ω²)`.
pub const OVERLAP_FLOOR: f64 = 1e-4;

/// A pulse phase is resolved where its amplitude exceeds this fraction of
/// the peak generalized Rabi frequency.
pub const PHASE_FLOOR: f64 = 1e-2;

/// One- and two-photon detunings including the self-phase-modulation
/// shifts `∂φ/∂τ`. `None` where the phases are not resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveDetunings {
    /// `Δ_p0 + ∂φ_p/∂τ`, defined where the pump phase is resolved.
    pub delta_p: Vec<Option<f64>>,
    /// `δ0 + ∂(φ_p − φ_s)/∂τ`, defined inside the pulse overlap.
    pub delta_two: Vec<Option<f64>>,
}

impl EffectiveDetunings {
    /// `Δ_p` at sample `i`, falling back to the entrance value.
    pub fn delta_p_or(&self, i: usize, fallback: f64) -> f64 {
        self.delta_p[i].unwrap_or(fallback)
    }

    pub fn delta_two_or(&self, i: usize, fallback: f64) -> f64 {
        self.delta_two[i].unwrap_or(fallback)
    }
}

impl FieldSlice {
    /// Effective detunings from centered differences of the unwrapped
    /// phases.
    pub fn effective_detunings(&self, params: &MediumParams) -> EffectiveDetunings {
        let h = self.tau.step;
        let dphi_p = math::derivative(&self.phi_p, h);
        let dphi_s = math::derivative(&self.phi_s, h);
        let peak = self.peak_generalized_rabi();
        let delta_p = (0..self.len())
            .map(|i| (self.omega_p[i] > PHASE_FLOOR * peak).then(|| params.delta_p + dphi_p[i]))
            .collect();
        let delta_two = self
            .overlap_mask(OVERLAP_FLOOR)
            .iter()
            .enumerate()
            .map(|(i, &inside)| inside.then(|| params.delta_two + dphi_p[i] - dphi_s[i]))
            .collect();
        EffectiveDetunings { delta_p, delta_two }
    }
}

/// Samples the entrance Gaussians on the τ grid.
pub fn gaussian_entrance(pulses: &InputPulseSpec, grid: &SimulationGrid) -> Result<FieldSlice> {
    pulses.validate()?;
    let amp = pulses.amplitude();
    let tau = grid.tau;
    let (omega_p, omega_s): (Vec<f64>, Vec<f64>) = tau.iter().map(|t| pulses.envelope(t)).unzip();
    let edge = [0, tau.len - 1]
        .iter()
        .map(|&i| omega_p[i].max(omega_s[i]) / amp)
        .fold(0.0, f64::max);
    if edge > grid.boundary_floor {
        return Err(Error::WindowTooNarrow { edge_ratio: edge, floor: grid.boundary_floor });
    }
    FieldSlice::from_amplitudes(tau, omega_p, omega_s)
}

/// `θ` limit at the start of the window for an ordering: π/2 when the pump
/// leads.
pub fn initial_theta(ordering: PulseOrdering) -> f64 {
    match ordering {
        PulseOrdering::Intuitive => FRAC_PI_2,
        PulseOrdering::Counterintuitive => 0.0,
    }
}

/// Reduced Planck constant, erg·s.
pub const HBAR_CGS: f64 = 1.054_571_817e-27;
/// Speed of light, cm/s.
pub const C_CGS: f64 = 2.997_924_58e10;

/// Conversion from the dimensionless depth to laboratory units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalUnits {
    /// Atomic density, cm⁻³.
    pub density_cm3: f64,
    /// Transition angular frequency, rad/s.
    pub omega_rad_s: f64,
    /// Transition dipole moment, esu·cm.
    pub dipole_cgs: f64,
    /// Pulse duration T, s.
    pub duration_s: f64,
    /// Oscillator strength `2πν·d²/ħc = ω·d²/ħc`, cm³/s.
    pub q_cgs: f64,
    /// Length corresponding to unit dimensionless depth, cm.
    pub cm_per_unit_zeta: f64,
}

impl PhysicalUnits {
    pub fn zeta_to_cm(&self, zeta: f64) -> f64 {
        zeta * self.cm_per_unit_zeta
    }
}

/// Oscillator strength and depth scale for a vapor with the given density,
/// angular transition frequency, dipole moment and pulse duration (CGS
/// units).
pub fn physical_units(density_cm3: f64, omega_rad_s: f64, dipole_cgs: f64, duration_s: f64) -> Result<PhysicalUnits> {
    for (name, v) in [
        ("density", density_cm3),
        ("omega", omega_rad_s),
        ("dipole", dipole_cgs),
        ("duration", duration_s),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter { name, reason: "must be finite and positive" });
        }
    }
    let q_cgs = omega_rad_s * dipole_cgs * dipole_cgs / (HBAR_CGS * C_CGS);
    let cm_per_unit_zeta = 1.0 / (q_cgs * density_cm3 * duration_s);
    Ok(PhysicalUnits {
        density_cm3,
        omega_rad_s,
        dipole_cgs,
        duration_s,
        q_cgs,
        cm_per_unit_zeta,
    })
}
