//! Adiabatic solution of the propagation problem by characteristics.
//!
//! In the adiabatic limit with large one-photon detuning the photon density
//! is frozen, `n(ζ,τ) = n0(τ)`, and the mixing angle is carried along
//! characteristics: `θ(ζ,τ) = θ0(ξ)` with the nonlinear time `ξ` solving
//!
//! ```text
//! ∫_τ^ξ n0(τ') dτ' = (q_p/Q(θ0(ξ))²)·ζ,    Q(θ) = q_s q_p/(q_s sin²θ + q_p cos²θ)
//! ```
//!
//! All functions take an [`EntranceProfiles`] built once from the
//! entrance slice.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{FieldSlice, MediumParams, TauGrid, OVERLAP_FLOOR};
use crate::error::{Error, Result};
use crate::math::{self, MonotoneCubic};

/// Two-photon transition strength for mixing angle `theta`.
pub fn q_of_theta(theta: f64, q_p: f64, q_s: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    q_s * q_p / (q_s * s * s + q_p * c * c)
}

/// Interpolated entrance profiles `n0`, `θ0`, `Ω0²` and the cumulative
/// photon number.
#[derive(Clone, Debug)]
pub struct EntranceProfiles {
    pub tau: TauGrid,
    pub n0: Vec<f64>,
    pub theta0: Vec<f64>,
    pub omega0_sq: Vec<f64>,
    /// `Ω_p·Ω_s` at the entrance.
    pub overlap: Vec<f64>,
    /// `∫_{τ_min}^{τ} n0`.
    pub cumulative: Vec<f64>,
    theta: MonotoneCubic,
    cum: MonotoneCubic,
    peak_omega_sq: f64,
    peak_n: f64,
}

impl EntranceProfiles {
    pub fn from_slice(slice: &FieldSlice, params: &MediumParams) -> Result<Self> {
        params.validate()?;
        let n = slice.len();
        if n < 4 {
            return Err(Error::InvalidParameter { name: "n_tau", reason: "need at least 4 samples" });
        }
        let tau = slice.tau;
        let n0: Vec<f64> = (0..n).map(|i| params.photon_density(slice.omega_p[i], slice.omega_s[i])).collect();
        let omega0_sq: Vec<f64> = (0..n).map(|i| slice.omega_p[i].powi(2) + slice.omega_s[i].powi(2)).collect();
        let overlap: Vec<f64> = (0..n).map(|i| slice.omega_p[i] * slice.omega_s[i]).collect();

        let raw: Vec<Option<f64>> = (0..n).map(|i| slice.theta(i)).collect();
        let first = raw.iter().flatten().next().copied().ok_or(Error::DegenerateFrame)?;
        let mut theta0 = Vec::with_capacity(n);
        let mut last = first;
        for t in raw {
            last = t.unwrap_or(last);
            theta0.push(last);
        }

        let cumulative = math::cumulative_trapezoid(&n0, tau.step);
        let theta = MonotoneCubic::new(tau.start, tau.step, theta0.clone());
        let cum = MonotoneCubic::new(tau.start, tau.step, cumulative.clone());
        let peak_omega_sq = omega0_sq.iter().copied().fold(0.0, f64::max);
        let peak_n = n0.iter().copied().fold(0.0, f64::max);
        Ok(Self { tau, n0, theta0, omega0_sq, overlap, cumulative, theta, cum, peak_omega_sq, peak_n })
    }

    /// Total photon number per unit area, `∫ n0 dτ`.
    pub fn photon_number(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn peak_omega_sq(&self) -> f64 {
        self.peak_omega_sq
    }

    pub fn peak_photon_density(&self) -> f64 {
        self.peak_n
    }

    pub fn theta_at(&self, tau: f64) -> f64 {
        self.theta.value(tau)
    }

    pub fn theta_slope_at(&self, tau: f64) -> f64 {
        self.theta.slope(tau)
    }

    pub fn n0_at(&self, tau: f64) -> f64 {
        math::interp_cubic(&self.n0, self.tau.start, self.tau.step, tau).max(0.0)
    }

    pub fn omega0_sq_at(&self, tau: f64) -> f64 {
        math::interp_cubic(&self.omega0_sq, self.tau.start, self.tau.step, tau).max(0.0)
    }

    fn overlap_at(&self, tau: f64) -> f64 {
        math::interp_cubic(&self.overlap, self.tau.start, self.tau.step, tau)
    }

    fn in_overlap(&self, tau: f64) -> bool {
        self.overlap_at(tau) > OVERLAP_FLOOR * self.peak_omega_sq
    }

    fn cumulative_at(&self, tau: f64) -> f64 {
        self.cum.value(tau)
    }
}

/// Coefficient `q_p/Q(θ)²` relating depth to the photon number swept.
fn depth_coefficient(theta: f64, params: &MediumParams) -> f64 {
    let q = q_of_theta(theta, params.q_p, params.q_s);
    params.q_p / (q * q)
}

/// Nonlinear time at a point of the medium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Xi {
    Root(f64),
    /// The pulse photons are exhausted before depth `ζ` is reached; the
    /// transfer is complete.
    BeyondPulse,
}

/// Solves for the nonlinear time `ξ(ζ, τ)` by bracketing and bisection.
pub fn solve_xi(zeta: f64, tau: f64, prof: &EntranceProfiles, params: &MediumParams) -> Result<Xi> {
    if !(zeta.is_finite() && zeta >= 0.0) {
        return Err(Error::InvalidParameter { name: "zeta", reason: "must be finite and non-negative" });
    }
    if zeta == 0.0 {
        return Ok(Xi::Root(tau));
    }
    let c_tau = prof.cumulative_at(tau);
    let f = |xi: f64| prof.cumulative_at(xi) - c_tau - depth_coefficient(prof.theta_at(xi), params) * zeta;
    let tol = 1e-10 * prof.photon_number();
    let end = prof.tau.end();

    let mut lo = tau;
    let mut hi = tau;
    loop {
        if hi >= end {
            return Ok(Xi::BeyondPulse);
        }
        let next = (hi + 1.0).min(end);
        if f(next) >= 0.0 {
            hi = next;
            break;
        }
        lo = next;
        hi = next;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() <= tol || hi - lo <= 1e-13 * (1.0 + mid.abs()) {
            return Ok(Xi::Root(mid));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::RootBracket { zeta, tau })
}

/// Mixing angle `θ(ζ, τ) = θ0(ξ)`; zero once the pulse is exhausted.
pub fn theta_analytic(zeta: f64, tau: f64, prof: &EntranceProfiles, params: &MediumParams) -> Result<f64> {
    Ok(match solve_xi(zeta, tau, prof, params)? {
        Xi::Root(xi) => prof.theta_at(xi),
        Xi::BeyondPulse => 0.0,
    })
}

/// Slope factor of the characteristics at `(ζ, ξ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorA {
    pub xi: f64,
    /// `A = 1 − 2((q_s−q_p)/q_s)·ζ·θ0'(ξ)·sin 2θ0(ξ)/Ω0²(ξ)`.
    pub a: f64,
    /// `∂ξ/∂τ = n0(τ)/(n0(ξ)·A)`.
    pub dxi_dtau: f64,
}

/// Factor `A` for the point `(ζ, τ)`. `None` when `ξ` falls outside the
/// pulse overlap or beyond the pulse.
pub fn factor_a(zeta: f64, tau: f64, prof: &EntranceProfiles, params: &MediumParams) -> Result<Option<FactorA>> {
    let xi = match solve_xi(zeta, tau, prof, params)? {
        Xi::Root(x) => x,
        Xi::BeyondPulse => return Ok(None),
    };
    if !prof.in_overlap(xi) {
        return Ok(None);
    }
    let th = prof.theta_at(xi);
    let a = 1.0
        - 2.0 * ((params.q_s - params.q_p) / params.q_s) * zeta * prof.theta_slope_at(xi) * (2.0 * th).sin()
            / prof.omega0_sq_at(xi);
    let dxi_dtau = prof.n0_at(tau) / (prof.n0_at(xi) * a);
    Ok(Some(FactorA { xi, a, dxi_dtau }))
}

/// Depth beyond which the characteristics steepen into a shock (`q_p > q_s`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakdown {
    /// `1/max_ξ g(ξ)` scanned over the overlap region.
    pub scanned: f64,
    /// `Ω0²_peak/(2(q_p−q_s)/q_s)`.
    pub estimate: f64,
}

/// Breakdown depth where `A` first reaches zero; `None` unless `q_p > q_s`.
pub fn breakdown_length(prof: &EntranceProfiles, params: &MediumParams) -> Option<Breakdown> {
    if params.q_p <= params.q_s {
        return None;
    }
    let k = 2.0 * (params.q_p - params.q_s) / params.q_s;
    let gmax = prof
        .tau
        .iter()
        .filter(|&t| prof.in_overlap(t))
        .map(|t| {
            let th = prof.theta_at(t);
            k * (-prof.theta_slope_at(t)).max(0.0) * (2.0 * th).sin() / prof.omega0_sq_at(t)
        })
        .fold(0.0, f64::max);
    let scanned = if gmax > 0.0 { 1.0 / gmax } else { f64::INFINITY };
    Some(Breakdown { scanned, estimate: prof.peak_omega_sq / k })
}

/// Depths up to which the adiabatic approximation holds to `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityLengths {
    pub epsilon: f64,
    /// From `Δ·(Q/q_s)·ζ/(Δ² + 4nQ)^{3/2} < ε` at the peak photon density.
    pub general: f64,
    /// Large-detuning limit `ε·Δ²/(Q/q_s)`.
    pub large_detuning: f64,
}

/// Validity lengths with the worst-case strength `Q = max(q_p, q_s)`.
pub fn validity_lengths(prof: &EntranceProfiles, params: &MediumParams, epsilon: f64) -> ValidityLengths {
    let qw = params.q_p.max(params.q_s);
    let d = params.delta_p;
    let rel = qw / params.q_s;
    let general = epsilon * (d * d + 4.0 * prof.peak_n * qw).powf(1.5) / (d * rel);
    let large_detuning = epsilon * d * d / rel;
    ValidityLengths { epsilon, general, large_detuning }
}

/// Adiabatic target population `P3 = cos²ψ·cos²θ` at `(ζ, τ)`.
pub fn p3_adiabatic(zeta: f64, tau: f64, prof: &EntranceProfiles, params: &MediumParams) -> Result<f64> {
    let th = theta_analytic(zeta, tau, prof, params)?;
    let omega_sq = prof.n0_at(tau) * q_of_theta(th, params.q_p, params.q_s);
    let psi = 0.5 * (2.0 * omega_sq.sqrt()).atan2(params.delta_p);
    Ok(psi.cos().powi(2) * th.cos().powi(2))
}

/// Characteristics solution on the full τ grid at one depth.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicsSolution {
    pub zeta: f64,
    pub tau: TauGrid,
    /// `None` beyond the pulse.
    pub xi: Vec<Option<f64>>,
    pub theta: Vec<f64>,
    pub p3: Vec<f64>,
    /// Factor `A`, defined inside the pulse overlap.
    pub a: Vec<Option<f64>>,
    pub dxi_dtau: Vec<Option<f64>>,
}

impl CharacteristicsSolution {
    /// Adiabatic efficiency `P3` at the end of the window.
    pub fn efficiency(&self) -> f64 {
        self.p3[self.p3.len() - 1]
    }

    pub fn min_a(&self) -> Option<f64> {
        self.a.iter().flatten().copied().reduce(f64::min)
    }
}

pub fn characteristics(zeta: f64, prof: &EntranceProfiles, params: &MediumParams) -> Result<CharacteristicsSolution> {
    let n = prof.tau.len;
    let mut sol = CharacteristicsSolution {
        zeta,
        tau: prof.tau,
        xi: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        p3: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        dxi_dtau: Vec::with_capacity(n),
    };
    for tau in prof.tau.iter() {
        let xi = solve_xi(zeta, tau, prof, params)?;
        sol.xi.push(match xi {
            Xi::Root(x) => Some(x),
            Xi::BeyondPulse => None,
        });
        sol.theta.push(theta_analytic(zeta, tau, prof, params)?);
        sol.p3.push(p3_adiabatic(zeta, tau, prof, params)?);
        let fa = factor_a(zeta, tau, prof, params)?;
        sol.a.push(fa.map(|f| f.a));
        sol.dxi_dtau.push(fa.map(|f| f.dxi_dtau));
    }
    Ok(sol)
}

/// Depth-resolved transfer from the pulse photon budget.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferCurve {
    /// `ζ(τ)`: depth whose atoms are transferred at time `τ`.
    pub zeta: Vec<f64>,
    /// Depth where the pulse photons are used up.
    pub zeta_max: f64,
    /// `∫ n0 dτ`.
    pub photon_number: f64,
    /// Transferred atoms per unit area, `ζ_max` in depth units.
    pub atoms_per_area: f64,
}

/// `ζ(τ) = (∫_τ^∞ n0)·q_s²/q_p`, the depth of complete transfer.
pub fn transfer_curve_and_zmax(prof: &EntranceProfiles, params: &MediumParams) -> TransferCurve {
    let total = prof.photon_number();
    let scale = params.q_s * params.q_s / params.q_p;
    let zeta = prof.cumulative.iter().map(|c| (total - c) * scale).collect();
    let zeta_max = total * scale;
    TransferCurve { zeta, zeta_max, photon_number: total, atoms_per_area: zeta_max }
}
