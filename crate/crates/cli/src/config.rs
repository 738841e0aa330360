//! Scenario configuration files.
//!
//! A scenario is a TOML document with the sections `[medium]`, `[pulses]`,
//! `[grid]`, `[run]`, `[output]` and an optional `[units]`. Only
//! `medium.q` is required; everything else defaults to the entrance
//! parameters `Ω0T = Δ_pT = 40`, `τ_d/T = 1.3`, `δ0 = 0` on the figure grid.

use std::path::PathBuf;

use bstirap_core::domain::{
    make_grid, InputPulseSpec, MediumParams, PeakConvention, PulseOrdering, SimulationGrid, DEFAULT_BOUNDARY_FLOOR,
    DEFAULT_SUBSTEPS,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub medium: MediumSection,
    #[serde(default)]
    pub pulses: PulseSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<UnitsSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    /// Ratio `q_p/q_s`.
    pub q: f64,
    #[serde(default = "one")]
    pub q_s: f64,
    #[serde(default = "forty")]
    pub delta_p: f64,
    #[serde(default)]
    pub delta_two: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub omega0: f64,
    pub delay: f64,
    pub width: f64,
    pub ordering: Ordering,
    pub peak: Peak,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self { omega0: 40.0, delay: 1.3, width: 1.0, ordering: Ordering::Intuitive, peak: Peak::Split }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Intuitive,
    Counterintuitive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Peak {
    /// Each pulse peaks at `Ω0/√2`.
    Split,
    /// `max √(Ω_p²+Ω_s²) = Ω0`.
    Generalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_tau: usize,
    pub zeta_max: f64,
    pub n_zeta: usize,
    pub substeps: usize,
    pub boundary_floor: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            tau_min: -8.0,
            tau_max: 8.0,
            n_tau: 4096,
            zeta_max: 20.0,
            n_zeta: 4000,
            substeps: DEFAULT_SUBSTEPS,
            boundary_floor: DEFAULT_BOUNDARY_FLOOR,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Propagate,
    Analytic,
    Compare,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub mode: Mode,
    /// Depths at which snapshots (or sweep columns) are taken.
    pub snapshots: Vec<f64>,
    /// Extra ratios `q_p/q_s` for multi-run modes; empty means `medium.q` only.
    pub q_values: Vec<f64>,
    /// Tolerance used for the adiabatic validity lengths.
    pub epsilon: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { mode: Mode::Propagate, snapshots: vec![0.0], q_values: Vec::new(), epsilon: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Laboratory parameters for converting depths to centimetres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    pub density_cm3: f64,
    pub omega_rad_s: f64,
    pub dipole_cgs: f64,
    pub duration_s: f64,
}

fn one() -> f64 {
    1.0
}

fn forty() -> f64 {
    40.0
}

impl ScenarioConfig {
    /// Ratios to run, in the order given.
    pub fn q_list(&self) -> Vec<f64> {
        if self.run.q_values.is_empty() {
            vec![self.medium.q]
        } else {
            self.run.q_values.clone()
        }
    }

    pub fn medium_for(&self, q: f64) -> bstirap_core::Result<MediumParams> {
        MediumParams::with_strengths(q * self.medium.q_s, self.medium.q_s, self.medium.delta_p, self.medium.delta_two)
    }

    pub fn pulse_spec(&self) -> InputPulseSpec {
        InputPulseSpec {
            omega0: self.pulses.omega0,
            delay: self.pulses.delay,
            width: self.pulses.width,
            ordering: match self.pulses.ordering {
                Ordering::Intuitive => PulseOrdering::Intuitive,
                Ordering::Counterintuitive => PulseOrdering::Counterintuitive,
            },
            peak: match self.pulses.peak {
                Peak::Split => PeakConvention::SplitPeaks,
                Peak::Generalized => PeakConvention::GeneralizedPeak,
            },
        }
    }

    pub fn simulation_grid(&self) -> bstirap_core::Result<SimulationGrid> {
        let g = &self.grid;
        make_grid(g.tau_min, g.tau_max, g.n_tau, g.zeta_max, g.n_zeta)?
            .with_substeps(g.substeps)?
            .with_boundary_floor(g.boundary_floor)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    fn validate(&self, text: &str) -> Result<(), CliError> {
        let invalid = |section: &str, key: &str, err: String| CliError::Config {
            line: find_key_line(text, section, key),
            key: format!("{section}.{key}"),
            message: err,
        };
        for &q in core::iter::once(&self.medium.q).chain(&self.run.q_values) {
            if let Err(e) = self.medium_for(q) {
                let key = if q.is_finite() && q > 0.0 { "delta_p" } else { "q" };
                return Err(invalid("medium", key, e.to_string()));
            }
        }
        self.pulse_spec().validate().map_err(|e| invalid("pulses", "omega0", e.to_string()))?;
        self.simulation_grid().map_err(|e| invalid("grid", "n_tau", e.to_string()))?;
        if !(self.run.epsilon.is_finite() && self.run.epsilon > 0.0) {
            return Err(invalid("run", "epsilon", "must be finite and positive".into()));
        }
        if self.run.snapshots.is_empty() {
            return Err(invalid("run", "snapshots", "at least one depth is required".into()));
        }
        for &z in &self.run.snapshots {
            if !(z.is_finite() && z >= 0.0 && z <= self.grid.zeta_max) {
                return Err(invalid(
                    "run",
                    "snapshots",
                    format!("depth {z} outside [0, grid.zeta_max = {}]", self.grid.zeta_max),
                ));
            }
        }
        if let Some(u) = &self.units {
            bstirap_core::domain::physical_units(u.density_cm3, u.omega_rad_s, u.dipole_cgs, u.duration_s)
                .map_err(|e| invalid("units", "density_cm3", e.to_string()))?;
        }
        Ok(())
    }
}

/// 1-based line of `key = ...` inside `[section]`, if present.
fn find_key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim().to_string();
        } else if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Parses and validates a scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    cfg.validate(text)?;
    Ok(cfg)
}
