//! Scenario execution: numeric propagation, the characteristics solution,
//! the numeric/analytic comparison and q sweeps, with CSV and JSON output.

use std::fs;
use std::path::{Path, PathBuf};

use bstirap_core::analytic::{
    breakdown_length, characteristics, transfer_curve_and_zmax, validity_lengths, EntranceProfiles,
};
use bstirap_core::atom::{mixing_angles, projections};
use bstirap_core::domain::{gaussian_entrance, physical_units, PhysicalUnits, OVERLAP_FLOOR};
use bstirap_core::propagation::{conservation_residuals, run, RunFailure, SimulationRecord, Snapshot};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Mode, ScenarioConfig};
use crate::error::CliError;

/// Column names of the per-snapshot CSV files.
pub const SNAPSHOT_COLUMNS: [&str; 16] = [
    "tau", "omega_pT", "omega_sT", "phi_p", "phi_s", "P1", "P2", "P3", "proj_b1", "proj_b2", "proj_d", "theta", "psi",
    "n", "Q", "delta_eff",
];

/// Largest |θ_numeric − θ_analytic| accepted by the comparison.
pub const COMPARE_TOLERANCE: f64 = 0.05;

/// `A` below this marks a steep (near-breakdown) characteristic.
pub const STEEP_A: f64 = 0.2;

/// Largest change of the final efficiency under dζ halving.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads for independent runs; `None` uses all cores.
    pub jobs: Option<usize>,
    pub check_convergence: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub mode: Mode,
    pub success: bool,
    pub runs: Vec<RunSummary>,
    pub analytic: Vec<AnalyticSummary>,
    pub compare: Vec<CompareSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<UnitsSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SnapshotSummary {
    pub zeta: f64,
    pub p3: f64,
    pub norm_drift: f64,
    pub max_abs_delta_eff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub q: f64,
    pub snapshots: Vec<SnapshotSummary>,
    pub photon_law_residual: Option<f64>,
    pub delta_law_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
    /// Set when the run stopped early; `snapshots` then holds the partial record.
    pub error: Option<String>,
}

impl RunSummary {
    pub fn efficiency_at(&self, zeta: f64) -> Option<f64> {
        self.snapshots.iter().find(|s| (s.zeta - zeta).abs() < 1e-9).map(|s| s.p3)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Convergence {
    pub zeta: f64,
    pub p3: f64,
    pub p3_half_step: f64,
    pub change: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticSummary {
    pub q: f64,
    pub photon_number: f64,
    pub zeta_max: f64,
    pub zeta_max_cm: Option<f64>,
    pub epsilon: f64,
    pub validity_general: f64,
    pub validity_large_detuning: f64,
    pub breakdown_scanned: Option<f64>,
    pub breakdown_estimate: Option<f64>,
    /// Adiabatic efficiency at each snapshot depth.
    pub adiabatic_p3: Vec<DepthValue>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DepthValue {
    pub zeta: f64,
    pub p3: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareSummary {
    pub q: f64,
    pub max_abs_dtheta: f64,
    pub depths_compared: Vec<f64>,
    pub depths_skipped: Vec<f64>,
    pub steep_points: usize,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub q_values: Vec<f64>,
    pub zetas: Vec<f64>,
    /// Rows follow `q_values`, columns `zetas`; `None` marks a failed cell.
    pub efficiency: Vec<Vec<Option<f64>>>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitsSummary {
    pub q_cgs: f64,
    pub cm_per_unit_zeta: f64,
}

#[derive(Debug)]
pub struct Report {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn tag(x: f64) -> String {
    format!("{x}")
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(source) => CliError::Io { path: path.clone(), source },
                other => CliError::Parse(format!("{other:?}")),
            })?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.files.push(path);
        Ok(())
    }
}

/// Rows of the 16-column snapshot table.
pub fn snapshot_rows(s: &Snapshot, params: &bstirap_core::domain::MediumParams) -> Result<Vec<Vec<String>>, CliError> {
    let proj = projections(&s.trajectory, &s.fields, params)?;
    let d = &s.diagnostics;
    let f = &s.fields;
    Ok((0..f.len())
        .map(|i| {
            let delta_p = d.delta_p[i].unwrap_or(params.delta_p);
            let angles = mixing_angles(f.omega_p[i], f.omega_s[i], delta_p);
            vec![
                num(f.tau.tau(i)),
                num(f.omega_p[i]),
                num(f.omega_s[i]),
                num(f.phi_p[i]),
                num(f.phi_s[i]),
                num(s.trajectory.population(i, 0)),
                num(s.trajectory.population(i, 1)),
                num(s.trajectory.population(i, 2)),
                opt(proj.b1[i]),
                opt(proj.b2[i]),
                opt(proj.d[i]),
                opt(s.theta[i]),
                num(angles.psi),
                num(d.photon_density[i]),
                opt(d.q_two_photon[i]),
                opt(d.delta_two[i]),
            ]
        })
        .collect())
}

fn snapshot_summaries(record: &SimulationRecord) -> Vec<SnapshotSummary> {
    record
        .snapshots
        .iter()
        .map(|s| SnapshotSummary {
            zeta: s.zeta,
            p3: s.efficiency(),
            norm_drift: s.trajectory.norm_drift(),
            max_abs_delta_eff: s.diagnostics.max_abs_delta_two(),
        })
        .collect()
}

/// Numeric run for one ratio, plus the dζ-halving check when requested.
pub struct Propagation {
    pub q: f64,
    pub outcome: Result<SimulationRecord, RunFailure>,
    pub convergence: Option<Result<Convergence, String>>,
}

impl Propagation {
    pub fn record(&self) -> &SimulationRecord {
        match &self.outcome {
            Ok(r) => r,
            Err(f) => &f.partial,
        }
    }
}

pub fn propagate(cfg: &ScenarioConfig, q: f64, check_convergence: bool) -> Result<Propagation, CliError> {
    let params = cfg.medium_for(q)?;
    let grid = cfg.simulation_grid()?;
    let pulses = cfg.pulse_spec();
    let outcome = run(&pulses, &params, &grid, &cfg.run.snapshots);
    let convergence = match (&outcome, check_convergence) {
        (Ok(rec), true) => {
            let last = rec.snapshots.last().expect("at least one snapshot");
            let fine = grid.with_depth_steps(2 * grid.n_zeta)?;
            Some(match run(&pulses, &params, &fine, &[last.zeta]) {
                Ok(r) => {
                    let p3 = last.efficiency();
                    let p3_half_step = r.snapshots[0].efficiency();
                    let change = (p3 - p3_half_step).abs();
                    Ok(Convergence { zeta: last.zeta, p3, p3_half_step, change, passed: change < CONVERGENCE_TOLERANCE })
                }
                Err(e) => Err(e.to_string()),
            })
        }
        _ => None,
    };
    Ok(Propagation { q, outcome, convergence })
}

fn run_summary(p: &Propagation) -> RunSummary {
    let record = p.record();
    let residuals = conservation_residuals(record).ok();
    let (convergence, conv_err) = match &p.convergence {
        Some(Ok(c)) => (Some(c.clone()), None),
        Some(Err(e)) => (None, Some(format!("convergence check failed: {e}"))),
        None => (None, None),
    };
    RunSummary {
        q: p.q,
        snapshots: snapshot_summaries(record),
        photon_law_residual: residuals.as_ref().map(|r| r.photon_law_residual),
        delta_law_residual: residuals.as_ref().map(|r| r.delta_law_residual),
        convergence,
        error: p.outcome.as_ref().err().map(|f| f.to_string()).or(conv_err),
    }
}

fn units_of(cfg: &ScenarioConfig) -> Result<Option<PhysicalUnits>, CliError> {
    Ok(match &cfg.units {
        Some(u) => Some(physical_units(u.density_cm3, u.omega_rad_s, u.dipole_cgs, u.duration_s)?),
        None => None,
    })
}

fn profiles(cfg: &ScenarioConfig, q: f64) -> Result<(EntranceProfiles, bstirap_core::domain::MediumParams), CliError> {
    let params = cfg.medium_for(q)?;
    let entrance = gaussian_entrance(&cfg.pulse_spec(), &cfg.simulation_grid()?)?;
    Ok((EntranceProfiles::from_slice(&entrance, &params)?, params))
}

fn analytic_summary(cfg: &ScenarioConfig, q: f64, units: Option<&PhysicalUnits>) -> Result<AnalyticSummary, CliError> {
    let (prof, params) = profiles(cfg, q)?;
    let curve = transfer_curve_and_zmax(&prof, &params);
    let v = validity_lengths(&prof, &params, cfg.run.epsilon);
    let b = breakdown_length(&prof, &params);
    let mut adiabatic_p3 = Vec::new();
    for &z in &cfg.run.snapshots {
        adiabatic_p3.push(DepthValue { zeta: z, p3: characteristics(z, &prof, &params)?.efficiency() });
    }
    Ok(AnalyticSummary {
        q,
        photon_number: curve.photon_number,
        zeta_max: curve.zeta_max,
        zeta_max_cm: units.map(|u| u.zeta_to_cm(curve.zeta_max)),
        epsilon: v.epsilon,
        validity_general: v.general,
        validity_large_detuning: v.large_detuning,
        breakdown_scanned: b.map(|b| b.scanned),
        breakdown_estimate: b.map(|b| b.estimate),
        adiabatic_p3,
    })
}

fn write_analytic_files(cfg: &ScenarioConfig, q: f64, units: Option<&PhysicalUnits>, w: &mut Writer) -> Result<(), CliError> {
    let (prof, params) = profiles(cfg, q)?;
    for &z in &cfg.run.snapshots {
        let sol = characteristics(z, &prof, &params)?;
        let rows = (0..prof.tau.len).map(|i| {
            vec![
                num(prof.tau.tau(i)),
                opt(sol.xi[i]),
                num(sol.theta[i]),
                opt(sol.a[i]),
                opt(sol.dxi_dtau[i]),
                num(sol.p3[i]),
            ]
        });
        w.csv(&format!("analytic_q{}_zeta{}.csv", tag(q), tag(z)), &["tau", "xi", "theta", "A", "dxi_dtau", "P3"], rows)?;
    }
    let curve = transfer_curve_and_zmax(&prof, &params);
    let mut header = vec!["tau", "zeta_complete"];
    if units.is_some() {
        header.push("z_cm");
    }
    let rows = (0..prof.tau.len).map(|i| {
        let mut r = vec![num(prof.tau.tau(i)), num(curve.zeta[i])];
        if let Some(u) = units {
            r.push(num(u.zeta_to_cm(curve.zeta[i])));
        }
        r
    });
    w.csv(&format!("transfer_q{}.csv", tag(q)), &header, rows)
}

/// Row-by-row θ comparison between a numeric record and the
/// characteristics solution.
pub fn compare_record(cfg: &ScenarioConfig, record: &SimulationRecord) -> Result<(CompareSummary, Vec<Vec<String>>), CliError> {
    let q = record.params.ratio();
    let (prof, params) = profiles(cfg, q)?;
    let limit = breakdown_length(&prof, &params).map(|b| b.scanned);
    let mut summary = CompareSummary {
        q,
        max_abs_dtheta: 0.0,
        depths_compared: Vec::new(),
        depths_skipped: Vec::new(),
        steep_points: 0,
        passed: true,
        note: None,
    };
    let mut rows = Vec::new();
    for s in &record.snapshots {
        if limit.is_some_and(|zb| s.zeta >= zb) {
            summary.depths_skipped.push(s.zeta);
            continue;
        }
        summary.depths_compared.push(s.zeta);
        let sol = characteristics(s.zeta, &prof, &params)?;
        let mask = s.fields.overlap_mask(OVERLAP_FLOOR);
        for i in (0..s.fields.len()).filter(|&i| mask[i]) {
            let Some(num_theta) = s.theta[i] else { continue };
            let diff = (num_theta - sol.theta[i]).abs();
            summary.max_abs_dtheta = summary.max_abs_dtheta.max(diff);
            let steep = sol.a[i].is_some_and(|a| a < STEEP_A);
            summary.steep_points += usize::from(steep);
            let tau = s.fields.tau.tau(i);
            rows.push(vec![
                num(s.zeta),
                num(tau),
                num(num_theta),
                num(sol.theta[i]),
                num(diff),
                opt(sol.a[i]),
                opt(sol.xi[i].map(|x| x - tau)),
                u8::from(steep).to_string(),
            ]);
        }
    }
    summary.passed = summary.max_abs_dtheta <= COMPARE_TOLERANCE;
    if let (Some(zb), false) = (limit, summary.depths_skipped.is_empty()) {
        summary.note = Some(format!("depths at or beyond the breakdown depth {zb:.3} were not compared"));
    }
    Ok((summary, rows))
}

pub const COMPARE_COLUMNS: [&str; 8] =
    ["zeta", "tau", "theta_numeric", "theta_analytic", "abs_dtheta", "A", "xi_minus_tau", "steep"];

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

/// Runs one scenario and writes its artifacts into `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path, opts: &RunOptions) -> Result<Report, CliError> {
    let mut w = Writer::new(out)?;
    w.text("config.resolved.toml", &cfg.to_toml())?;
    let units = units_of(cfg)?;
    let qs = cfg.q_list();
    let threads = pool(opts.jobs)?;
    let mut summary = Summary {
        mode: cfg.run.mode,
        success: true,
        runs: Vec::new(),
        analytic: Vec::new(),
        compare: Vec::new(),
        sweep: None,
        units: units.map(|u| UnitsSummary { q_cgs: u.q_cgs, cm_per_unit_zeta: u.cm_per_unit_zeta }),
    };

    match cfg.run.mode {
        Mode::Propagate | Mode::Compare => {
            let check = opts.check_convergence && cfg.run.mode == Mode::Propagate;
            let results: Vec<Result<Propagation, CliError>> =
                threads.install(|| qs.par_iter().map(|&q| propagate(cfg, q, check)).collect());
            for p in results {
                let p = p?;
                let params = p.record().params;
                for s in &p.record().snapshots {
                    w.csv(
                        &format!("snapshot_q{}_zeta{}.csv", tag(p.q), tag(s.zeta)),
                        &SNAPSHOT_COLUMNS,
                        snapshot_rows(s, &params)?,
                    )?;
                }
                let rs = run_summary(&p);
                summary.success &= rs.error.is_none() && rs.convergence.as_ref().is_none_or(|c| c.passed);
                summary.runs.push(rs);
                summary.analytic.push(analytic_summary(cfg, p.q, units.as_ref())?);
                if cfg.run.mode == Mode::Compare {
                    let (cs, rows) = compare_record(cfg, p.record())?;
                    w.csv(&format!("compare_q{}.csv", tag(p.q)), &COMPARE_COLUMNS, rows)?;
                    summary.success &= cs.passed;
                    summary.compare.push(cs);
                }
            }
        }
        Mode::Analytic => {
            for &q in &qs {
                write_analytic_files(cfg, q, units.as_ref(), &mut w)?;
                summary.analytic.push(analytic_summary(cfg, q, units.as_ref())?);
            }
        }
        Mode::Sweep => {
            let sweep = sweep(cfg, &qs, &cfg.run.snapshots, opts.jobs)?;
            let mut header = vec!["q".to_string()];
            header.extend(sweep.zetas.iter().map(|z| tag(*z)));
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = sweep.q_values.iter().zip(&sweep.efficiency).map(|(q, row)| {
                let mut r = vec![num(*q)];
                r.extend(row.iter().map(|c| opt(*c)));
                r
            });
            w.csv("sweep.csv", &header_refs, rows)?;
            summary.success &= sweep.failures.is_empty();
            summary.sweep = Some(sweep);
        }
    }

    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    w.text("summary.json", &(json + "\n"))?;
    Ok(Report { summary, files: w.files })
}

/// Efficiency matrix `P3(q, ζ)` from independent runs executed on `jobs`
/// worker threads. Failed runs leave empty cells and a note.
pub fn sweep(cfg: &ScenarioConfig, q_values: &[f64], zetas: &[f64], jobs: Option<usize>) -> Result<SweepSummary, CliError> {
    if q_values.is_empty() || zetas.is_empty() {
        return Err(CliError::Usage("sweep needs at least one q and one depth".into()));
    }
    let grid = cfg.simulation_grid()?;
    let pulses = cfg.pulse_spec();
    let threads = pool(jobs)?;
    type Row = Vec<Option<f64>>;
    let results: Vec<Result<Row, (Row, String)>> = threads.install(|| {
        q_values
            .par_iter()
            .map(|&q| {
                let params = cfg.medium_for(q).map_err(|e| (vec![None; zetas.len()], e.to_string()))?;
                let (rec, err) = match run(&pulses, &params, &grid, zetas) {
                    Ok(r) => (r, None),
                    Err(f) => (f.partial, Some(f.error.to_string())),
                };
                let row = zetas.iter().map(|&z| rec.snapshot_at(z).map(Snapshot::efficiency)).collect();
                match err {
                    Some(e) => Err((row, e)),
                    None => Ok(row),
                }
            })
            .collect()
    });
    let mut efficiency = Vec::with_capacity(q_values.len());
    let mut failures = Vec::new();
    for (q, r) in q_values.iter().zip(results) {
        match r {
            Ok(row) => efficiency.push(row),
            Err((row, e)) => {
                failures.push(format!("q = {q}: {e}"));
                efficiency.push(row);
            }
        }
    }
    Ok(SweepSummary { q_values: q_values.to_vec(), zetas: zetas.to_vec(), efficiency, failures })
}
