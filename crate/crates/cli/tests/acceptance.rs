//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL with their
//! measured values but do not fail the target; any other failure, or a
//! known failure that starts passing, does.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bstirap::config::{parse_config, ScenarioConfig};
use bstirap::presets::preset;
use bstirap::scenario::{compare_record, run_scenario, RunOptions};
use bstirap_core::analytic::{breakdown_length, characteristics, EntranceProfiles};
use bstirap_core::domain::gaussian_entrance;
use bstirap_core::propagation::{conservation_residuals, run, SimulationRecord};

const KNOWN_FAILURES: [u32; 3] = [3, 5, 6];

const DEPTHS: [f64; 7] = [0.0, 1.0, 3.0, 5.0, 7.0, 7.005, 20.0];

struct Report {
    unexpected: Vec<u32>,
}

impl Report {
    fn record(&mut self, id: u32, pass: bool, detail: String) {
        let known = KNOWN_FAILURES.contains(&id);
        let verdict = if pass { "PASS" } else { "FAIL" };
        let note = match (pass, known) {
            (false, true) => "  [known deviation]",
            (true, true) => "  [expected to fail]",
            _ => "",
        };
        println!("criterion {id:>2}: {verdict}  {detail}{note}");
        if pass == known {
            self.unexpected.push(id);
        }
    }
}

fn load(name: &str) -> ScenarioConfig {
    parse_config(preset(name).unwrap()).unwrap()
}

struct Shared {
    q: f64,
    cfg: ScenarioConfig,
    record: SimulationRecord,
    elapsed: Duration,
}

fn shared_run(name: &str) -> Shared {
    let cfg = load(name);
    let q = cfg.medium.q;
    let start = Instant::now();
    let record = run(&cfg.pulse_spec(), &cfg.medium_for(q).unwrap(), &cfg.simulation_grid().unwrap(), &DEPTHS)
        .unwrap_or_else(|f| panic!("q = {q}: {f}"));
    Shared { q, cfg, record, elapsed: start.elapsed() }
}

fn p3(s: &Shared, zeta: f64) -> f64 {
    s.record.snapshot_at(zeta).unwrap().efficiency()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Photon-law residual of the pair starting at `zeta`, relative to the
/// peak flux derivative.
fn pair_residual(record: &SimulationRecord, zeta: f64) -> f64 {
    let r = conservation_residuals(record).unwrap();
    let p = r.pairs.iter().find(|p| p.zeta_from == zeta).unwrap();
    p.photon / p.photon_scale
}

fn criterion_1(rep: &mut Report) {
    let cfg = load("fig2");
    let grid = cfg.simulation_grid().unwrap();
    let mut worst = (f64::INFINITY, Duration::ZERO);
    for q in [0.1, 0.5, 1.0, 5.0, 10.0, 14.0] {
        let start = Instant::now();
        let rec = run(&cfg.pulse_spec(), &cfg.medium_for(q).unwrap(), &grid, &[0.0]).unwrap();
        let t = start.elapsed();
        worst = (worst.0.min(rec.snapshots[0].efficiency()), worst.1.max(t));
    }
    rep.record(
        1,
        worst.0 >= 0.99 && worst.1 < Duration::from_secs(1),
        format!("entrance P3 min {:.4} over q in [0.1, 14], slowest run {:.3} s", worst.0, worst.1.as_secs_f64()),
    );
}

fn criterion_2(rep: &mut Report, s: &Shared) {
    let g = s.cfg.simulation_grid().unwrap();
    let grade = g.tau.len >= 4096 && g.dzeta() <= 0.005 + 1e-12;
    let (a, b) = (p3(s, 7.0), p3(s, 20.0));
    rep.record(
        2,
        grade && within(a, 0.95, 0.05) && within(b, 0.02, 0.05) && s.elapsed < Duration::from_secs(120),
        format!(
            "q = 1: P3(7) = {a:.4}, P3(20) = {b:.4}; n_tau {}, dzeta {}, run {:.1} s",
            g.tau.len,
            g.dzeta(),
            s.elapsed.as_secs_f64()
        ),
    );
}

fn criterion_3(rep: &mut Report, s: &Shared) {
    let (a, b) = (p3(s, 7.0), p3(s, 20.0));
    rep.record(
        3,
        a >= 0.98 && within(b, 0.875, 0.05),
        format!("q = 0.1: P3(7) = {a:.4} (>= 0.98), P3(20) = {b:.4} (0.875 +- 0.05)"),
    );
}

fn criterion_4(rep: &mut Report, s: &Shared) {
    let (a, b) = (p3(s, 7.0), p3(s, 20.0));
    rep.record(
        4,
        within(a, 0.25, 0.10) && within(b, 0.34, 0.10),
        format!("q = 10: P3(7) = {a:.4} (0.25 +- 0.10), P3(20) = {b:.4} (0.34 +- 0.10)"),
    );
}

fn criterion_5(rep: &mut Report, weak: &Shared, equal: &Shared, strong: &Shared) {
    let (w, e, s) = (p3(weak, 7.0), p3(equal, 7.0), p3(strong, 7.0));
    rep.record(
        5,
        w - e >= 0.1 && e - s >= 0.1,
        format!("P3(7): q=0.1 {w:.4}, q=1 {e:.4}, q=10 {s:.4}; gaps {:.4}, {:.4} (each >= 0.1)", w - e, e - s),
    );
}

fn criterion_6(rep: &mut Report, s: &Shared) {
    let worst = s
        .record
        .snapshots
        .iter()
        .map(|snap| (snap.zeta, snap.diagnostics.max_abs_delta_two()))
        .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let at7 = s.record.snapshot_at(7.0).unwrap().diagnostics.max_abs_delta_two();
    rep.record(
        6,
        worst.1 <= 1e-3,
        format!("q = 1: max |delta_eff T| = {:.3e} at zeta = {} ({at7:.3e} at zeta = 7; limit 1e-3)", worst.1, worst.0),
    );
}

fn criterion_7(rep: &mut Report, runs: &[&Shared]) {
    let drift = runs.iter().map(|s| s.record.max_norm_drift()).fold(0.0, f64::max);
    let mut pass = drift <= 1e-8;
    let mut parts = vec![format!("max norm drift {drift:.2e}")];
    for s in runs {
        let fine = pair_residual(&s.record, 7.0);
        let mut coarse_cfg = s.cfg.clone();
        coarse_cfg.grid.n_tau = 2048;
        coarse_cfg.grid.zeta_max = 7.01;
        coarse_cfg.grid.n_zeta = 701;
        let grid = coarse_cfg.simulation_grid().unwrap();
        let coarse_rec = run(&coarse_cfg.pulse_spec(), &coarse_cfg.medium_for(s.q).unwrap(), &grid, &[7.0, 7.01]).unwrap();
        let coarse = pair_residual(&coarse_rec, 7.0);
        pass &= fine <= 0.05 && fine <= 0.5 * coarse;
        parts.push(format!("q={}: photon residual {fine:.2e} (coarse {coarse:.2e})", s.q));
    }
    rep.record(7, pass, parts.join("; "));
}

fn criterion_8(rep: &mut Report, weak: &Shared) {
    let mut shallow = weak.record.clone();
    shallow.snapshots.retain(|s| s.zeta <= 7.0);
    let (cmp, _) = compare_record(&weak.cfg, &shallow).unwrap();

    let grid = weak.cfg.simulation_grid().unwrap();
    let entrance = gaussian_entrance(&weak.cfg.pulse_spec(), &grid).unwrap();
    let mut ahead = true;
    let mut checked = 0usize;
    for q in [0.1, 1.0, 10.0, 14.0] {
        let params = weak.cfg.medium_for(q).unwrap();
        let prof = EntranceProfiles::from_slice(&entrance, &params).unwrap();
        for zeta in [1e-3, 1.0, 7.0, 20.0] {
            let sol = characteristics(zeta, &prof, &params).unwrap();
            for (i, xi) in sol.xi.iter().enumerate() {
                if let Some(xi) = xi {
                    ahead &= *xi > prof.tau.tau(i);
                    checked += 1;
                }
            }
        }
    }
    rep.record(
        8,
        cmp.max_abs_dtheta <= 0.05 && ahead,
        format!(
            "q = 0.1, zeta <= 7: L-inf |theta_a - theta_n| = {:.4} rad (<= 0.05); xi > tau at {checked} points: {ahead}",
            cmp.max_abs_dtheta
        ),
    );
}

fn criterion_9(rep: &mut Report) {
    let cfg = load("fig6");
    let entrance = gaussian_entrance(&cfg.pulse_spec(), &cfg.simulation_grid().unwrap()).unwrap();
    let solve = |q: f64, zeta: f64| {
        let params = cfg.medium_for(q).unwrap();
        let prof = EntranceProfiles::from_slice(&entrance, &params).unwrap();
        (characteristics(zeta, &prof, &params).unwrap(), prof, params)
    };
    let mut unit_dev: f64 = 0.0;
    let mut weak_min = f64::INFINITY;
    for zeta in [1.0, 7.0, 20.0] {
        let (sol, _, _) = solve(1.0, zeta);
        unit_dev = sol.a.iter().flatten().map(|a| (a - 1.0).abs()).fold(unit_dev, f64::max);
        let (sol, _, _) = solve(0.1, zeta);
        weak_min = weak_min.min(sol.min_a().unwrap());
    }
    let slope = |q: f64, zeta: f64| {
        let (sol, prof, _) = solve(q, zeta);
        sol.theta.windows(2).map(|w| (w[1] - w[0]).abs() / prof.tau.step).fold(0.0, f64::max)
    };
    let (_, prof, params) = solve(14.0, 0.0);
    let breakdown = breakdown_length(&prof, &params).map(|b| b.scanned);
    let (s0, s20) = (slope(14.0, 0.0), slope(14.0, 20.0));
    rep.record(
        9,
        unit_dev <= 1e-12 && weak_min >= 1.0 && breakdown.is_some_and(|z| z.is_finite()) && s20 >= 10.0 * s0,
        format!(
            "q=1 max |A-1| = {unit_dev:.1e}; q=0.1 min A = {weak_min:.4}; q=14 breakdown {:.3}, max dtheta/dtau {s0:.2} -> {s20:.2} at zeta 20 (>= 10x)",
            breakdown.unwrap_or(f64::NAN)
        ),
    );
}

fn criterion_10(rep: &mut Report, dir: &Path) {
    let cfg = load("fig7");
    let report = run_scenario(&cfg, dir, &RunOptions::default()).unwrap();
    let units = report.summary.units.as_ref().unwrap();
    let cm = |q: f64| report.summary.analytic.iter().find(|a| a.q == q).unwrap().zeta_max_cm.unwrap();
    let (l, z05, z5) = (units.cm_per_unit_zeta, cm(0.5), cm(5.0));
    rep.record(
        10,
        within(l, 0.05, 0.005) && within(z05, 300.0, 45.0) && within(z5, 13.0, 1.95),
        format!("cm per unit zeta {l:.4}; z_max {z05:.1} cm (q=0.5), {z5:.2} cm (q=5)"),
    );
}

fn criterion_11(rep: &mut Report, dir: &Path) {
    let config = dir.join("determinism.toml");
    fs::write(
        &config,
        "[medium]\nq = 1.0\n[grid]\nn_tau = 1024\nzeta_max = 0.5\nn_zeta = 100\n\
         [run]\nmode = \"compare\"\nsnapshots = [0.0, 0.25, 0.5]\nq_values = [0.1, 1.0, 10.0]\n",
    )
    .unwrap();
    let outputs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.join(name);
            let status = Command::new(env!("CARGO_BIN_EXE_simulate"))
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .args(["--jobs", "3"])
                .output()
                .unwrap();
            assert!(status.status.code().is_some());
            out
        })
        .collect();
    let mut names: Vec<_> = fs::read_dir(&outputs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    let same = |n: &std::ffi::OsString| fs::read(outputs[0].join(n)).ok() == fs::read(outputs[1].join(n)).ok();
    let identical = names.iter().filter(|n| same(n)).count();
    rep.record(
        11,
        !names.is_empty() && identical == names.len(),
        format!("{identical} of {} CSV files byte-identical across two runs", names.len()),
    );
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    let mut rep = Report { unexpected: Vec::new() };

    criterion_1(&mut rep);
    let equal = shared_run("fig3");
    let weak = shared_run("fig4");
    let strong = shared_run("fig5");
    criterion_2(&mut rep, &equal);
    criterion_3(&mut rep, &weak);
    criterion_4(&mut rep, &strong);
    criterion_5(&mut rep, &weak, &equal, &strong);
    criterion_6(&mut rep, &equal);
    criterion_7(&mut rep, &[&weak, &equal, &strong]);
    criterion_8(&mut rep, &weak);
    criterion_9(&mut rep);
    criterion_10(&mut rep, &tmp.path().join("units"));
    criterion_11(&mut rep, tmp.path());

    if rep.unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected outcome for criteria {:?}", rep.unexpected);
        ExitCode::FAILURE
    }
}
