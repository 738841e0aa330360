use std::path::PathBuf;
use std::process::ExitCode;

use bstirap::config::parse_config;
use bstirap::presets::preset;
use bstirap::{run_scenario, CliError, Mode, RunOptions};
use clap::Parser;

/// Propagate a pulse pair through a three-level medium and report the
/// transfer efficiency, fields and diagnostics.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// Scenario file (TOML).
    config: Option<PathBuf>,
    /// Built-in scenario (fig2 to fig7); a config file, if given, wins.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory, overriding the scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Rerun with half the depth step and require the final efficiency to agree.
    #[arg(long)]
    check_convergence: bool,
}

fn execute(args: Args) -> Result<bool, CliError> {
    let text = match (&args.config, &args.preset) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
        (None, Some(name)) => preset(name)?.to_string(),
        (None, None) => return Err(CliError::Usage("give a config file or --preset NAME".into())),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(mode) = args.mode {
        cfg.run.mode = mode;
    }
    if args.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let out = args.out.unwrap_or_else(|| cfg.output.dir.clone());
    cfg.output.dir = out.clone();
    let opts = RunOptions { jobs: args.jobs, check_convergence: args.check_convergence };
    let report = run_scenario(&cfg, &out, &opts)?;
    let s = &report.summary;
    for r in &s.runs {
        for snap in &r.snapshots {
            println!("q = {:<6} zeta = {:<8} P3 = {:.4}", r.q, snap.zeta, snap.p3);
        }
        if let Some(e) = &r.error {
            eprintln!("q = {}: {e}", r.q);
        }
        if let Some(c) = &r.convergence {
            println!("q = {:<6} convergence at zeta = {}: |dP3| = {:.2e} {}", r.q, c.zeta, c.change, verdict(c.passed));
        }
    }
    for a in &s.analytic {
        print!("q = {:<6} zeta_max = {:.4}", a.q, a.zeta_max);
        if let Some(cm) = a.zeta_max_cm {
            print!(" ({cm:.3} cm)");
        }
        if let Some(b) = a.breakdown_scanned {
            print!(" breakdown = {b:.3}");
        }
        println!();
    }
    for c in &s.compare {
        println!("q = {:<6} max |dtheta| = {:.4} {}", c.q, c.max_abs_dtheta, verdict(c.passed));
    }
    if let Some(sw) = &s.sweep {
        for f in &sw.failures {
            eprintln!("sweep: {f}");
        }
    }
    println!("wrote {} files to {}", report.files.len(), out.display());
    Ok(s.success)
}

fn verdict(ok: bool) -> &'static str {
    if ok { "PASS" } else { "FAIL" }
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
