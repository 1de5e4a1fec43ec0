use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use geophase_cli::acceptance::{self, Check};
use geophase_cli::runner::DEFAULT_SEED;
use geophase_cli::{registry, Cell, Table};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geophase"))
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_config(config: &Path, out: &Path, workers: usize) -> Result<Table, String> {
    let status = bin()
        .args(["run", config.to_str().unwrap(), "--workers", &workers.to_string(), "--out", out.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let text = std::fs::read_to_string(out).map_err(|e| e.to_string())?;
    Table::read_csv(&text).map(|(_, t)| t).map_err(|e| e.to_string())
}

fn max_numeric_gap(a: &Table, b: &Table) -> Option<f64> {
    if a.columns != b.columns || a.rows.len() != b.rows.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        for (x, y) in ra.iter().zip(rb) {
            match (x.as_f64(), y.as_f64()) {
                (Some(u), Some(v)) if u.is_nan() && v.is_nan() => {}
                (Some(u), Some(v)) => worst = worst.max((u - v).abs()),
                (None, None) if x == y => {}
                _ => return None,
            }
            if let (Cell::Text(s), Cell::Text(t)) = (x, y) {
                if s != t {
                    return None;
                }
            }
        }
    }
    Some(worst)
}

fn cli_reproducibility() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;

    let selftest = bin().args(["selftest", "--seed", &DEFAULT_SEED.to_string()]).output().expect("binary runs");
    let lines = String::from_utf8_lossy(&selftest.stdout).lines().filter(|l| l.contains("PASS")).count();
    ok &= selftest.status.success() && lines == 4;
    notes.push(format!("selftest exit {:?} with {lines}/4 passing", selftest.status.code()));

    let dir = tempfile::tempdir().expect("temp dir");
    let mut worst: f64 = 0.0;
    for e in registry() {
        let config = config_dir().join(format!("{}.toml", e.name));
        let a = run_config(&config, &dir.path().join(format!("{}-a.csv", e.name)), 1);
        let b = run_config(&config, &dir.path().join(format!("{}-b.csv", e.name)), 4);
        match (a, b) {
            (Ok(a), Ok(b)) => match max_numeric_gap(&a, &b) {
                Some(g) => worst = worst.max(g),
                None => {
                    ok = false;
                    notes.push(format!("{}: tables differ in shape or text", e.name));
                }
            },
            (a, b) => {
                ok = false;
                notes.push(format!("{}: run failed: {:?} {:?}", e.name, a.err(), b.err()));
            }
        }
    }
    ok &= worst <= 1e-12;
    notes.push(format!("max rerun gap over {} configs (1 vs 4 workers) {worst:.2e} (<= 1e-12)", registry().len()));
    Check {
        id: 11,
        name: "CLI reproducibility",
        passed: ok,
        detail: notes.join("; "),
        elapsed: start.elapsed(),
        budget: Duration::from_secs(600),
    }
}

fn main() {
    let checks: [fn() -> Check; 10] = [
        acceptance::octant_phase,
        || acceptance::bloch_curvature(DEFAULT_SEED),
        || acceptance::gauge_invariance(DEFAULT_SEED),
        acceptance::adiabatic_three_way,
        || acceptance::interferometer_law(DEFAULT_SEED),
        acceptance::usb_three_way,
        || acceptance::gate_synthesis(DEFAULT_SEED),
        || acceptance::deutsch_check(DEFAULT_SEED),
        acceptance::foucault_check,
        || acceptance::noise_check(DEFAULT_SEED),
    ];
    let mut failed = 0;
    for c in checks {
        let r = c();
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    let r = cli_reproducibility();
    println!("{r}");
    failed += usize::from(!r.passed);
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
