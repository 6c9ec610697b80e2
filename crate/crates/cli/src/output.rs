use std::fmt::Write as _;
use std::path::Path;

use plap_core::solver::{Grid, SeriesRow, Snapshot};

use crate::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::from("t,sup_norm,l2_norm,nonlocal_integral,dt\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.t),
            num(r.sup_norm),
            num(r.l2_norm),
            num(r.nonlocal_integral),
            num(r.dt)
        );
    }
    out
}

pub fn snapshot_csv(grid: &Grid, snap: &Snapshot) -> String {
    let mut out = String::from("x,u\n");
    for (x, u) in grid.coords().iter().zip(&snap.values) {
        let _ = writeln!(out, "{},{}", num(*x), num(*u));
    }
    out
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write(dir, name, &text)
}
