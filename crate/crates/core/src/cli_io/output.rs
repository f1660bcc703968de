//! CSV and JSON writers for time series, matrices, weights and reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::grunwald::GrunwaldWeights;
use crate::operators::IterationMatrix;
use crate::timestepper::TimeSeries;

/// Shortest decimal that parses back to the same `f64`. Plain notation in
/// `[1e-5, 1e16)`, exponent notation outside it.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// 17 significant digits in exponent notation.
pub fn format_full(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `<path>.meta.json`
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub alpha: f64,
    pub c: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub deriv: String,
    pub left: String,
    pub right: String,
    pub ic: String,
    pub method: String,
    pub mass_trace: Vec<f64>,
    pub absorbed_cumulative: Vec<f64>,
    pub actual_snapshot_times: Vec<f64>,
}

impl RunMeta {
    pub fn from_series(series: &TimeSeries) -> Self {
        let s = &series.spec;
        Self {
            alpha: s.alpha,
            c: s.c,
            n: s.n,
            dt: series.dt,
            t_end: series.t_end,
            deriv: s.form.to_string(),
            left: s.left.to_string(),
            right: s.right.to_string(),
            ic: series.initial.to_string(),
            method: series.method.to_string(),
            mass_trace: series.mass_trace.clone(),
            absorbed_cumulative: series.absorbed_cumulative.clone(),
            actual_snapshot_times: series.times.clone(),
        }
    }
}

/// Long-format `t,x,u` CSV, rows ordered by snapshot then node, plus the
/// `<path>.meta.json` sidecar.
pub fn emit_timeseries_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    let mut out = String::from("t,x,u\n");
    for (t, u) in series.times.iter().zip(&series.snapshots) {
        let t = format_value(*t);
        for (j, v) in u.values().iter().enumerate() {
            let _ = writeln!(out, "{t},{},{}", format_value(u.x(j)), format_value(*v));
        }
    }
    write_file(path, &out)?;
    let meta =
        serde_json::to_string_pretty(&RunMeta::from_series(series)).expect("run metadata is always serialisable");
    write_file(&meta_path(path), &(meta + "\n"))
}

/// One snapshot read back from a `t,x,u` file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

pub fn read_timeseries_csv(path: &Path) -> Result<Vec<CsvSnapshot>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad =
        |line: usize, reason: &str| Error::Parse { path: path.to_path_buf(), reason: format!("line {line}: {reason}") };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "t,x,u")) => {}
        _ => return Err(bad(1, "expected header `t,x,u`")),
    }
    let mut out: Vec<CsvSnapshot> = Vec::new();
    let mut last_x = f64::INFINITY;
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(i + 1, "expected 3 fields"));
        }
        let mut nums = [0.0; 3];
        for (k, f) in fields.iter().enumerate() {
            nums[k] = f.parse().map_err(|_| bad(i + 1, "not a number"))?;
        }
        let [t, x, u] = nums;
        // x restarts at 0 for every snapshot, even when two share a time.
        let new_block = x <= last_x;
        last_x = x;
        if new_block {
            out.push(CsvSnapshot { t, x: Vec::new(), u: Vec::new() });
        }
        let snap = out.last_mut().expect("pushed above");
        snap.x.push(x);
        snap.u.push(u);
    }
    Ok(out)
}

/// One matrix row per line, entries in 17-digit exponent notation.
pub fn write_matrix_csv(b: &IterationMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..b.dim() {
        let row: Vec<String> = b.row(i).iter().map(|&v| format_full(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_weights_csv(w: &GrunwaldWeights, path: &Path) -> Result<()> {
    let mut out = String::from("i,g\n");
    for (i, v) in w.values().iter().enumerate() {
        let _ = writeln!(out, "{i},{}", format_full(*v));
    }
    write_file(path, &out)
}

fn opt(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

fn list(vs: &[f64]) -> String {
    vs.iter().map(|&v| format_value(v)).collect::<Vec<_>>().join(";")
}

/// Flat `key = value` block. Sequences are `;`-separated, absent values empty.
pub fn report_to_kv(r: &DiagnosticsReport) -> String {
    let (left, right) = r.boundary_flux.unzip();
    let mut out = String::new();
    let _ = writeln!(out, "mass_trace = {}", list(&r.mass_trace));
    let _ = writeln!(out, "min_value = {}", format_value(r.min.value));
    let _ = writeln!(out, "min_snapshot = {}", r.min.snapshot);
    let _ = writeln!(out, "min_node = {}", r.min.node);
    let _ = writeln!(out, "steady_state_distance = {}", list(&r.steady_state_distance));
    let _ = writeln!(out, "decay_rate = {}", opt(r.decay_rate));
    let _ = writeln!(out, "boundary_flux_left = {}", opt(left));
    let _ = writeln!(out, "boundary_flux_right = {}", opt(right));
    let _ = writeln!(out, "convergence_order = {}", opt(r.convergence_order));
    out
}

/// Per-snapshot CSV rows `snapshot,t,mass,steady_state_distance`.
pub fn report_to_csv(r: &DiagnosticsReport, times: &[f64]) -> String {
    let mut out = String::from("snapshot,t,mass,steady_state_distance\n");
    for (k, (t, m)) in times.iter().zip(&r.mass_trace).enumerate() {
        let d = r.steady_state_distance.get(k).copied();
        let _ = writeln!(out, "{k},{},{},{}", format_value(*t), format_value(*m), opt(d));
    }
    out
}

pub fn write_report(r: &DiagnosticsReport, times: &[f64], path: &Path) -> Result<()> {
    write_file(path, &report_to_kv(r))?;
    let mut csv = path.as_os_str().to_owned();
    csv.push(".csv");
    write_file(Path::new(&csv), &report_to_csv(r, times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(5.0), "5");
        assert_eq!(format_value(1e-7), "1e-7");
        assert_eq!(format_value(-2.5e20), "-2.5e20");
        assert_eq!(format_full(0.375), "3.7500000000000000e-1");
    }

    proptest! {
        #[test]
        fn formatted_values_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            let back: f64 = format_value(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
            let back: f64 = format_full(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn meta_path_appends_suffix() {
        assert_eq!(meta_path(Path::new("out/run.csv")), PathBuf::from("out/run.csv.meta.json"));
    }
}
