//! End-to-end runs of the `fracdiff` binary and the CSV/JSON artifacts it writes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fracdiff::cli_io::output::{meta_path, RunMeta};
use fracdiff::cli_io::{parse_args, read_timeseries_csv, CliCommand};
use fracdiff::{run_simulation, DerivativeForm, Method};

fn fracdiff<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdiff")).args(args).output().expect("binary runs")
}

/// Splits `line` on whitespace and substitutes each `{}` with the next path.
fn argv(line: &str, paths: &[&Path]) -> Vec<String> {
    let mut paths = paths.iter();
    line.split_whitespace()
        .map(|w| if w == "{}" { paths.next().expect("path").to_str().unwrap().to_owned() } else { w.to_owned() })
        .collect()
}

#[test]
fn figure_two_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let run = fracdiff(&argv("figure 2 --n 100 --dt 0.01 --out {}", &[&out]));
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    assert_eq!(lines.next(), Some("0,0,0"));
    assert!(text.lines().any(|l| l == "0,0.5,5"));
    assert_eq!(text.lines().count(), 1 + 4 * 101);

    let meta: RunMeta = serde_json::from_str(&fs::read_to_string(meta_path(&out)).unwrap()).unwrap();
    assert_eq!(meta.deriv, "rl");
    assert_eq!((meta.left.as_str(), meta.right.as_str()), ("reflecting", "reflecting"));
    assert_eq!(meta.actual_snapshot_times, vec![0.0, 0.05, 0.1, 0.5]);
    for m in &meta.mass_trace {
        assert!((m - 1.0).abs() <= 1e-9, "{m}");
    }
}

#[test]
fn solve_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let args = argv(
        "solve --alpha 1.37 --n 40 --deriv ps --left reflecting --right absorbing --ic bump \
         --method implicit --dt 0.003 --t-end 0.1 --snapshots 0,0.01,0.1 --out {}",
        &[&out],
    );
    let CliCommand::Solve { config, .. } = parse_args(&args).unwrap() else {
        panic!("expected a solve command");
    };
    assert_eq!(fracdiff(&args).status.code(), Some(0));
    let series = run_simulation(&config).unwrap();
    let back = read_timeseries_csv(&out).unwrap();
    assert_eq!(back.len(), series.len());
    for (snap, (t, u)) in back.iter().zip(series.times.iter().zip(&series.snapshots)) {
        assert_eq!(snap.t.to_bits(), t.to_bits());
        assert_eq!(snap.u.len(), u.values().len());
        for (a, b) in snap.u.iter().zip(u.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn zero_profile_on_three_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let ic = dir.path().join("zero.txt");
    fs::write(&ic, "0\n0\n0\n").unwrap();
    let out = dir.path().join("zero.csv");
    let mut args = argv(
        "solve --alpha 1.5 --n 2 --deriv rl --left absorbing --right absorbing \
         --dt 0.01 --t-end 0.1 --snapshots 0.1 --out {}",
        &[&out],
    );
    args.extend(["--ic".to_owned(), format!("file:{}", ic.display())]);
    let run = fracdiff(&args);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let u: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(u, 0.0);
    }
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"alpha": 1.8, "n": 32, "deriv": "ps", "left": "reflecting", "right": "reflecting",
            "dt": 0.01, "t_end": 0.2, "method": "explicit", "allow_unstable": true, "out": "ignored.csv"}"#,
    )
    .unwrap();
    let out = dir.path().join("run.csv");
    let cmd = parse_args(argv("solve --config {} --method implicit --n 16 --out {}", &[&cfg, &out])).unwrap();
    let CliCommand::Solve { config, out: target, .. } = cmd else {
        panic!("expected a solve command");
    };
    assert_eq!(config.spec.alpha, 1.8);
    assert_eq!(config.spec.n, 16);
    assert_eq!(config.spec.form, DerivativeForm::PatieSimon);
    assert_eq!(config.method, Method::Implicit);
    assert_eq!(target, out);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"alpha": 1.5, "alhpa": 1.2}"#).unwrap();
    let run = fracdiff(&argv("solve --config {}", &[&cfg]));
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn report_is_written_next_to_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let report = dir.path().join("report.txt");
    let args = argv(
        "solve --alpha 1.5 --n 32 --deriv rl --left absorbing --right absorbing --dt 0.01 --t-end 0.5 \
         --snapshots 0,0.1,0.2,0.3,0.4,0.5 --out {} --report {}",
        &[&out, &report],
    );
    assert_eq!(fracdiff(&args).status.code(), Some(0));
    let kv = fs::read_to_string(&report).unwrap();
    let rate: f64 = kv.lines().find_map(|l| l.strip_prefix("decay_rate = ")).unwrap().parse().unwrap();
    assert!(rate < 0.0);
    let csv = fs::read_to_string(dir.path().join("report.txt.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn matrix_and_weights_commands() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("b.csv");
    let args = argv("matrix --alpha 1.5 --n 2 --deriv rl --left reflecting --right reflecting --out {}", &[&m]);
    assert_eq!(fracdiff(&args).status.code(), Some(0));
    let rows: Vec<Vec<f64>> =
        fs::read_to_string(&m).unwrap().lines().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows, vec![vec![-0.5, 0.375, 0.125], vec![1.0, -1.5, 0.5], vec![0.0, 1.0, -1.0]]);

    let w = dir.path().join("w.csv");
    assert_eq!(fracdiff(&argv("weights --order 1.5 --m 2 --out {}", &[&w])).status.code(), Some(0));
    let text = fs::read_to_string(&w).unwrap();
    let g: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(g, vec![1.0, -1.5, 0.375]);
}

#[test]
fn usage_errors_exit_with_two() {
    for line in [
        "solve --alpha 2.5 --n 8 --deriv rl --left absorbing --right absorbing --dt 0.01 --t-end 1 --out x.csv",
        "solve --alpha 1.5 --n 8 --deriv caputo --left reflecting --right absorbing --dt 0.01 --t-end 1 --out x.csv",
        "figure 9",
        "frobnicate",
        "verify bogus",
    ] {
        let run = fracdiff(&argv(line, &[]));
        assert_eq!(run.status.code(), Some(2), "{line}: {}", String::from_utf8_lossy(&run.stderr));
    }
}

#[test]
fn verify_suites() {
    let ok = fracdiff(&["verify", "identities"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0 failed"));

    let caputo = fracdiff(&["verify", "caputo-negativity"]);
    assert_eq!(caputo.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&caputo.stdout);
    let min: f64 = stdout
        .split_whitespace()
        .skip_while(|w| *w != "min")
        .nth(1)
        .and_then(|v| v.parse().ok())
        .expect("printed minimum");
    assert!(min < 0.0, "{stdout}");
}

#[test]
fn figure_list_names_every_protocol() {
    let run = fracdiff(&["figure", "--list"]);
    assert!(run.status.success());
    let text = String::from_utf8_lossy(&run.stdout);
    for id in 1..=7 {
        assert!(text.lines().any(|l| l.starts_with(&id.to_string())), "{text}");
    }
    assert!(text.contains("caputo"));
}
