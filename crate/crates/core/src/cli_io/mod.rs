//! Command-line front end.
//!
//! ```text
//! fracdiff solve   --alpha 1.5 --n 1000 --deriv rl --left reflecting --right reflecting \
//!                  --dt 0.01 --t-end 0.5 --snapshots 0,0.05,0.1,0.5 --out run.csv
//! fracdiff matrix  --alpha 1.5 --n 8 --deriv ps --left reflecting --right absorbing --out b.csv
//! fracdiff weights --order 1.5 --m 100 --out w.csv
//! fracdiff verify  all
//! fracdiff figure  2 --out fig2.csv
//! fracdiff figure  --list
//! ```
//!
//! Exit codes: 0 success, 1 runtime or verification failure, 2 usage error.

pub mod figures;
pub mod output;
pub mod verify;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::diagnostics::diagnose;
use crate::grunwald::{grunwald_weights, DerivativeForm};
use crate::operators::{build_matrix, BoundaryCondition, SchemeSpec};
use crate::timestepper::{run_simulation, InitialCondition, Method, SolverConfig};

pub use output::{emit_timeseries_csv, read_timeseries_csv};
pub use verify::run_verify;

/// Invalid command line or config file. Maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "fracdiff", version, about = "Space-fractional diffusion on the unit interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation and write a t,x,u CSV plus a .meta.json sidecar.
    Solve(SolveArgs),
    /// Write the iteration matrix of a scheme as CSV.
    Matrix(MatrixArgs),
    /// Write Grünwald weights g_0..g_m as CSV.
    Weights(WeightsArgs),
    /// Run a property suite and print a pass/fail table.
    Verify { suite: String },
    /// Run one of the fixed demonstration protocols and write its CSV.
    Figure(FigureArgs),
}

#[derive(Debug, Args, Default)]
struct SchemeArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "c")]
    c: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    deriv: Option<String>,
    #[arg(long)]
    left: Option<String>,
    #[arg(long)]
    right: Option<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated output times.
    #[arg(long)]
    snapshots: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with the same fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write a diagnostics report (key = value) and its .csv companion.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run an explicit scheme above the stability limit.
    #[arg(long)]
    allow_unstable: bool,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WeightsArgs {
    #[arg(long, allow_hyphen_values = true)]
    order: f64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FigureArgs {
    id: Option<u8>,
    #[arg(long)]
    list: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    method: Option<String>,
}

/// JSON run file. Field names mirror the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub deriv: Option<String>,
    pub left: Option<String>,
    pub right: Option<String>,
    pub ic: Option<String>,
    pub method: Option<String>,
    pub snapshots: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub allow_unstable: Option<bool>,
}

impl RunFile {
    fn load(path: &Path) -> Result<Self, UsageError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliCommand {
    Solve {
        config: SolverConfig,
        out: PathBuf,
        report: Option<PathBuf>,
    },
    Matrix {
        spec: SchemeSpec,
        out: PathBuf,
    },
    Weights {
        order: f64,
        m: usize,
        out: PathBuf,
    },
    Verify {
        suite: String,
    },
    Figure {
        id: u8,
        config: SolverConfig,
        out: PathBuf,
    },
    FigureList,
    /// `--help` / `--version` output, printed verbatim with exit code 0.
    Info(String),
}

fn parse_named<T: std::str::FromStr<Err = String>>(flag: &str, v: &str) -> Result<T, UsageError> {
    v.parse().map_err(|e: String| usage(format!("--{flag}: {e}")))
}

fn required<T>(flag: &str, v: Option<T>) -> Result<T, UsageError> {
    v.ok_or_else(|| usage(format!("missing required --{flag}")))
}

fn scheme_from(args: SchemeArgs, file: &RunFile) -> Result<SchemeSpec, UsageError> {
    let alpha = required("alpha", args.alpha.or(file.alpha))?;
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(usage(format!("--alpha must lie in (1, 2), got {alpha}")));
    }
    let c = args.c.or(file.c).unwrap_or(1.0);
    let n = required("n", args.n.or(file.n))?;
    let deriv: DerivativeForm = parse_named("deriv", &required("deriv", args.deriv.or(file.deriv.clone()))?)?;
    let left: BoundaryCondition = parse_named("left", &required("left", args.left.or(file.left.clone()))?)?;
    let right: BoundaryCondition = parse_named("right", &required("right", args.right.or(file.right.clone()))?)?;
    SchemeSpec::new(deriv, left, right, alpha, c, n).map_err(|e| usage(e.to_string()))
}

fn parse_times(s: &str) -> Result<Vec<f64>, UsageError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("--snapshots: `{t}` is not a number"))))
        .collect()
}

fn solve_command(args: SolveArgs) -> Result<CliCommand, UsageError> {
    let file = match &args.config {
        Some(p) => RunFile::load(p)?,
        None => RunFile::default(),
    };
    let spec = scheme_from(args.scheme, &file)?;
    let dt = required("dt", args.dt.or(file.dt))?;
    let t_end = required("t-end", args.t_end.or(file.t_end))?;
    let initial: InitialCondition = match args.ic.or(file.ic.clone()) {
        Some(s) => parse_named("ic", &s)?,
        None => InitialCondition::Tent,
    };
    let method: Method = match args.method.or(file.method.clone()) {
        Some(s) => parse_named("method", &s)?,
        None => Method::Implicit,
    };
    let snapshots = match args.snapshots {
        Some(s) => parse_times(&s)?,
        None => file.snapshots.clone().unwrap_or_else(|| vec![0.0, t_end]),
    };
    let out = required("out", args.out.or(file.out.clone()))?;
    let config = SolverConfig {
        spec,
        dt,
        t_end,
        method,
        snapshot_times: snapshots,
        initial,
        allow_unstable: args.allow_unstable || file.allow_unstable.unwrap_or(false),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(CliCommand::Solve { config, out, report: args.report })
}

/// Parses a full argument vector (without the program name).
pub fn parse_args<I, S>(argv: I) -> Result<CliCommand, UsageError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("fracdiff")).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(CliCommand::Info(e.to_string())),
                _ => {
                    let rendered = e.to_string();
                    let first = rendered.lines().next().unwrap_or("invalid arguments");
                    Err(usage(first.trim_start_matches("error: ").to_string()))
                }
            };
        }
    };
    match cli.command {
        Command::Solve(args) => solve_command(args),
        Command::Matrix(args) => {
            let file = match &args.config {
                Some(p) => RunFile::load(p)?,
                None => RunFile::default(),
            };
            let out = required("out", args.out.or(file.out.clone()))?;
            Ok(CliCommand::Matrix { spec: scheme_from(args.scheme, &file)?, out })
        }
        Command::Weights(args) => {
            if !args.order.is_finite() {
                return Err(usage("--order must be finite"));
            }
            Ok(CliCommand::Weights { order: args.order, m: args.m, out: args.out })
        }
        Command::Verify { suite } => Ok(CliCommand::Verify { suite }),
        Command::Figure(args) => {
            if args.list {
                return Ok(CliCommand::FigureList);
            }
            let id = required("id", args.id)?;
            let fig = figures::figure(id).ok_or_else(|| usage(format!("unknown figure {id} (see `figure --list`)")))?;
            let method = match args.method {
                Some(s) => parse_named("method", &s)?,
                None => Method::Implicit,
            };
            let config = fig
                .config(args.n.unwrap_or(figures::DEFAULT_N), args.dt.unwrap_or(figures::DEFAULT_DT), method)
                .map_err(|e| usage(e.to_string()))?;
            let out = args.out.unwrap_or_else(|| PathBuf::from(format!("figure{id}.csv")));
            Ok(CliCommand::Figure { id, config, out })
        }
    }
}

fn solve_and_write(config: &SolverConfig, out: &Path, report: Option<&Path>) -> crate::Result<()> {
    let series = run_simulation(config)?;
    emit_timeseries_csv(&series, out)?;
    if let Some(path) = report {
        let r = diagnose(&series)?;
        output::write_report(&r, &series.times, path)?;
    }
    Ok(())
}

/// Executes a parsed command and returns the process exit code.
pub fn execute(cmd: CliCommand) -> i32 {
    let result = match cmd {
        CliCommand::Info(text) => {
            print!("{text}");
            return 0;
        }
        CliCommand::Verify { suite } => return run_verify(&suite),
        CliCommand::FigureList => {
            print!("{}", figures::catalogue());
            return 0;
        }
        CliCommand::Solve { config, out, report } => solve_and_write(&config, &out, report.as_deref()),
        CliCommand::Figure { config, out, .. } => solve_and_write(&config, &out, None),
        CliCommand::Matrix { spec, out } => build_matrix(&spec).and_then(|b| output::write_matrix_csv(&b, &out)),
        CliCommand::Weights { order, m, out } => output::write_weights_csv(&grunwald_weights(order, m), &out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Parse and execute; usage errors print one line and return 2.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cmd) => execute(cmd),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grunwald::DerivativeForm::RiemannLiouville;
    use crate::operators::BoundaryCondition::Reflecting;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn solve_mirrors_reflecting_protocol() {
        let cmd = parse_args(args(
            "solve --alpha 1.5 --c 1 --n 1000 --deriv rl --left reflecting --right reflecting \
             --ic tent --method implicit --dt 0.01 --t-end 0.5 --snapshots 0,0.05,0.1,0.5 --out run.csv",
        ))
        .unwrap();
        let CliCommand::Solve { config, out, report } = cmd else {
            panic!("expected solve");
        };
        assert_eq!(out, PathBuf::from("run.csv"));
        assert!(report.is_none());
        assert_eq!(config.spec.form, RiemannLiouville);
        assert_eq!(config.spec.left, Reflecting);
        assert_eq!(config.spec.right, Reflecting);
        assert_eq!(config.spec.n, 1000);
        assert_eq!(config.snapshot_times, vec![0.0, 0.05, 0.1, 0.5]);
        assert_eq!(config.method, Method::Implicit);
        assert_eq!(config.initial, InitialCondition::Tent);
    }

    #[test]
    fn weights_command() {
        assert_eq!(
            parse_args(args("weights --order 1.5 --m 2 --out w.csv")).unwrap(),
            CliCommand::Weights { order: 1.5, m: 2, out: "w.csv".into() }
        );
        assert!(matches!(parse_args(args("weights --order -0.5 --m 2 --out w.csv")), Ok(CliCommand::Weights { .. })));
    }

    #[test]
    fn usage_errors() {
        let base = "--c 1 --n 100 --deriv rl --left absorbing --right absorbing --dt 0.01 --t-end 0.1 --out x.csv";
        assert!(parse_args(args(&format!("solve --alpha 2.5 {base}"))).is_err());
        assert!(parse_args(args(&format!("solve --alpha 1.5 {base} --deriv foo"))).is_err());
        assert!(parse_args(args(&format!("solve --alpha 1.5 {base} --snapshots 0,x"))).is_err());
        assert!(parse_args(args("solve --alpha 1.5")).is_err());
        assert!(parse_args(args("frobnicate")).is_err());
        assert!(parse_args(args("figure 9")).is_err());
        let explicit = format!("solve --alpha 1.5 {base} --method explicit");
        assert!(parse_args(args(&explicit)).unwrap_err().0.contains("stability"));
        assert!(parse_args(args(&format!("{explicit} --allow-unstable"))).is_ok());
        assert!(parse_args(args("solve --alpha 1.5 --c 1 --n 10 --deriv caputo --left reflecting --right absorbing --dt 0.1 --t-end 1 --out a.csv")).is_err());
        assert_eq!(main_with_args(args(&format!("solve --alpha 2.5 {base}"))), 2);
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"alpha": 1.7, "n": 64, "deriv": "ps", "left": "reflecting", "right": "absorbing",
                "dt": 0.001, "t_end": 0.1, "snapshots": [0, 0.1], "out": "a.csv", "ic": "bump"}"#,
        )
        .unwrap();
        let cmd = parse_args(vec![
            "solve".to_string(),
            "--config".into(),
            path.display().to_string(),
            "--alpha".into(),
            "1.3".into(),
        ])
        .unwrap();
        let CliCommand::Solve { config, out, .. } = cmd else { panic!() };
        assert_eq!(config.spec.alpha, 1.3);
        assert_eq!(config.spec.n, 64);
        assert_eq!(config.spec.form, DerivativeForm::PatieSimon);
        assert_eq!(config.initial, InitialCondition::SineBump);
        assert_eq!(config.snapshot_times, vec![0.0, 0.1]);
        assert_eq!(out, PathBuf::from("a.csv"));

        std::fs::write(&path, r#"{"alpha": 1.5, "bogus": 1}"#).unwrap();
        assert!(parse_args(vec!["solve".to_string(), "--config".into(), path.display().to_string()]).is_err());
    }

    #[test]
    fn figure_commands() {
        assert_eq!(parse_args(args("figure --list")).unwrap(), CliCommand::FigureList);
        let CliCommand::Figure { id, config, out } = parse_args(args("figure 7 --n 64")).unwrap() else { panic!() };
        assert_eq!(id, 7);
        assert_eq!(config.spec.n, 64);
        assert_eq!(config.spec.form, DerivativeForm::Caputo);
        assert_eq!(config.t_end, 0.2);
        assert_eq!(out, PathBuf::from("figure7.csv"));
    }

    #[test]
    fn help_is_not_a_usage_error() {
        assert!(matches!(parse_args(args("--help")), Ok(CliCommand::Info(_))));
    }
}
