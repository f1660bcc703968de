//! Explicit and implicit Euler time stepping with a running mass ledger.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grunwald::GridFunction;
use crate::operators::{absorbed_rates, build_matrix, BoundaryCondition, IterationMatrix, SchemeSpec};

/// Largest stable explicit step, `h^α / (C α)`.
pub fn stability_limit(alpha: f64, c: f64, h: f64) -> f64 {
    h.powf(alpha) / (c * alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Explicit,
    Implicit,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Explicit => "explicit",
            Method::Implicit => "implicit",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "explicit" => Ok(Method::Explicit),
            "implicit" => Ok(Method::Implicit),
            other => Err(format!("unknown method `{other}` (expected explicit or implicit)")),
        }
    }
}

/// Initial concentration profile, sampled pointwise at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialCondition {
    /// Piecewise-linear tent on (0.3, 0.7), peak 5 at x = 0.5, unit mass.
    Tent,
    /// `64π³/(π²-4) (x - 1/4)² sin(4πx)` on (0, 1/4), zero elsewhere.
    SineBump,
    /// Constant 1.
    Uniform,
    /// Nodal values read from a file: one value per line, or `x,u` pairs.
    FromFile(PathBuf),
}

impl InitialCondition {
    pub fn tent(x: f64) -> f64 {
        if x > 0.3 && x <= 0.5 {
            25.0 * x - 7.5
        } else if x > 0.5 && x < 0.7 {
            -25.0 * x + 17.5
        } else {
            0.0
        }
    }

    pub fn sine_bump(x: f64) -> f64 {
        use std::f64::consts::PI;
        if x > 0.0 && x < 0.25 {
            let k = 64.0 * PI.powi(3) / (PI * PI - 4.0);
            k * (x - 0.25).powi(2) * (4.0 * PI * x).sin()
        } else {
            0.0
        }
    }

    pub fn sample(&self, n: usize) -> Result<GridFunction> {
        match self {
            InitialCondition::Tent => Ok(GridFunction::from_fn(n, Self::tent)),
            InitialCondition::SineBump => Ok(GridFunction::from_fn(n, Self::sine_bump)),
            InitialCondition::Uniform => Ok(GridFunction::from_fn(n, |_| 1.0)),
            InitialCondition::FromFile(path) => read_profile(path, n),
        }
    }
}

fn read_profile(path: &Path, n: usize) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::with_capacity(n + 1);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            // A non-numeric first row is a header.
            Err(_) if values.is_empty() && lineno == 0 => continue,
            Err(_) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    reason: format!("line {}: `{field}` is not a number", lineno + 1),
                })
            }
        }
    }
    if values.len() != n + 1 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            reason: format!("expected {} nodal values for n = {n}, found {}", n + 1, values.len()),
        });
    }
    GridFunction::new(values)
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Tent => f.write_str("tent"),
            InitialCondition::SineBump => f.write_str("bump"),
            InitialCondition::Uniform => f.write_str("uniform"),
            InitialCondition::FromFile(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err("`file:` needs a path".into());
            }
            return Ok(InitialCondition::FromFile(PathBuf::from(path)));
        }
        match s.to_ascii_lowercase().as_str() {
            "tent" => Ok(InitialCondition::Tent),
            "bump" | "sinebump" | "sine-bump" => Ok(InitialCondition::SineBump),
            "uniform" => Ok(InitialCondition::Uniform),
            other => Err(format!("unknown initial condition `{other}` (expected tent, bump, uniform or file:PATH)")),
        }
    }
}

impl TryFrom<String> for InitialCondition {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<InitialCondition> for String {
    fn from(ic: InitialCondition) -> String {
        ic.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub spec: SchemeSpec,
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    /// Requested output times, sorted, within `[0, t_end]`.
    pub snapshot_times: Vec<f64>,
    pub initial: InitialCondition,
    /// Lets an explicit run exceed the stability limit.
    pub allow_unstable: bool,
}

impl SolverConfig {
    pub fn new(
        spec: SchemeSpec,
        dt: f64,
        t_end: f64,
        method: Method,
        snapshot_times: Vec<f64>,
        initial: InitialCondition,
    ) -> Result<Self> {
        let config = Self { spec, dt, t_end, method, snapshot_times, initial, allow_unstable: false };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidSpec(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidSpec(format!("t_end must be positive, got {}", self.t_end)));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(t.is_finite() && **t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::InvalidSpec(format!("snapshot time {t} lies outside [0, {}]", self.t_end)));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSpec("snapshot times must be sorted".into()));
        }
        if self.method == Method::Explicit && !self.allow_unstable {
            let limit = stability_limit(self.spec.alpha, self.spec.c, self.spec.h());
            if self.dt > limit {
                return Err(Error::StabilityViolation { dt: self.dt, limit });
            }
        }
        Ok(())
    }

    /// `β = C h^-α Δt`.
    pub fn beta(&self) -> f64 {
        self.spec.c * self.spec.h().powf(-self.spec.alpha) * self.dt
    }

    pub fn num_steps(&self) -> usize {
        step_index(self.t_end, self.dt)
    }
}

/// First step index `k` with `k dt >= t`, tolerant of rounding in `t / dt`.
fn step_index(t: f64, dt: f64) -> usize {
    let r = t / dt;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * k.max(1.0) {
        k as usize
    } else {
        r.ceil() as usize
    }
}

/// Recorded output of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub spec: SchemeSpec,
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    pub initial: InitialCondition,
    pub requested_times: Vec<f64>,
    /// Actual time of each snapshot (the first step at or after the request).
    pub times: Vec<f64>,
    pub snapshots: Vec<GridFunction>,
    /// `h Σ_j u_j` at each snapshot.
    pub mass_trace: Vec<f64>,
    /// Mass absorbed since t = 0, at each snapshot.
    pub absorbed_cumulative: Vec<f64>,
    /// Mass after every step, index 0 being the initial condition.
    pub step_mass: Vec<f64>,
    /// Cumulative absorbed mass after every step.
    pub step_absorbed: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> Option<&GridFunction> {
        self.snapshots.last()
    }

    /// `h Σ_j |u_j|` for each snapshot.
    pub fn l1_norms(&self) -> Vec<f64> {
        self.snapshots.iter().map(|u| u.h() * u.values().iter().map(|v| v.abs()).sum::<f64>()).collect()
    }
}

fn check_dims(u: &GridFunction, b: &IterationMatrix) -> Result<()> {
    if u.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: b.dim(), found: u.n() + 1 });
    }
    Ok(())
}

/// `u + β u B`.
pub fn explicit_step(u: &GridFunction, b: &IterationMatrix, beta: f64) -> Result<GridFunction> {
    check_dims(u, b)?;
    let flow = b.left_multiply(u.values())?;
    let values = u.values().iter().zip(&flow).map(|(x, f)| x + beta * f).collect();
    GridFunction::new(values)
}

/// One implicit step: solves `(I - β Bᵀ) v = u`.
pub fn implicit_step(u: &GridFunction, b: &IterationMatrix, beta: f64) -> Result<GridFunction> {
    ImplicitSolver::new(b, beta)?.step(u)
}

/// LU factorisation of `I - β Bᵀ`, reused across steps with fixed `B` and `β`.
pub struct ImplicitSolver {
    n: usize,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ImplicitSolver {
    pub fn new(b: &IterationMatrix, beta: f64) -> Result<Self> {
        let d = b.dim();
        let a = DMatrix::from_fn(d, d, |r, c| {
            let identity = if r == c { 1.0 } else { 0.0 };
            identity - beta * b.get(c, r)
        });
        let lu = a.lu();
        let u = lu.u();
        let diag = u.diagonal();
        let largest = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let smallest = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(smallest.is_finite() && largest.is_finite()) || smallest <= 1e-14 * largest.max(1.0) {
            return Err(Error::SingularSystem);
        }
        Ok(Self { n: b.n(), lu })
    }

    pub fn step(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n + 1, found: u.n() + 1 });
        }
        let rhs = DVector::from_column_slice(u.values());
        let v = self.lu.solve(&rhs).ok_or(Error::SingularSystem)?;
        GridFunction::new(v.as_slice().to_vec())
    }
}

fn total_mass(u: &GridFunction) -> f64 {
    u.h() * u.values().iter().sum::<f64>()
}

fn pin_absorbing(u: &mut GridFunction, spec: &SchemeSpec) {
    let n = u.n();
    let v = u.values_mut();
    if spec.left == BoundaryCondition::Absorbing {
        v[0] = 0.0;
    }
    if spec.right == BoundaryCondition::Absorbing {
        v[n] = 0.0;
    }
}

/// Advances the sampled initial condition to `t_end`.
///
/// Absorbing boundary nodes are zeroed in the initial data and after every
/// step. Absorbed mass per step is `h β Σ_i w_i a_i`, with `a` the absorption
/// rates of `B` and `w` the state the step's rates act on (the old state for
/// explicit steps, the new state for implicit ones).
pub fn run_simulation(config: &SolverConfig) -> Result<TimeSeries> {
    config.validate()?;
    let u0 = config.initial.sample(config.spec.n)?;
    run_simulation_from(config, u0)
}

/// Like [`run_simulation`], but starts from `u0` instead of sampling
/// `config.initial`, which is then only recorded as a label.
pub fn run_simulation_from(config: &SolverConfig, u0: GridFunction) -> Result<TimeSeries> {
    config.validate()?;
    let spec = config.spec;
    if u0.n() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n + 1, found: u0.n() + 1 });
    }
    let b = build_matrix(&spec)?;
    let rates = absorbed_rates(&spec, &b)?;
    let beta = config.beta();
    let h = spec.h();

    let mut u = u0;
    pin_absorbing(&mut u, &spec);

    let solver = match config.method {
        Method::Implicit => Some(ImplicitSolver::new(&b, beta)?),
        Method::Explicit => None,
    };

    let targets: Vec<usize> = config.snapshot_times.iter().map(|&t| step_index(t, config.dt)).collect();
    let steps = config.num_steps();

    let mut series = TimeSeries {
        spec,
        dt: config.dt,
        t_end: config.t_end,
        method: config.method,
        initial: config.initial.clone(),
        requested_times: config.snapshot_times.clone(),
        times: Vec::with_capacity(targets.len()),
        snapshots: Vec::with_capacity(targets.len()),
        mass_trace: Vec::with_capacity(targets.len()),
        absorbed_cumulative: Vec::with_capacity(targets.len()),
        step_mass: Vec::with_capacity(steps + 1),
        step_absorbed: Vec::with_capacity(steps + 1),
    };

    let mut absorbed = 0.0;
    let mut next_target = 0;
    let mut record = |k: usize, u: &GridFunction, mass: f64, absorbed: f64, series: &mut TimeSeries| {
        while next_target < targets.len() && targets[next_target] <= k {
            series.times.push(k as f64 * config.dt);
            series.snapshots.push(u.clone());
            series.mass_trace.push(mass);
            series.absorbed_cumulative.push(absorbed);
            next_target += 1;
        }
    };

    let mass0 = total_mass(&u);
    series.step_mass.push(mass0);
    series.step_absorbed.push(0.0);
    record(0, &u, mass0, 0.0, &mut series);

    for k in 1..=steps {
        let mut next = match &solver {
            Some(s) => s.step(&u)?,
            None => explicit_step(&u, &b, beta)?,
        };
        let acting = if solver.is_some() { &next } else { &u };
        let loss: f64 = acting.values().iter().zip(&rates).map(|(w, a)| w * a).sum();
        absorbed += h * beta * loss;
        pin_absorbing(&mut next, &spec);
        u = next;
        let mass = total_mass(&u);
        series.step_mass.push(mass);
        series.step_absorbed.push(absorbed);
        record(k, &u, mass, absorbed, &mut series);
    }
    Ok(series)
}
