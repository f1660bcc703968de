//! Measurements of recorded runs: mass, positivity, boundary flux, distance to
//! the analytic steady state, exponential decay, and discretisation order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grunwald::{flux_profile, DerivativeForm, GridFunction};
use crate::operators::{BoundaryCondition, SchemeSpec};
use crate::timestepper::TimeSeries;

/// Rectangle-rule mass `h Σ_{j=0}^{n} u_j`.
pub fn total_mass(u: &GridFunction) -> f64 {
    u.h() * u.values().iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SteadyKind {
    /// `(α - 1) x^{α-2}`
    PowerLaw,
    /// `1`
    Constant,
    /// `0`
    Zero,
}

/// Unit-mass steady state of a scheme, sampled at the interior-and-right nodes
/// `1..=n`. Node 0 is left out: the power law is singular there.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReference {
    pub kind: SteadyKind,
    pub n: usize,
    values: Vec<f64>,
}

impl SteadyStateReference {
    /// Reference values at nodes `1..=n`; index 0 of the slice is node 1.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn steady_state_reference(spec: &SchemeSpec) -> Result<SteadyStateReference> {
    spec.validate()?;
    let n = spec.n;
    let kind = if spec.has_absorbing() {
        SteadyKind::Zero
    } else {
        match spec.form {
            DerivativeForm::RiemannLiouville => SteadyKind::PowerLaw,
            DerivativeForm::PatieSimon => SteadyKind::Constant,
            DerivativeForm::Caputo => unreachable!("validate() rejects reflecting Caputo specs"),
        }
    };
    let values = (1..=n)
        .map(|j| {
            let x = j as f64 / n as f64;
            match kind {
                SteadyKind::PowerLaw => (spec.alpha - 1.0) * x.powf(spec.alpha - 2.0),
                SteadyKind::Constant => 1.0,
                SteadyKind::Zero => 0.0,
            }
        })
        .collect();
    Ok(SteadyStateReference { kind, n, values })
}

/// `h Σ_{j=1}^{n} |u_j - ref_j|`.
pub fn l1_distance_interior(u: &GridFunction, reference: &SteadyStateReference) -> Result<f64> {
    if u.n() != reference.n {
        return Err(Error::DimensionMismatch { expected: reference.n + 1, found: u.n() + 1 });
    }
    let sum: f64 = u.values()[1..].iter().zip(reference.values()).map(|(a, b)| (a - b).abs()).sum();
    Ok(u.h() * sum)
}

/// Global minimum over all snapshots as `(value, snapshot index, node index)`.
pub fn negativity_scan(series: &TimeSeries) -> Result<(f64, usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (k, u) in series.snapshots.iter().enumerate() {
        for (j, &v) in u.values().iter().enumerate() {
            if best.is_none_or(|(m, _, _)| v < m) {
                best = Some((v, k, j));
            }
        }
    }
    best.ok_or(Error::EmptySeries)
}

/// Least-squares slope of `ys` against `xs`.
fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Exponential rate fitted to `norms(t)`: the slope of `ln norm` against `t`
/// over the last half of the points (at least three).
pub fn decay_rate_of(times: &[f64], norms: &[f64]) -> Result<f64> {
    if times.len() != norms.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: norms.len() });
    }
    let len = times.len();
    if len < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 snapshots for a decay fit, got {len}")));
    }
    let start = (len / 2).min(len - 3);
    let (t, y): (Vec<f64>, Vec<f64>) = times[start..]
        .iter()
        .zip(&norms[start..])
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    if t.len() < 3 {
        return Err(Error::DegenerateInput("fewer than 3 snapshots with a positive norm in the fitted window".into()));
    }
    if t.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateInput("all fitted snapshots share one time".into()));
    }
    Ok(ls_slope(&t, &y))
}

/// Decay rate (1/time) of the L1 norm of a recorded run.
pub fn decay_rate(series: &TimeSeries) -> Result<f64> {
    decay_rate_of(&series.times, &series.l1_norms())
}

/// Fractional flux of the final snapshot at nodes 1 and `n`.
///
/// The flux form follows the scheme: Riemann-Liouville flux for RL specs,
/// Caputo flux for Patie-Simon specs.
pub fn boundary_flux_check(series: &TimeSeries) -> Result<(f64, f64)> {
    let spec = &series.spec;
    if spec.form == DerivativeForm::Caputo {
        return Err(Error::UnsupportedForm(spec.form));
    }
    if spec.left != BoundaryCondition::Reflecting && spec.right != BoundaryCondition::Reflecting {
        return Err(Error::UnsupportedCombination { form: spec.form, left: spec.left, right: spec.right });
    }
    let u = series.last().ok_or(Error::EmptySeries)?;
    let q = flux_profile(u, spec.alpha, spec.c, spec.form)?;
    let v = q.values();
    Ok((v[1], v[u.n()]))
}

/// Forward difference `(u_1 - u_0) / h` at the left boundary.
pub fn left_slope(u: &GridFunction) -> f64 {
    (u.values()[1] - u.values()[0]) / u.h()
}

/// Observed order: least-squares slope of `ln error` against `ln h`.
pub fn convergence_order(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 (h, error) pairs, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| w[1].0 >= w[0].0) {
        return Err(Error::DegenerateInput("h must be strictly decreasing".into()));
    }
    if samples.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateInput("h and errors must be positive".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    Ok(ls_slope(&xs, &ys))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimumLocation {
    pub value: f64,
    pub snapshot: usize,
    pub node: usize,
}

/// Summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub mass_trace: Vec<f64>,
    pub min: MinimumLocation,
    /// Interior L1 distance to the steady reference, per snapshot.
    pub steady_state_distance: Vec<f64>,
    pub decay_rate: Option<f64>,
    /// Flux at nodes 1 and n of the final snapshot, when a boundary reflects.
    pub boundary_flux: Option<(f64, f64)>,
    pub convergence_order: Option<f64>,
}

/// Collects every diagnostic that applies to `series`. Fits that need more
/// data than the run recorded are left empty.
pub fn diagnose(series: &TimeSeries) -> Result<DiagnosticsReport> {
    let (value, snapshot, node) = negativity_scan(series)?;
    let steady_state_distance = match steady_state_reference(&series.spec) {
        Ok(reference) => {
            series.snapshots.iter().map(|u| l1_distance_interior(u, &reference)).collect::<Result<Vec<_>>>()?
        }
        Err(_) => Vec::new(),
    };
    Ok(DiagnosticsReport {
        mass_trace: series.mass_trace.clone(),
        min: MinimumLocation { value, snapshot, node },
        steady_state_distance,
        decay_rate: decay_rate(series).ok(),
        boundary_flux: boundary_flux_check(series).ok(),
        convergence_order: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grunwald::DerivativeForm::{PatieSimon as PS, RiemannLiouville as RL};
    use crate::operators::BoundaryCondition::{Absorbing as A, Reflecting as R};
    use crate::timestepper::Method;
    use approx::assert_relative_eq;

    fn synthetic(times: &[f64], f: impl Fn(f64) -> f64) -> TimeSeries {
        let spec = SchemeSpec::new(RL, A, A, 1.5, 1.0, 4).unwrap();
        let snapshots: Vec<GridFunction> =
            times.iter().map(|&t| GridFunction::new(vec![0.0, f(t), f(t), f(t), 0.0]).unwrap()).collect();
        TimeSeries {
            spec,
            dt: 0.1,
            t_end: times.last().copied().unwrap_or(0.0),
            method: Method::Implicit,
            initial: crate::timestepper::InitialCondition::Uniform,
            requested_times: times.to_vec(),
            times: times.to_vec(),
            mass_trace: snapshots.iter().map(total_mass).collect(),
            absorbed_cumulative: vec![0.0; times.len()],
            step_mass: vec![],
            step_absorbed: vec![],
            snapshots,
        }
    }

    #[test]
    fn mass_examples() {
        assert_eq!(total_mass(&GridFunction::zeros(10)), 0.0);
        assert_relative_eq!(total_mass(&GridFunction::from_fn(100, |_| 1.0)), 1.01, max_relative = 1e-14);
        let tent = crate::timestepper::InitialCondition::Tent.sample(1000).unwrap();
        assert!((total_mass(&tent) - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn steady_references() {
        let r = steady_state_reference(&SchemeSpec::new(RL, R, R, 1.5, 1.0, 4).unwrap()).unwrap();
        assert_eq!(r.kind, SteadyKind::PowerLaw);
        assert_relative_eq!(r.values()[0], 0.5 * 0.25f64.powf(-0.5));
        assert_relative_eq!(r.values()[3], 0.5);
        let r = steady_state_reference(&SchemeSpec::new(PS, R, R, 1.5, 1.0, 4).unwrap()).unwrap();
        assert_eq!(r.kind, SteadyKind::Constant);
        assert!(r.values().iter().all(|&v| v == 1.0));
        for (form, l, rr) in [(RL, R, A), (RL, A, R), (PS, A, A), (PS, R, A)] {
            let r = steady_state_reference(&SchemeSpec::new(form, l, rr, 1.3, 1.0, 8).unwrap()).unwrap();
            assert_eq!(r.kind, SteadyKind::Zero);
            assert!(r.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn l1_distance_examples() {
        let spec = SchemeSpec::new(RL, R, R, 1.5, 1.0, 64).unwrap();
        let r = steady_state_reference(&spec).unwrap();
        let mut vals = vec![123.0];
        vals.extend_from_slice(r.values());
        let u = GridFunction::new(vals.clone()).unwrap();
        assert_eq!(l1_distance_interior(&u, &r).unwrap(), 0.0);
        let shifted = GridFunction::new(vals.iter().map(|v| v + 1.0).collect()).unwrap();
        assert_relative_eq!(l1_distance_interior(&shifted, &r).unwrap(), 1.0, max_relative = 1e-12);
        assert!(matches!(l1_distance_interior(&GridFunction::zeros(8), &r), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn l1_distance_tent_vs_constant() {
        // Brute-force oracle: h Σ_{j≥1} |tent(x_j) - 1|.
        let n = 1000;
        let h = 1.0 / n as f64;
        let oracle: f64 =
            (1..=n).map(|j| (crate::timestepper::InitialCondition::tent(j as f64 / n as f64) - 1.0).abs()).sum::<f64>()
                * h;
        let spec = SchemeSpec::new(PS, R, R, 1.5, 1.0, n).unwrap();
        let r = steady_state_reference(&spec).unwrap();
        let tent = crate::timestepper::InitialCondition::Tent.sample(n).unwrap();
        assert_relative_eq!(l1_distance_interior(&tent, &r).unwrap(), oracle, max_relative = 1e-14);
        // Exact integral: 0.6 off the support, 0.04 where 0 < tent < 1, 0.64 where tent > 1.
        assert_relative_eq!(oracle, 1.28, max_relative = 1e-9);
    }

    #[test]
    fn negativity_scan_examples() {
        let zero = synthetic(&[0.0, 1.0], |_| 0.0);
        assert_eq!(negativity_scan(&zero).unwrap(), (0.0, 0, 0));
        let mut s = synthetic(&[0.0, 1.0], |_| 1.0);
        s.snapshots[1].values_mut()[2] = -0.5;
        assert_eq!(negativity_scan(&s).unwrap(), (-0.5, 1, 2));
        let empty = synthetic(&[], |_| 1.0);
        assert!(matches!(negativity_scan(&empty), Err(Error::EmptySeries)));
    }

    #[test]
    fn decay_rate_of_exact_exponential() {
        let times: Vec<f64> = (0..20).map(|k| 0.1 * k as f64).collect();
        let s = synthetic(&times, |t| (-2.0 * t).exp());
        assert!((decay_rate(&s).unwrap() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn decay_rate_degenerate_inputs() {
        let s = synthetic(&[0.0, 1.0], |t| (-t).exp());
        assert!(matches!(decay_rate(&s), Err(Error::DegenerateInput(_))));
        let s = synthetic(&[0.0, 1.0, 2.0, 3.0], |_| 0.0);
        assert!(matches!(decay_rate(&s), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn convergence_order_examples() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let lin: Vec<(f64, f64)> = hs.iter().map(|&h| (h, h)).collect();
        let quad: Vec<(f64, f64)> = hs.iter().map(|&h| (h, h * h)).collect();
        assert_relative_eq!(convergence_order(&lin).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(convergence_order(&quad).unwrap(), 2.0, epsilon = 1e-12);
        assert!(convergence_order(&lin[..2]).is_err());
        assert!(convergence_order(&[(0.1, 1.0), (0.2, 0.5), (0.05, 0.1)]).is_err());
        assert!(convergence_order(&[(0.1, 1.0), (0.05, 0.0), (0.025, 0.1)]).is_err());
    }

    #[test]
    fn boundary_flux_of_zero_solution() {
        let mut s = synthetic(&[0.0], |_| 0.0);
        s.spec = SchemeSpec::new(RL, R, R, 1.5, 1.0, 4).unwrap();
        assert_eq!(boundary_flux_check(&s).unwrap(), (0.0, 0.0));
        s.spec = SchemeSpec::new(RL, A, A, 1.5, 1.0, 4).unwrap();
        assert!(boundary_flux_check(&s).is_err());
        s.spec.form = DerivativeForm::Caputo;
        assert!(matches!(boundary_flux_check(&s), Err(Error::UnsupportedForm(_))));
    }
}
