//! Grünwald weights and Grünwald-Letnikov evaluation of fractional derivatives
//! on the uniform grid `x_j = j/n` of the unit interval.
//!
//! Three derivative forms are supported, all of order `alpha` in `(1, 2)` and
//! all with lower terminal 0:
//!
//! * Riemann-Liouville, with differentiation outside the memory integral;
//! * Patie-Simon, the first derivative of the Caputo derivative of order
//!   `alpha - 1` (the generator arising from a Caputo fractional Fick's law);
//! * Caputo, with both derivatives inside the memory integral.
//!
//! The grid evaluators only see node values. Shifted sums at the last node
//! reference `x_{n+1} = 1 + h`, which lies off the grid and is read as 0.
//! When the exterior value matters (for instance, when checking accuracy at
//! `x = 1`), use the `*_at` variants, which sample a closure instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gamma function for the scalar constants that appear in the analytic
/// formulas (`Γ(2 - α)`, `Γ(1 - α)`, ...). Poles return a non-finite value.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Prefix `g_0, ..., g_m` of the Grünwald weights `g_i = (-1)^i binom(order, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrunwaldWeights {
    order: f64,
    values: Vec<f64>,
}

impl GrunwaldWeights {
    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Highest index `m` held by this prefix.
    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    /// Weight `g_i`. Panics if `i` exceeds the computed prefix.
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

impl std::ops::Index<usize> for GrunwaldWeights {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Computes `g_0..=g_m` with the multiplicative recursion
/// `g_i = g_{i-1} (i - 1 - order) / i`.
///
/// Gamma ratios are never used: they overflow long before the weights
/// themselves become small.
pub fn grunwald_weights(order: f64, m: usize) -> GrunwaldWeights {
    let mut values = Vec::with_capacity(m + 1);
    values.push(1.0);
    for i in 1..=m {
        let prev = values[i - 1];
        values.push(prev * ((i - 1) as f64 - order) / i as f64);
    }
    GrunwaldWeights { order, values }
}

/// Largest relative deviation from the defining recursion over the prefix.
pub fn recursion_residual(w: &GrunwaldWeights) -> f64 {
    let v = w.values();
    let mut worst: f64 = (v[0] - 1.0).abs();
    for i in 1..v.len() {
        let expected = v[i - 1] * ((i - 1) as f64 - w.order()) / i as f64;
        let scale = expected.abs().max(f64::MIN_POSITIVE);
        worst = worst.max((v[i] - expected).abs() / scale);
    }
    worst
}

/// `|Σ_{i=0}^{m} g^order_i - g^{order-1}_m|`.
pub fn cumulative_sum_residual(order: f64, m: usize) -> f64 {
    let w = grunwald_weights(order, m);
    let shifted = grunwald_weights(order - 1.0, m);
    let partial: f64 = w.values().iter().sum();
    (partial - shifted[m]).abs()
}

/// Nodal values on the uniform grid `x_j = j h`, `h = 1/n`, `j = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n: usize,
    h: f64,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps `n + 1` nodal values. At least two nodes are required.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSpec(format!("a grid function needs at least 2 nodes, got {}", values.len())));
        }
        let n = values.len() - 1;
        Ok(Self { n, h: 1.0 / n as f64, values })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "grid needs at least one interval");
        Self { n, h: 1.0 / n as f64, values: vec![0.0; n + 1] }
    }

    /// Samples `f` pointwise at the nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n >= 1, "grid needs at least one interval");
        let values = (0..=n).map(|j| f(node(n, j))).collect();
        Self { n, h: 1.0 / n as f64, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x(&self, j: usize) -> f64 {
        node(self.n, j)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Sample at node `k`; nodes past `n` read as 0.
    fn sample(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }
}

/// Position of node `j` on the grid with `n` intervals. Computed as a ratio so
/// that dyadic positions such as 0.5 are exact.
pub fn node(n: usize, j: usize) -> f64 {
    j as f64 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DerivativeForm {
    #[serde(rename = "rl")]
    RiemannLiouville,
    #[serde(rename = "ps")]
    PatieSimon,
    #[serde(rename = "caputo")]
    Caputo,
}

impl DerivativeForm {
    pub const ALL: [DerivativeForm; 3] =
        [DerivativeForm::RiemannLiouville, DerivativeForm::PatieSimon, DerivativeForm::Caputo];

    pub fn as_str(self) -> &'static str {
        match self {
            DerivativeForm::RiemannLiouville => "rl",
            DerivativeForm::PatieSimon => "ps",
            DerivativeForm::Caputo => "caputo",
        }
    }
}

impl fmt::Display for DerivativeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DerivativeForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rl" | "riemann-liouville" => Ok(DerivativeForm::RiemannLiouville),
            "ps" | "patie-simon" => Ok(DerivativeForm::PatieSimon),
            "caputo" => Ok(DerivativeForm::Caputo),
            other => Err(format!("unknown derivative form `{other}` (expected rl, ps or caputo)")),
        }
    }
}

pub(crate) fn check_order(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidOrder(alpha))
    }
}

/// Weights of orders `alpha`, `alpha - 1`, `alpha - 2`, each up to index `m`.
struct WeightSet {
    a: GrunwaldWeights,
    a1: GrunwaldWeights,
    a2: GrunwaldWeights,
}

impl WeightSet {
    fn new(alpha: f64, m: usize) -> Self {
        Self {
            a: grunwald_weights(alpha, m),
            a1: grunwald_weights(alpha - 1.0, m),
            a2: grunwald_weights(alpha - 2.0, m),
        }
    }
}

// Sums below are written for node j with a sampler over node indices
// 0..=j+1, and are not yet scaled by h^-alpha.

fn rl_sum(w: &WeightSet, j: usize, shifted: bool, s: &impl Fn(usize) -> f64) -> f64 {
    if shifted {
        (0..=j + 1).map(|i| w.a[i] * s(j + 1 - i)).sum()
    } else {
        (0..=j).map(|i| w.a[i] * s(j - i)).sum()
    }
}

fn ps_sum(w: &WeightSet, j: usize, s: &impl Fn(usize) -> f64) -> f64 {
    rl_sum(w, j, true, s) - w.a1[j + 1] * s(0)
}

fn caputo_sum(w: &WeightSet, j: usize, s: &impl Fn(usize) -> f64) -> f64 {
    let tail = w.a2[j + 1];
    ps_sum(w, j, s) - tail * s(1) + tail * s(0)
}

fn eval_grid(
    f: &GridFunction,
    alpha: f64,
    kernel: impl Fn(&WeightSet, usize, &dyn Fn(usize) -> f64) -> f64,
) -> Result<GridFunction> {
    check_order(alpha)?;
    let n = f.n();
    let w = WeightSet::new(alpha, n + 1);
    let scale = f.h().powf(-alpha);
    let sampler = |k: usize| f.sample(k);
    let values = (0..=n).map(|j| scale * kernel(&w, j, &sampler)).collect();
    GridFunction::new(values)
}

fn eval_point(
    f: impl Fn(f64) -> f64,
    n: usize,
    j: usize,
    alpha: f64,
    kernel: impl Fn(&WeightSet, usize, &dyn Fn(usize) -> f64) -> f64,
) -> Result<f64> {
    check_order(alpha)?;
    if n == 0 {
        return Err(Error::InvalidSpec("grid needs at least one interval".into()));
    }
    let w = WeightSet::new(alpha, j + 2);
    let h = 1.0 / n as f64;
    let sampler = |k: usize| f(node(n, k));
    Ok(h.powf(-alpha) * kernel(&w, j, &sampler))
}

/// Grünwald approximation of the Riemann-Liouville derivative at every node.
///
/// Unshifted: `h^-α Σ_{i=0}^{j} g_i f(x_j - i h)`.
/// Shifted: `h^-α Σ_{i=0}^{j+1} g_i f(x_j - (i-1) h)`.
pub fn rl_derivative_grid(f: &GridFunction, alpha: f64, shifted: bool) -> Result<GridFunction> {
    eval_grid(f, alpha, |w, j, s| rl_sum(w, j, shifted, &s))
}

/// Grünwald approximation of the Patie-Simon derivative at every node.
pub fn ps_derivative_grid(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    eval_grid(f, alpha, |w, j, s| ps_sum(w, j, &s))
}

/// Grünwald approximation of the Caputo derivative at every node.
pub fn caputo_derivative_grid(f: &GridFunction, alpha: f64) -> Result<GridFunction> {
    eval_grid(f, alpha, |w, j, s| caputo_sum(w, j, &s))
}

/// Shifted or unshifted Riemann-Liouville sum at node `j` of an `n`-interval
/// grid, sampling `f` directly (including at `x_{n+1}` if needed).
pub fn rl_derivative_at(f: impl Fn(f64) -> f64, n: usize, j: usize, alpha: f64, shifted: bool) -> Result<f64> {
    eval_point(f, n, j, alpha, |w, j, s| rl_sum(w, j, shifted, &s))
}

pub fn ps_derivative_at(f: impl Fn(f64) -> f64, n: usize, j: usize, alpha: f64) -> Result<f64> {
    eval_point(f, n, j, alpha, |w, j, s| ps_sum(w, j, &s))
}

pub fn caputo_derivative_at(f: impl Fn(f64) -> f64, n: usize, j: usize, alpha: f64) -> Result<f64> {
    eval_point(f, n, j, alpha, |w, j, s| caputo_sum(w, j, &s))
}

/// Fractional Fick flux `q = -C D^{α-1} u` at every node, from the unshifted
/// Grünwald sum of order `α - 1`.
///
/// For the Patie-Simon form the flux is the Caputo flux. Its boundary term is
/// discretised as `h^{1-α} g^{α-2}_j u_0`, i.e. the sum becomes
/// `Σ_i g^{α-1}_i (u_{j-i} - u_0)`, which annihilates constants exactly and
/// tends to `u_0 x^{1-α} / Γ(2-α)` as `h → 0`.
pub fn flux_profile(u: &GridFunction, alpha: f64, c: f64, form: DerivativeForm) -> Result<GridFunction> {
    check_order(alpha)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidSpec(format!("diffusivity must be positive, got {c}")));
    }
    let caputo_flux = match form {
        DerivativeForm::RiemannLiouville => false,
        DerivativeForm::PatieSimon => true,
        DerivativeForm::Caputo => return Err(Error::UnsupportedForm(form)),
    };
    let n = u.n();
    let g = grunwald_weights(alpha - 1.0, n);
    let v = u.values();
    let scale = -c * u.h().powf(1.0 - alpha);
    let values = (0..=n)
        .map(|j| {
            let base = if caputo_flux { v[0] } else { 0.0 };
            let sum: f64 = (0..=j).map(|i| g[i] * (v[j - i] - base)).sum();
            scale * sum
        })
        .collect();
    GridFunction::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_small_examples() {
        assert_eq!(grunwald_weights(1.5, 2).values(), &[1.0, -1.5, 0.375]);
        assert_eq!(grunwald_weights(1.0, 3).values(), &[1.0, -1.0, 0.0, 0.0]);
        assert_eq!(grunwald_weights(0.5, 3).values(), &[1.0, -0.5, -0.125, -0.0625]);
        assert_eq!(grunwald_weights(0.7, 0).values(), &[1.0]);
    }

    #[test]
    fn weights_sign_pattern() {
        for &alpha in &[1.1, 1.5, 1.9] {
            let w = grunwald_weights(alpha, 500);
            assert!(w[1] < 0.0);
            for i in (0..=500).filter(|&i| i != 1) {
                assert!(w[i] > 0.0, "g_{i} for alpha {alpha}");
            }
        }
    }

    #[test]
    fn weights_large_index_stays_finite() {
        // Gamma ratios overflow past i ~ 170; the recursion does not.
        let w = grunwald_weights(1.5, 5000);
        assert!(w.values().iter().all(|v| v.is_finite()));
        assert!(w[5000] > 0.0 && w[5000] < 1e-5);
    }

    #[test]
    fn weights_match_gamma_formula_for_small_index() {
        let alpha = 1.3;
        let w = grunwald_weights(alpha, 20);
        for i in 0..=20 {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let exact = sign * gamma(alpha + 1.0) / (gamma(i as f64 + 1.0) * gamma(alpha - i as f64 + 1.0));
            assert_relative_eq!(w[i], exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_constants() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(gamma(0.5), sqrt_pi, max_relative = 1e-13);
        assert_relative_eq!(gamma(-0.5), -2.0 * sqrt_pi, max_relative = 1e-13);
        assert_relative_eq!(gamma(1.5), 0.5 * sqrt_pi, max_relative = 1e-13);
        assert_relative_eq!(gamma(4.5), 11.631_728_396_567_45, max_relative = 1e-13);
        assert_relative_eq!(gamma(-1.5), 4.0 / 3.0 * sqrt_pi, max_relative = 1e-13);
    }

    #[test]
    fn zero_function_has_zero_derivatives() {
        let z = GridFunction::zeros(16);
        for shifted in [false, true] {
            assert!(rl_derivative_grid(&z, 1.5, shifted).unwrap().values().iter().all(|&v| v == 0.0));
        }
        assert!(ps_derivative_grid(&z, 1.5).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(caputo_derivative_grid(&z, 1.5).unwrap().values().iter().all(|&v| v == 0.0));
        for form in [DerivativeForm::RiemannLiouville, DerivativeForm::PatieSimon] {
            let q = flux_profile(&z, 1.5, 1.0, form).unwrap();
            assert!(q.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn order_outside_range_is_rejected() {
        let f = GridFunction::zeros(4);
        for bad in [1.0, 2.0, 2.5, 0.5, f64::NAN] {
            assert!(matches!(rl_derivative_grid(&f, bad, true), Err(Error::InvalidOrder(_))));
            assert!(matches!(ps_derivative_grid(&f, bad), Err(Error::InvalidOrder(_))));
            assert!(matches!(caputo_derivative_grid(&f, bad), Err(Error::InvalidOrder(_))));
        }
    }

    #[test]
    fn caputo_flux_is_rejected() {
        let f = GridFunction::zeros(4);
        assert!(matches!(
            flux_profile(&f, 1.5, 1.0, DerivativeForm::Caputo),
            Err(Error::UnsupportedForm(DerivativeForm::Caputo))
        ));
    }

    #[test]
    fn shifted_last_node_reads_exterior_as_zero() {
        // f = 1 at every node: the shifted sum at node n lacks g_0 * f(x_{n+1}).
        let n = 8;
        let f = GridFunction::from_fn(n, |_| 1.0);
        let d = rl_derivative_grid(&f, 1.5, true).unwrap();
        let w = grunwald_weights(1.5, n + 1);
        let expected: f64 = w.values()[1..].iter().sum::<f64>() * (1.0 / n as f64).powf(-1.5);
        assert_relative_eq!(d.values()[n], expected, max_relative = 1e-12);
    }

    #[test]
    fn grid_and_pointwise_agree_at_interior_nodes() {
        let n = 64;
        let f = |x: f64| (3.0 * x).sin() + x * x;
        let g = GridFunction::from_fn(n, f);
        let rl = rl_derivative_grid(&g, 1.4, true).unwrap();
        let ps = ps_derivative_grid(&g, 1.4).unwrap();
        let cap = caputo_derivative_grid(&g, 1.4).unwrap();
        for j in [1, 10, 33, n - 1] {
            assert_relative_eq!(rl.values()[j], rl_derivative_at(f, n, j, 1.4, true).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(ps.values()[j], ps_derivative_at(f, n, j, 1.4).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(cap.values()[j], caputo_derivative_at(f, n, j, 1.4).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn rl_flux_of_constant_matches_power_formula() {
        // D^{α-1} 1 = x^{1-α} / Γ(2-α)
        let alpha = 1.5;
        let mut prev = f64::INFINITY;
        for n in [256, 512, 1024] {
            let u = GridFunction::from_fn(n, |_| 1.0);
            let q = flux_profile(&u, alpha, 1.0, DerivativeForm::RiemannLiouville).unwrap();
            let j = n / 2;
            let exact = -(0.5f64).powf(1.0 - alpha) / gamma(2.0 - alpha);
            let err = (q.values()[j] - exact).abs();
            assert!(err < 5.0 / n as f64, "n={n} err={err}");
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn caputo_flux_of_constant_is_zero() {
        let u = GridFunction::from_fn(100, |_| 3.0);
        let q = flux_profile(&u, 1.7, 2.0, DerivativeForm::PatieSimon).unwrap();
        for &v in q.values() {
            assert!(v.abs() < 1e-11, "{v}");
        }
    }

    #[test]
    fn rl_flux_of_power_law_steady_state_vanishes() {
        // u = 0.5 x^{-0.5} has D^{0.5} u = 0 on (0, 1]; node 0 is singular and excluded.
        let alpha = 1.5;
        let mut prev = f64::INFINITY;
        for n in [128, 256, 512, 1024] {
            let mut u = GridFunction::from_fn(n, |x| if x > 0.0 { 0.5 * x.powf(alpha - 2.0) } else { 0.0 });
            // node 0 carries the excluded singular sample
            u.values_mut()[0] = 0.0;
            let q = flux_profile(&u, alpha, 1.0, DerivativeForm::RiemannLiouville).unwrap();
            let j = n / 2;
            let err = q.values()[j].abs();
            assert!(err < prev, "n={n} err={err} prev={prev}");
            prev = err;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn derivative_form_parses() {
        assert_eq!("rl".parse::<DerivativeForm>().unwrap(), DerivativeForm::RiemannLiouville);
        assert_eq!("PS".parse::<DerivativeForm>().unwrap(), DerivativeForm::PatieSimon);
        assert_eq!("caputo".parse::<DerivativeForm>().unwrap(), DerivativeForm::Caputo);
        assert!("x".parse::<DerivativeForm>().is_err());
    }

    #[test]
    fn grid_function_needs_two_nodes() {
        assert!(GridFunction::new(vec![1.0]).is_err());
        let g = GridFunction::new(vec![0.0; 1025]).unwrap();
        assert_eq!(g.n(), 1024);
        assert!((g.h() * g.n() as f64 - 1.0).abs() <= 1e-15);
        assert_eq!(g.x(512), 0.5);
    }
}
