//! Iteration matrices for every supported combination of derivative form and
//! boundary conditions.
//!
//! `B = [b_ij]` is stored densely, row-major, and always read as "rate of mass
//! transfer from node `i` to node `j`". One explicit Euler step is the row-vector
//! update `u <- u + β u B` with `β = C h^-α Δt`; `β` is never folded into `B`.
//!
//! Every matrix is lower Hessenberg (`b_ij = 0` for `i > j + 1`: mass moves at
//! most one node to the left) with Toeplitz interior columns `b_ij = g^α_{j-i+1}`.
//! The boundary conditions only touch column 0, column `n`, and for the
//! Patie-Simon and Caputo forms the rows fed by `u_0` and `u_1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grunwald::{check_order, grunwald_weights, DerivativeForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Zero value at the boundary node; mass sent onto or past it is removed.
    Absorbing,
    /// Zero fractional flux; mass sent onto or past the boundary stays there.
    Reflecting,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Absorbing => "absorbing",
            BoundaryCondition::Reflecting => "reflecting",
        }
    }

    pub fn is_absorbing(self) -> bool {
        self == BoundaryCondition::Absorbing
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryCondition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "absorbing" | "a" => Ok(BoundaryCondition::Absorbing),
            "reflecting" | "r" => Ok(BoundaryCondition::Reflecting),
            other => Err(format!("unknown boundary condition `{other}` (expected absorbing or reflecting)")),
        }
    }
}

/// Full identity of a discretised problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub form: DerivativeForm,
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub alpha: f64,
    /// Diffusivity, length^α / time.
    pub c: f64,
    /// Number of grid intervals; nodes are `0..=n`.
    pub n: usize,
}

impl SchemeSpec {
    pub fn new(
        form: DerivativeForm,
        left: BoundaryCondition,
        right: BoundaryCondition,
        alpha: f64,
        c: f64,
        n: usize,
    ) -> Result<Self> {
        let spec = Self { form, left, right, alpha, c, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.alpha)
            .map_err(|_| Error::InvalidSpec(format!("alpha must lie in (1, 2), got {}", self.alpha)))?;
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidSpec(format!("diffusivity C must be positive, got {}", self.c)));
        }
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("n must be at least 2 so interior nodes exist, got {}", self.n)));
        }
        if self.form == DerivativeForm::Caputo
            && (self.left != BoundaryCondition::Absorbing || self.right != BoundaryCondition::Absorbing)
        {
            return Err(Error::UnsupportedCombination { form: self.form, left: self.left, right: self.right });
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// True when both ends reflect, i.e. the scheme conserves mass.
    pub fn is_conservative(&self) -> bool {
        self.left == BoundaryCondition::Reflecting && self.right == BoundaryCondition::Reflecting
    }

    pub fn has_absorbing(&self) -> bool {
        self.left.is_absorbing() || self.right.is_absorbing()
    }
}

/// Dense `(n+1) x (n+1)` rate matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl IterationMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![0.0; (n + 1) * (n + 1)] }
    }

    /// Builds from explicit rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: dim });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend(row);
        }
        Ok(Self { n: dim - 1, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows (and columns), `n + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim() + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let d = self.dim();
        self.entries[i * d + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.entries[i * d..(i + 1) * d]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row-vector product `u B`.
    pub fn left_multiply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        let mut out = vec![0.0; self.dim()];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(i)) {
                *o += ui * b;
            }
        }
        Ok(out)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim()];
        for i in 0..self.dim() {
            for (s, &b) in sums.iter_mut().zip(self.row(i)) {
                *s += b;
            }
        }
        sums
    }
}

/// Builds `B` for `spec`. Entries come from the Grünwald weights of orders
/// `α`, `α - 1` and `α - 2`.
pub fn build_matrix(spec: &SchemeSpec) -> Result<IterationMatrix> {
    spec.validate()?;
    let n = spec.n;
    let g = grunwald_weights(spec.alpha, n + 1);
    let g1 = grunwald_weights(spec.alpha - 1.0, n + 1);
    let g2 = grunwald_weights(spec.alpha - 2.0, n + 1);
    let mut b = IterationMatrix::zeros(n);

    // Toeplitz interior columns. Row 0 is overwritten below for the forms
    // whose derivative carries an explicit u_0 (and u_1) boundary term.
    for j in 1..n {
        for i in 0..=j + 1 {
            b.set(i, j, g[j + 1 - i]);
        }
    }

    match spec.form {
        DerivativeForm::RiemannLiouville => {
            if spec.left == BoundaryCondition::Reflecting {
                b.set(0, 0, 1.0 - spec.alpha);
                b.set(1, 0, 1.0);
            }
            if spec.right == BoundaryCondition::Reflecting {
                for i in 0..=n {
                    b.set(i, n, -g1[n - i]);
                }
            }
        }
        DerivativeForm::PatieSimon => {
            for j in 1..n {
                b.set(0, j, -g1[j]);
            }
            if spec.left == BoundaryCondition::Reflecting {
                b.set(0, 0, -1.0);
                b.set(1, 0, 1.0);
            }
            if spec.right == BoundaryCondition::Reflecting {
                // Keeps row 0 mass-preserving: Σ_{j<n} g^{α-1}_j = g^{α-2}_{n-1}.
                b.set(0, n, g2[n - 1]);
                for i in 1..=n {
                    b.set(i, n, -g1[n - i]);
                }
            }
        }
        DerivativeForm::Caputo => {
            // validate() restricts Caputo to absorbing/absorbing.
            for j in 1..n {
                b.set(0, j, -g1[j] + g2[j + 1]);
                b.set(1, j, g[j] - g2[j + 1]);
            }
        }
    }
    Ok(b)
}

/// `Σ_j b_ij` for each row `i`.
pub fn row_sums(b: &IterationMatrix) -> Vec<f64> {
    (0..b.dim()).map(|i| b.row(i).iter().sum()).collect()
}

/// Per-node absorption rate `a_i = -Σ_j b_ij` (per unit `β`).
///
/// Positive entries mean mass leaves the system from node `i`. Rows of
/// absorbing boundary nodes may carry any sign; those nodes hold no mass, so
/// their entries never contribute to the ledger.
pub fn absorbed_rates(spec: &SchemeSpec, b: &IterationMatrix) -> Result<Vec<f64>> {
    if b.n() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n + 1, found: b.dim() });
    }
    Ok(row_sums(b).into_iter().map(|s| -s).collect())
}
