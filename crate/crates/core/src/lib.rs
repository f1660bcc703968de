//! Grünwald finite-difference solvers for the space-fractional diffusion
//! equation `∂u/∂t = C D^α u` on `[0, 1]`, `1 < α < 2`.
//!
//! Three fractional derivatives are covered: Riemann-Liouville, Patie-Simon
//! (Caputo fractional flux) and Caputo. Each end of the interval is either
//! absorbing or reflecting. The schemes are mass-transfer matrices: entry
//! `b_ij` of [`operators::IterationMatrix`] is the rate at which mass moves
//! from node `i` to node `j`, so conservation, absorption and positivity can be
//! read directly off the matrix and checked with [`diagnostics`].
//!
//! ```
//! use fracdiff::{build_matrix, run_simulation, BoundaryCondition, DerivativeForm,
//!                InitialCondition, Method, SchemeSpec, SolverConfig};
//!
//! let spec = SchemeSpec::new(
//!     DerivativeForm::RiemannLiouville,
//!     BoundaryCondition::Reflecting,
//!     BoundaryCondition::Reflecting,
//!     1.5, 1.0, 64,
//! ).unwrap();
//! let b = build_matrix(&spec).unwrap();
//! assert!(fracdiff::operators::row_sums(&b).iter().all(|s| s.abs() < 1e-12));
//!
//! let config = SolverConfig::new(spec, 1e-3, 0.1, Method::Implicit,
//!                                vec![0.0, 0.1], InitialCondition::Tent).unwrap();
//! let series = run_simulation(&config).unwrap();
//! assert!((series.mass_trace[1] - series.mass_trace[0]).abs() < 1e-9);
//! ```

pub mod cli_io;
pub mod diagnostics;
pub mod error;
pub mod grunwald;
pub mod operators;
pub mod timestepper;

pub use error::{Error, Result};
pub use grunwald::{grunwald_weights, DerivativeForm, GridFunction, GrunwaldWeights};
pub use operators::{build_matrix, BoundaryCondition, IterationMatrix, SchemeSpec};
pub use timestepper::{run_simulation, run_simulation_from, InitialCondition, Method, SolverConfig, TimeSeries};
