//! Numerical toolkit for variational bifurcation analysis of parameterized
//! potential families on R^n.
//!
//! The crate studies gradient equations grad F(lambda, u) = 0 along the
//! trivial branch u = 0. It locates parameters where the Hessian degenerates,
//! verifies spectral bifurcation criteria (crossing numbers, parity,
//! generalized eigenvalue formulas), performs a parameterized
//! Lyapunov-Schmidt reduction, classifies candidates by the bifurcation
//! trichotomy, and counts Z2 orbits for even families.
//!
//! Modules:
//! - [`model`]: potential families with analytic gradients and Hessians.
//! - [`spectral`]: symmetric and generalized eigenanalysis, Morse data.
//! - [`crossing`]: crossing numbers and parity along Hessian paths.
//! - [`reduction`]: the complement solve and reduced functional.
//! - [`detector`]: sweep, criteria, classification, orbit counts.
//! - [`cli`]: config parsing, report and CSV emission for the binary.

pub mod cli;
pub mod crossing;
pub mod detector;
pub mod error;
pub mod model;
pub mod reduction;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{PotentialFamily, SymmetricOperator};
