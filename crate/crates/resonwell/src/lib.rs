//! Scattering resonances of the one-dimensional Schrodinger operator
//! `A = d^2/dx^2 + a * chi_[-l,l]` with an invertible complex `d x d`
//! coupling matrix `a`.
//!
//! Resonances are the zeros of the Jost determinant; this crate computes
//! them, classifies them (real-axis census, quadrant census, asymptotic
//! log-curve behaviour), assigns multiplicities, and cross-checks the
//! determinant against a Birman-Schwinger discretisation.

pub mod bschwinger;
pub mod classify;
pub mod cli;
pub mod contour;
pub mod error;
pub mod jost;
pub mod matfun;
pub mod multiplicity;
pub mod quad;
pub mod scalar_res;

pub use error::{Error, Result};
pub use matfun::{C64, CMatrix, CVector, EigenvalueData, SquareWell};
