//! Spectra of Schrödinger operators `-Δ + q` on compact metric graphs with
//! δ′, anti-Kirchhoff, δ, Kirchhoff and Dirichlet vertex conditions.
//!
//! The [`secular`] solver locates eigenvalues as singular points of the
//! vertex-condition system and certifies completeness against the
//! finite-element [`fem`] oracle. [`eigenfunction`] reconstructs normalized
//! eigenfunctions and [`stats`] turns spectra into Cesàro means, local Weyl
//! statistics and heat-kernel sums.

pub mod conditions;
pub mod eigenfunction;
pub mod error;
pub mod fem;
pub mod graph;
pub mod potential;
pub mod propagator;
pub mod quadrature;
pub mod secular;
pub mod stats;

pub use error::{Error, Result};
