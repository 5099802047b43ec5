//! Pseudospectral simulator for the 1D time-dependent Hartree-Fock-Bogoliubov
//! system on a periodic grid, with the space-time norms and collapsing-type
//! ratios used to monitor it.
//!
//! A typical run builds a [`potential::PotentialTable`] on a
//! [`grid::SpatialGrid`], assembles initial data with [`initial::quasifree`]
//! and advances it with [`integrator::evolve`]; [`diagnostics`] turns the
//! trajectory into conserved quantities and norms.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod initial;
pub mod integrator;
mod linalg;
pub mod potential;
pub mod snapshot;

pub use error::{Error, Result};
