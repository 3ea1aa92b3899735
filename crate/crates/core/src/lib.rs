//! Aggregation-based algebraic multigrid preconditioned BiCGStab, with
//! strategies for amortizing the AMG setup over a sequence of slowly
//! varying linear systems.
//!
//! The crate is organized bottom-up:
//!
//! * [`sparse`] - CSR storage, mat-vec, transpose and the two-phase sparse
//!   matrix product used to form Galerkin operators.
//! * [`coarsening`] - strength graph, plain aggregation and the
//!   piecewise-constant prolongation.
//! * [`amg`] - hierarchy setup, partial update, damped Jacobi smoothing,
//!   dense coarse solve and the V-cycle.
//! * [`krylov`] - right-preconditioned BiCGStab.
//! * [`reuse`] - the time-stepping driver implementing the no-reuse, full
//!   reuse and partial reuse strategies.
//! * [`io`] - Matrix Market files, sequence directories and the synthetic
//!   moving-blob diffusion generator.

pub mod amg;
pub mod coarsening;
mod error;
pub mod gallery;
pub mod io;
pub mod krylov;
pub mod reuse;
pub mod sparse;

pub use error::{Error, Result};
