//! Aggregation AMG preconditioner.
//!
//! [`Hierarchy::setup`] runs the full construction; [`Hierarchy::partial_update`]
//! keeps the transfer operators of an existing hierarchy and recomputes
//! everything that depends on matrix values. A hierarchy is applied as a
//! preconditioner through [`Hierarchy::vcycle`].

mod dense;
mod hierarchy;
mod smoother;

use std::ops::AddAssign;
use std::time::Duration;

pub use dense::{coarse_factorize, coarse_solve, DenseFactorization};
pub use hierarchy::{Hierarchy, Level};
pub use smoother::{build_smoother, JacobiSmoother};

use crate::coarsening::DEFAULT_EPS_STRONG;
use crate::{Error, Result};

/// Setup and cycle parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmgParams {
    /// Strength-of-connection threshold.
    pub eps_strong: f64,
    /// Jacobi damping factor.
    pub omega: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    /// Stop coarsening once a level has at most this many unknowns.
    pub coarse_enough: usize,
    /// Largest matrix the dense coarse solver accepts.
    pub max_direct_size: usize,
}

impl Default for AmgParams {
    fn default() -> Self {
        AmgParams {
            eps_strong: DEFAULT_EPS_STRONG,
            omega: 0.72,
            pre_sweeps: 1,
            post_sweeps: 1,
            coarse_enough: 100,
            max_direct_size: 2000,
        }
    }
}

impl AmgParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eps_strong) {
            return Err(Error::InvalidParameter(format!(
                "eps_strong must lie in [0, 1), got {}",
                self.eps_strong
            )));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.coarse_enough == 0 {
            return Err(Error::InvalidParameter("coarse_enough must be at least 1".into()));
        }
        if self.max_direct_size < self.coarse_enough {
            return Err(Error::InvalidParameter(format!(
                "max_direct_size ({}) must not be below coarse_enough ({})",
                self.max_direct_size, self.coarse_enough
            )));
        }
        Ok(())
    }
}

/// Wall time spent in each setup phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SetupPhaseTimings {
    /// Strength graph, aggregation, `P` and `R = P^T`.
    pub transfer_ops: Duration,
    /// Galerkin products `R A P`.
    pub galerkin: Duration,
    pub smoother: Duration,
    /// Dense factorization of the coarsest matrix.
    pub coarse_solver: Duration,
    /// Wall time of the whole setup call, including untimed bookkeeping.
    pub total: Duration,
}

impl SetupPhaseTimings {
    /// Sum of the four instrumented phases.
    pub fn phase_sum(&self) -> Duration {
        self.transfer_ops + self.galerkin + self.smoother + self.coarse_solver
    }
}

impl AddAssign for SetupPhaseTimings {
    fn add_assign(&mut self, rhs: Self) {
        self.transfer_ops += rhs.transfer_ops;
        self.galerkin += rhs.galerkin;
        self.smoother += rhs.smoother;
        self.coarse_solver += rhs.coarse_solver;
        self.total += rhs.total;
    }
}
