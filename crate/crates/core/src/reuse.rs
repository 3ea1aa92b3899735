//! Time-stepping driver with AMG setup reuse.
//!
//! Three strategies are supported:
//!
//! * [`StrategyKind::None`]: the hierarchy is rebuilt from scratch on every
//!   step. This is the baseline.
//! * [`StrategyKind::Full`]: the hierarchy built on the first step is reused
//!   unchanged. When a solve fails to converge (or needs at least
//!   `reuse_iter_limit` iterations) the hierarchy is rebuilt at the start of
//!   the next step.
//! * [`StrategyKind::Partial`]: the transfer operators of the first hierarchy
//!   are kept, and every later step recomputes level matrices, smoothers and
//!   the coarse factorization from the new matrix. A full rebuild happens
//!   when the matrix size changes or, optionally, every `rebuild_every` steps.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::amg::{AmgParams, Hierarchy, SetupPhaseTimings};
use crate::krylov::{bicgstab, SolveParams};
use crate::sparse::{CsrMatrix, SparseStructure};
use crate::{Error, Result};

/// One system `A_k u_k = f_k` of a sequence.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: Arc<CsrMatrix>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    None,
    Full,
    Partial,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::None, StrategyKind::Full, StrategyKind::Partial];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::Full => "full",
            StrategyKind::Partial => "partial",
        }
    }

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::None => "No reuse",
            StrategyKind::Full => "Full reuse",
            StrategyKind::Partial => "Partial reuse",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(StrategyKind::None),
            "full" => Ok(StrategyKind::Full),
            "partial" => Ok(StrategyKind::Partial),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy '{other}' (expected none, full or partial)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Full reuse: rebuild after a solve that needed at least this many
    /// iterations.
    pub reuse_iter_limit: usize,
    /// Partial reuse: full rebuild on every step divisible by this period.
    pub rebuild_every: Option<usize>,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, solve: &SolveParams) -> Self {
        StrategyConfig {
            kind,
            reuse_iter_limit: solve.max_iter,
            rebuild_every: None,
        }
    }

    pub fn validate(&self, solve: &SolveParams) -> Result<()> {
        if self.reuse_iter_limit > solve.max_iter {
            return Err(Error::InvalidParameter(format!(
                "reuse_iter_limit ({}) exceeds max_iter ({})",
                self.reuse_iter_limit, solve.max_iter
            )));
        }
        if self.rebuild_every == Some(0) {
            return Err(Error::InvalidParameter("rebuild_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Where each step's iteration starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    /// Solution of the previous step (zero on the first step or after a
    /// size change).
    #[default]
    Previous,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAction {
    FullBuild,
    PartialUpdate,
    ReusedUnchanged,
}

impl StepAction {
    pub fn name(self) -> &'static str {
        match self {
            StepAction::FullBuild => "full_build",
            StepAction::PartialUpdate => "partial_update",
            StepAction::ReusedUnchanged => "reused_unchanged",
        }
    }
}

impl fmt::Display for StepAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub step: usize,
    pub action: StepAction,
    pub setup_time: Duration,
    pub solve_time: Duration,
    /// Zero when the hierarchy was reused unchanged.
    pub phase_timings: SetupPhaseTimings,
    pub iterations: usize,
    pub converged: bool,
    pub breakdown: bool,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub strategy: StrategyConfig,
    pub steps: Vec<StepMetrics>,
    pub total_setup: Duration,
    pub total_solve: Duration,
    pub full_rebuilds: usize,
    pub avg_iterations: f64,
}

impl RunReport {
    /// Aggregates per-step metrics.
    pub fn from_steps(strategy: StrategyConfig, steps: Vec<StepMetrics>) -> Self {
        let total_setup = steps.iter().map(|s| s.setup_time).sum();
        let total_solve = steps.iter().map(|s| s.solve_time).sum();
        let full_rebuilds = steps.iter().filter(|s| s.action == StepAction::FullBuild).count();
        let avg_iterations = if steps.is_empty() {
            0.0
        } else {
            steps.iter().map(|s| s.iterations as f64).sum::<f64>() / steps.len() as f64
        };
        RunReport {
            strategy,
            steps,
            total_setup,
            total_solve,
            full_rebuilds,
            avg_iterations,
        }
    }

    pub fn total_time(&self) -> Duration {
        self.total_setup + self.total_solve
    }

    /// Setup phase timings summed over all steps.
    pub fn phase_totals(&self) -> SetupPhaseTimings {
        let mut t = SetupPhaseTimings::default();
        for s in &self.steps {
            t += s.phase_timings;
        }
        t
    }

    pub fn iterations(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.iterations).collect()
    }
}

/// Runs one strategy over a sequence of systems, starting each step from
/// the previous solution. Returns the solution of every step.
pub fn run_sequence<I, S>(
    systems: I,
    strategy: &StrategyConfig,
    amg: &AmgParams,
    solve: &SolveParams,
) -> Result<(Vec<Vec<f64>>, RunReport)>
where
    I: IntoIterator<Item = S>,
    S: Borrow<LinearSystem>,
{
    run_sequence_with(systems, strategy, amg, solve, InitialGuess::Previous)
}

/// [`run_sequence`] with an explicit initial-guess policy.
pub fn run_sequence_with<I, S>(
    systems: I,
    strategy: &StrategyConfig,
    amg: &AmgParams,
    solve: &SolveParams,
    guess: InitialGuess,
) -> Result<(Vec<Vec<f64>>, RunReport)>
where
    I: IntoIterator<Item = S>,
    S: Borrow<LinearSystem>,
{
    amg.validate()?;
    solve.validate()?;
    strategy.validate(solve)?;

    let mut hierarchy: Option<Hierarchy> = None;
    let mut rebuild_flag = false;
    let mut solutions: Vec<Vec<f64>> = Vec::new();
    let mut steps = Vec::new();

    for (k, system) in systems.into_iter().enumerate() {
        let system = system.borrow();
        let a = &system.matrix;
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                op: "run_sequence (square matrix)",
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        if system.rhs.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                op: "run_sequence rhs",
                expected: a.nrows(),
                found: system.rhs.len(),
            });
        }

        let same_size = hierarchy.as_ref().is_some_and(|h| h.size() == a.nrows());
        let start = Instant::now();
        let (next, action) = match (strategy.kind, hierarchy.take()) {
            (StrategyKind::Full, Some(h)) if same_size && !rebuild_flag => (h, StepAction::ReusedUnchanged),
            (StrategyKind::Partial, Some(h)) if !strategy.rebuild_every.is_some_and(|m| k % m == 0) => {
                match h.partial_update(Arc::clone(a), amg) {
                    Ok(updated) => (updated, StepAction::PartialUpdate),
                    Err(Error::PartialUpdateImpossible { .. }) => {
                        (Hierarchy::setup(Arc::clone(a), amg)?, StepAction::FullBuild)
                    }
                    Err(e) => return Err(e),
                }
            }
            _ => (Hierarchy::setup(Arc::clone(a), amg)?, StepAction::FullBuild),
        };
        let setup_time = if action == StepAction::ReusedUnchanged {
            Duration::ZERO
        } else {
            start.elapsed()
        };
        let phase_timings = if action == StepAction::ReusedUnchanged {
            SetupPhaseTimings::default()
        } else {
            *next.timings()
        };

        let u0 = match (guess, solutions.last()) {
            (InitialGuess::Previous, Some(prev)) if prev.len() == a.nrows() => prev.clone(),
            _ => vec![0.0; a.nrows()],
        };
        let start = Instant::now();
        let (u, stats) = bicgstab(a.as_ref(), &next, &system.rhs, &u0, solve)?;
        let solve_time = start.elapsed();

        rebuild_flag = !stats.converged || stats.iterations >= strategy.reuse_iter_limit;
        steps.push(StepMetrics {
            step: k,
            action,
            setup_time,
            solve_time,
            phase_timings,
            iterations: stats.iterations,
            converged: stats.converged,
            breakdown: stats.breakdown,
            relative_residual: stats.relative_residual,
        });
        solutions.push(u);
        hierarchy = Some(next);
    }

    if steps.is_empty() {
        return Err(Error::Sequence("empty sequence".into()));
    }
    Ok((solutions, RunReport::from_steps(*strategy, steps)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedupKind {
    /// Setup plus solve time.
    Total,
    Setup,
}

/// `(t_base / t_other - 1) * 100`; infinite when `t_other` is zero.
pub fn speedup_percent(t_base: f64, t_other: f64) -> f64 {
    if t_other == 0.0 {
        f64::INFINITY
    } else {
        (t_base / t_other - 1.0) * 100.0
    }
}

/// Speedup of `other` relative to the baseline run, in percent.
pub fn speedup(base: &RunReport, other: &RunReport, which: SpeedupKind) -> Result<f64> {
    if base.steps.len() != other.steps.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot compare runs with {} and {} steps",
            base.steps.len(),
            other.steps.len()
        )));
    }
    let pick = |r: &RunReport| match which {
        SpeedupKind::Total => r.total_time().as_secs_f64(),
        SpeedupKind::Setup => r.total_setup.as_secs_f64(),
    };
    Ok(speedup_percent(pick(base), pick(other)))
}
