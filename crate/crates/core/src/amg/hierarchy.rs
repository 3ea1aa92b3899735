use std::sync::Arc;
use std::time::Instant;

use super::dense::DenseFactorization;
use super::smoother::JacobiSmoother;
use super::{AmgParams, SetupPhaseTimings};
use crate::coarsening::{aggregate, strength_graph, tentative_prolongation};
use crate::sparse::{galerkin_product, CsrMatrix, SparseStructure};
use crate::{Error, Result};

/// One level of the hierarchy. Every level but the coarsest carries the
/// transfer operators to the next level and a smoother.
#[derive(Debug, Clone)]
pub struct Level {
    a: Arc<CsrMatrix>,
    p: Option<Arc<CsrMatrix>>,
    r: Option<Arc<CsrMatrix>>,
    smoother: Option<JacobiSmoother>,
}

impl Level {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn matrix_arc(&self) -> &Arc<CsrMatrix> {
        &self.a
    }

    pub fn prolongation(&self) -> Option<&Arc<CsrMatrix>> {
        self.p.as_ref()
    }

    pub fn restriction(&self) -> Option<&Arc<CsrMatrix>> {
        self.r.as_ref()
    }

    pub fn smoother(&self) -> Option<&JacobiSmoother> {
        self.smoother.as_ref()
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    /// Same matrices and smoother, by value.
    fn same_numerics(&self, other: &Level) -> bool {
        self.a == other.a && self.p == other.p && self.r == other.r && self.smoother == other.smoother
    }
}

/// Multilevel hierarchy, finest level first.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<Level>,
    coarse_solver: DenseFactorization,
    params: AmgParams,
    timings: SetupPhaseTimings,
}

impl Hierarchy {
    /// Full setup from the fine matrix.
    pub fn setup(a: impl Into<Arc<CsrMatrix>>, params: &AmgParams) -> Result<Hierarchy> {
        let start = Instant::now();
        params.validate()?;
        let a: Arc<CsrMatrix> = a.into();
        check_square(&a)?;

        let mut timings = SetupPhaseTimings::default();
        let mut levels = Vec::new();
        let mut current = a;
        while current.nrows() > params.coarse_enough {
            let index = levels.len();

            let t = Instant::now();
            let graph = strength_graph(&current, params.eps_strong).map_err(|e| e.at_level(index))?;
            let aggregates = aggregate(&graph);
            if aggregates.n_coarse() >= current.nrows() {
                timings.transfer_ops += t.elapsed();
                if current.nrows() > params.max_direct_size {
                    return Err(Error::CoarseningStalled {
                        level: index,
                        size: current.nrows(),
                        limit: params.max_direct_size,
                    });
                }
                break;
            }
            let p = tentative_prolongation(&aggregates);
            let r = p.transpose();
            timings.transfer_ops += t.elapsed();

            let t = Instant::now();
            let smoother = JacobiSmoother::new(&current, params.omega).map_err(|e| e.at_level(index))?;
            timings.smoother += t.elapsed();

            let t = Instant::now();
            let coarse = galerkin_product(&r, &current, &p)?;
            timings.galerkin += t.elapsed();

            levels.push(Level {
                a: current,
                p: Some(Arc::new(p)),
                r: Some(Arc::new(r)),
                smoother: Some(smoother),
            });
            current = Arc::new(coarse);
        }

        let t = Instant::now();
        let coarse_solver = DenseFactorization::factorize(&current)?;
        timings.coarse_solver += t.elapsed();
        levels.push(Level {
            a: current,
            p: None,
            r: None,
            smoother: None,
        });

        timings.total = start.elapsed();
        Ok(Hierarchy {
            levels,
            coarse_solver,
            params: *params,
            timings,
        })
    }

    /// Rebuilds the hierarchy for a new fine matrix while keeping every
    /// transfer operator. Level matrices, smoothers and the coarse
    /// factorization are recomputed; `P` and `R` are shared with `self`.
    pub fn partial_update(&self, a_new: impl Into<Arc<CsrMatrix>>, params: &AmgParams) -> Result<Hierarchy> {
        let start = Instant::now();
        params.validate()?;
        let a_new: Arc<CsrMatrix> = a_new.into();
        let n = self.size();
        if a_new.nrows() != n || a_new.ncols() != n {
            return Err(Error::PartialUpdateImpossible {
                expected: n,
                found: if a_new.nrows() != n { a_new.nrows() } else { a_new.ncols() },
            });
        }

        let mut timings = SetupPhaseTimings::default();
        let mut levels = Vec::with_capacity(self.levels.len());
        let mut current = a_new;
        for (index, old) in self.levels[..self.levels.len() - 1].iter().enumerate() {
            let p = old.p.clone().expect("non-coarsest level has P");
            let r = old.r.clone().expect("non-coarsest level has R");

            let t = Instant::now();
            let smoother = JacobiSmoother::new(&current, params.omega).map_err(|e| e.at_level(index))?;
            timings.smoother += t.elapsed();

            let t = Instant::now();
            let coarse = galerkin_product(&r, &current, &p)?;
            timings.galerkin += t.elapsed();

            levels.push(Level {
                a: current,
                p: Some(p),
                r: Some(r),
                smoother: Some(smoother),
            });
            current = Arc::new(coarse);
        }

        let t = Instant::now();
        let coarse_solver = DenseFactorization::factorize(&current)?;
        timings.coarse_solver += t.elapsed();
        levels.push(Level {
            a: current,
            p: None,
            r: None,
            smoother: None,
        });

        timings.total = start.elapsed();
        Ok(Hierarchy {
            levels,
            coarse_solver,
            params: *params,
            timings,
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Number of fine-level unknowns.
    pub fn size(&self) -> usize {
        self.levels[0].size()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Level::size).collect()
    }

    pub fn coarse_solver(&self) -> &DenseFactorization {
        &self.coarse_solver
    }

    pub fn params(&self) -> &AmgParams {
        &self.params
    }

    pub fn timings(&self) -> &SetupPhaseTimings {
        &self.timings
    }

    /// `sum(nnz(A_i)) / nnz(A_0)`.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum();
        total as f64 / self.levels[0].a.nnz() as f64
    }

    /// True when every matrix, transfer operator, smoother and the coarse
    /// factorization match `other` exactly. Timings are ignored.
    pub fn numerically_identical(&self, other: &Hierarchy) -> bool {
        self.levels.len() == other.levels.len()
            && self.levels.iter().zip(&other.levels).all(|(x, y)| x.same_numerics(y))
            && self.coarse_solver == other.coarse_solver
    }

    /// One V-cycle with a zero initial guess on every level: an
    /// approximation of `A^-1 f` that is linear in `f`.
    pub fn vcycle(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.size() {
            return Err(Error::DimensionMismatch {
                op: "vcycle",
                expected: self.size(),
                found: f.len(),
            });
        }
        let mut u = vec![0.0; f.len()];
        self.vcycle_into(f, &mut u);
        Ok(u)
    }

    pub(crate) fn vcycle_into(&self, f: &[f64], out: &mut [f64]) {
        let nlev = self.levels.len();
        let mut rhs: Vec<Vec<f64>> = Vec::with_capacity(nlev);
        let mut sol: Vec<Vec<f64>> = Vec::with_capacity(nlev);
        let mut scratch: Vec<Vec<f64>> = Vec::with_capacity(nlev);
        rhs.push(f.to_vec());
        for level in &self.levels[..nlev - 1] {
            let n = level.size();
            sol.push(vec![0.0; n]);
            scratch.push(vec![0.0; n]);
            rhs.push(vec![0.0; level.p.as_ref().expect("P").ncols()]);
        }
        sol.push(vec![0.0; self.levels[nlev - 1].size()]);

        for (i, level) in self.levels[..nlev - 1].iter().enumerate() {
            let smoother = level.smoother.as_ref().expect("smoother");
            let (upper, lower) = rhs.split_at_mut(i + 1);
            let f_i = &upper[i];
            smoother.apply(&level.a, f_i, &mut sol[i], self.params.pre_sweeps, &mut scratch[i]);
            level
                .a
                .residual_into(f_i, &sol[i], &mut scratch[i])
                .expect("conforming dimensions");
            let r = level.r.as_ref().expect("R");
            r.spmv_into(&scratch[i], &mut lower[0]).expect("conforming dimensions");
        }

        self.coarse_solver.solve_into(&rhs[nlev - 1], &mut sol[nlev - 1]);

        for i in (0..nlev - 1).rev() {
            let level = &self.levels[i];
            let p = level.p.as_ref().expect("P");
            let (upper, lower) = sol.split_at_mut(i + 1);
            p.spmv_into(&lower[0], &mut scratch[i]).expect("conforming dimensions");
            for (u, c) in upper[i].iter_mut().zip(&scratch[i]) {
                *u += c;
            }
            let smoother = level.smoother.as_ref().expect("smoother");
            smoother.apply(&level.a, &rhs[i], &mut upper[i], self.params.post_sweeps, &mut scratch[i]);
        }

        out.copy_from_slice(&sol[0]);
    }
}

fn check_square(a: &CsrMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            op: "amg setup (square matrix)",
            expected: a.nrows(),
            found: a.ncols(),
        })
    }
}
