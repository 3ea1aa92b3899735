//! Right-preconditioned BiCGStab.

use crate::amg::Hierarchy;
use crate::sparse::{CsrMatrix, SparseStructure};
use crate::{Error, Result};

/// A square linear map `y = Op(x)`.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Writes `Op(x)` into `y`. Both slices have length [`dim`](Self::dim).
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y).expect("conforming dimensions");
    }
}

/// One V-cycle per application.
impl LinearOperator for Hierarchy {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.vcycle_into(x, y);
    }
}

/// The identity map, i.e. no preconditioning.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveParams {
    /// Target for `||f - A u|| / ||f||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// True residual `||f - A u|| / ||f||` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
    /// The recurrence broke down (`rho` or `omega` vanished).
    pub breakdown: bool,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

const BREAKDOWN: f64 = 1e-30;

/// Solves `A u = f` with BiCGStab, right-preconditioned by `m`, starting
/// from `u0`.
///
/// Convergence is always confirmed on the true residual; if the recurrence
/// residual drifted below `tol` while the true one did not, the recurrence is
/// reset to the true residual and iteration continues.
pub fn bicgstab<A, M>(a: &A, m: &M, f: &[f64], u0: &[f64], params: &SolveParams) -> Result<(Vec<f64>, SolveStats)>
where
    A: LinearOperator + ?Sized,
    M: LinearOperator + ?Sized,
{
    params.validate()?;
    let n = a.dim();
    for (op, len) in [("bicgstab preconditioner", m.dim()), ("bicgstab rhs", f.len()), ("bicgstab initial guess", u0.len())] {
        if len != n {
            return Err(Error::DimensionMismatch {
                op,
                expected: n,
                found: len,
            });
        }
    }

    let f_norm = norm(f);
    if f_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
                breakdown: false,
            },
        ));
    }

    let true_residual = |u: &[f64], r: &mut [f64]| -> f64 {
        a.apply(u, r);
        for (ri, fi) in r.iter_mut().zip(f) {
            *ri = fi - *ri;
        }
        norm(r) / f_norm
    };

    let mut u = u0.to_vec();
    let mut r = vec![0.0; n];
    let mut res = true_residual(&u, &mut r);
    if res <= params.tol {
        return Ok((
            u,
            SolveStats {
                iterations: 0,
                relative_residual: res,
                converged: true,
                breakdown: false,
            },
        ));
    }

    let r_hat = r.clone();
    let rho_scale = dot(&r_hat, &r_hat);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rho_prev = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut restart = true;

    for iter in 1..=params.max_iter {
        let rho = dot(&r_hat, &r);
        if rho.abs() < BREAKDOWN * rho_scale {
            return Ok(finish(u, &mut r, iter - 1, true, &true_residual, params));
        }
        if restart {
            p.copy_from_slice(&r);
            restart = false;
        } else {
            let beta = (rho / rho_prev) * (alpha / omega);
            for ((pi, ri), vi) in p.iter_mut().zip(&r).zip(&v) {
                *pi = ri + beta * (*pi - omega * vi);
            }
        }
        rho_prev = rho;

        m.apply(&p, &mut p_hat);
        a.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() < BREAKDOWN * rho_scale {
            return Ok(finish(u, &mut r, iter - 1, true, &true_residual, params));
        }
        alpha = rho / rv;
        for ((si, ri), vi) in s.iter_mut().zip(&r).zip(&v) {
            *si = ri - alpha * vi;
        }

        if norm(&s) / f_norm <= params.tol {
            for (ui, pi) in u.iter_mut().zip(&p_hat) {
                *ui += alpha * pi;
            }
            res = true_residual(&u, &mut r);
            if res <= params.tol {
                return Ok(converged(u, iter, res));
            }
            restart = true;
            continue;
        }

        m.apply(&s, &mut s_hat);
        a.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for ((ui, pi), si) in u.iter_mut().zip(&p_hat).zip(&s_hat) {
            *ui += alpha * pi + omega * si;
        }
        if omega.abs() < BREAKDOWN {
            return Ok(finish(u, &mut r, iter, true, &true_residual, params));
        }
        for ((ri, si), ti) in r.iter_mut().zip(&s).zip(&t) {
            *ri = si - omega * ti;
        }

        if norm(&r) / f_norm <= params.tol {
            res = true_residual(&u, &mut r);
            if res <= params.tol {
                return Ok(converged(u, iter, res));
            }
            restart = true;
        }
    }

    Ok(finish(u, &mut r, params.max_iter, false, &true_residual, params))
}

fn converged(u: Vec<f64>, iterations: usize, res: f64) -> (Vec<f64>, SolveStats) {
    (
        u,
        SolveStats {
            iterations,
            relative_residual: res,
            converged: true,
            breakdown: false,
        },
    )
}

fn finish(
    u: Vec<f64>,
    r: &mut [f64],
    iterations: usize,
    breakdown: bool,
    true_residual: &dyn Fn(&[f64], &mut [f64]) -> f64,
    params: &SolveParams,
) -> (Vec<f64>, SolveStats) {
    let res = true_residual(&u, r);
    (
        u,
        SolveStats {
            iterations,
            relative_residual: res,
            converged: res <= params.tol,
            breakdown,
        },
    )
}
