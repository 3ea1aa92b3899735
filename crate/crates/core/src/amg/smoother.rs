use crate::sparse::{CsrMatrix, SparseStructure};
use crate::{Error, Result};

/// Damped Jacobi relaxation `u <- u + omega * D^-1 (f - A u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiSmoother {
    inv_diag: Vec<f64>,
    omega: f64,
}

impl JacobiSmoother {
    pub fn new(a: &CsrMatrix, omega: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                op: "jacobi smoother",
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let mut inv_diag = Vec::with_capacity(a.nrows());
        for (row, d) in a.diagonal().into_iter().enumerate() {
            let inv = 1.0 / d;
            if d == 0.0 || !inv.is_finite() {
                return Err(Error::ZeroDiagonal { row, level: None });
            }
            inv_diag.push(inv);
        }
        Ok(JacobiSmoother { inv_diag, omega })
    }

    pub fn inv_diag(&self) -> &[f64] {
        &self.inv_diag
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Applies `sweeps` relaxation steps to `u` in place.
    pub fn smooth(&self, a: &CsrMatrix, f: &[f64], u: &mut [f64], sweeps: usize) -> Result<()> {
        let n = self.inv_diag.len();
        for (op, len) in [("smooth matrix", a.nrows()), ("smooth rhs", f.len()), ("smooth solution", u.len())] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    op,
                    expected: n,
                    found: len,
                });
            }
        }
        let mut scratch = vec![0.0; n];
        self.apply(a, f, u, sweeps, &mut scratch);
        Ok(())
    }

    pub(crate) fn apply(&self, a: &CsrMatrix, f: &[f64], u: &mut [f64], sweeps: usize, scratch: &mut [f64]) {
        for _ in 0..sweeps {
            a.residual_into(f, u, scratch).expect("conforming dimensions");
            for ((ui, ri), di) in u.iter_mut().zip(scratch.iter()).zip(&self.inv_diag) {
                *ui += self.omega * di * ri;
            }
        }
    }
}

/// Builds the damped Jacobi smoother for `a`.
pub fn build_smoother(a: &CsrMatrix, omega: f64) -> Result<JacobiSmoother> {
    JacobiSmoother::new(a, omega)
}
