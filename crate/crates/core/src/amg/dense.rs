use crate::sparse::{CsrMatrix, SparseStructure};
use crate::{Error, Result};

/// Dense LU factorization with partial pivoting, `P A = L U`.
///
/// `L` (unit lower) and `U` share one row-major buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseFactorization {
    n: usize,
    lu: Vec<f64>,
    /// `perm[k]` is the original row placed at position `k`.
    perm: Vec<usize>,
}

impl DenseFactorization {
    pub fn factorize(a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                op: "coarse_factorize",
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let n = a.nrows();
        let mut lu = vec![0.0; n * n];
        for (i, j, v) in a.triplets() {
            lu[i * n + j] += v;
        }
        let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * n.max(1) as f64;
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny || pmax == 0.0 {
                return Err(Error::Singular { column: k });
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= l * lu[k * n + j];
                    }
                }
            }
        }
        Ok(DenseFactorization { n, lu, perm })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch {
                op: "coarse_solve",
                expected: self.n,
                found: f.len(),
            });
        }
        let mut x = vec![0.0; self.n];
        self.solve_into(f, &mut x);
        Ok(x)
    }

    pub(crate) fn solve_into(&self, f: &[f64], x: &mut [f64]) {
        let n = self.n;
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = f[self.perm[k]];
        }
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
    }

    /// Rebuilds `A` (row-major) from the factors.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut a = vec![vec![0.0; n]; n];
        for k in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for m in 0..=k.min(j) {
                    let l = if m == k { 1.0 } else { self.lu[k * n + m] };
                    s += l * self.lu[m * n + j];
                }
                a[self.perm[k]][j] = s;
            }
        }
        a
    }
}

/// Factorizes the coarsest-level matrix.
pub fn coarse_factorize(a: &CsrMatrix) -> Result<DenseFactorization> {
    DenseFactorization::factorize(a)
}

/// Solves with a coarsest-level factorization.
pub fn coarse_solve(fac: &DenseFactorization, f: &[f64]) -> Result<Vec<f64>> {
    fac.solve(f)
}
