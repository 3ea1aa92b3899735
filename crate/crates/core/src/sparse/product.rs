//! Two-phase sparse matrix-matrix product.
//!
//! The symbolic phase computes the structural pattern of `A * B`; the numeric
//! phase fills values into a given pattern using a dense per-row
//! accumulator. Splitting the two lets a caller keep a pattern around and
//! skip the symbolic pass when only values change.

use super::csr::{CsrMatrix, Pattern, SparseStructure};
use crate::{Error, Result};

const UNMARKED: usize = usize::MAX;

/// Structural pattern of `A * B` (no numeric cancellation is considered).
pub fn spmm_symbolic<A, B>(a: &A, b: &B) -> Result<Pattern>
where
    A: SparseStructure + ?Sized,
    B: SparseStructure + ?Sized,
{
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch {
            op: "spmm",
            expected: a.ncols(),
            found: b.nrows(),
        });
    }
    let nrows = a.nrows();
    let ncols = b.ncols();
    let mut marker = vec![UNMARKED; ncols];
    let mut row_ptr = Vec::with_capacity(nrows + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for i in 0..nrows {
        let start = col_idx.len();
        for &k in a.row_cols(i) {
            for &j in b.row_cols(k) {
                if marker[j] != i {
                    marker[j] = i;
                    col_idx.push(j);
                }
            }
        }
        col_idx[start..].sort_unstable();
        row_ptr.push(col_idx.len());
    }
    Ok(Pattern::new_unchecked(nrows, ncols, row_ptr, col_idx))
}

/// Values of `A * B` laid out on `pattern`.
///
/// `pattern` must contain every structurally nonzero entry of the product;
/// extra entries come out as exact zeros.
pub fn spmm_numeric(a: &CsrMatrix, b: &CsrMatrix, pattern: &Pattern) -> Result<CsrMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch {
            op: "spmm",
            expected: a.ncols(),
            found: b.nrows(),
        });
    }
    if pattern.nrows() != a.nrows() || pattern.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            op: "spmm pattern",
            expected: a.nrows() * b.ncols(),
            found: pattern.nrows() * pattern.ncols(),
        });
    }
    let ncols = b.ncols();
    let mut acc = vec![0.0f64; ncols];
    let mut marker = vec![UNMARKED; ncols];
    let mut values = vec![0.0f64; pattern.nnz()];
    let a_rp = a.row_ptr();
    let a_ci = a.col_idx();
    let a_v = a.values();
    let b_rp = b.row_ptr();
    let b_ci = b.col_idx();
    let b_v = b.values();
    let p_rp = pattern.row_ptr();
    let p_ci = pattern.col_idx();

    for i in 0..a.nrows() {
        for &j in &p_ci[p_rp[i]..p_rp[i + 1]] {
            marker[j] = i;
        }
        for ka in a_rp[i]..a_rp[i + 1] {
            let k = a_ci[ka];
            let aik = a_v[ka];
            for kb in b_rp[k]..b_rp[k + 1] {
                let j = b_ci[kb];
                if marker[j] != i {
                    return Err(Error::MissingPatternEntry { row: i, col: j });
                }
                acc[j] += aik * b_v[kb];
            }
        }
        for p in p_rp[i]..p_rp[i + 1] {
            let j = p_ci[p];
            values[p] = acc[j];
            acc[j] = 0.0;
        }
    }
    Ok(CsrMatrix::from_parts_unchecked(pattern.clone(), values))
}

/// `A * B` via the symbolic and numeric phases.
pub fn spmm(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix> {
    let pattern = spmm_symbolic(a, b)?;
    spmm_numeric(a, b, &pattern)
}

/// Galerkin coarse operator `R * A * P`.
pub fn galerkin_product(r: &CsrMatrix, a: &CsrMatrix, p: &CsrMatrix) -> Result<CsrMatrix> {
    if r.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch {
            op: "galerkin R*A",
            expected: r.ncols(),
            found: a.nrows(),
        });
    }
    if a.ncols() != p.nrows() {
        return Err(Error::DimensionMismatch {
            op: "galerkin A*P",
            expected: a.ncols(),
            found: p.nrows(),
        });
    }
    let ap = spmm(a, p)?;
    spmm(r, &ap)
}
