use crate::{Error, Result};

/// Read access to the row-compressed structure shared by [`CsrMatrix`] and
/// [`Pattern`].
pub trait SparseStructure {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn row_ptr(&self) -> &[usize];
    fn col_idx(&self) -> &[usize];

    fn nnz(&self) -> usize {
        self.col_idx().len()
    }

    /// Column indices stored in row `i`.
    fn row_cols(&self, i: usize) -> &[usize] {
        let rp = self.row_ptr();
        &self.col_idx()[rp[i]..rp[i + 1]]
    }
}

fn check_structure(nrows: usize, ncols: usize, row_ptr: &[usize], col_idx: &[usize]) -> Result<()> {
    if row_ptr.len() != nrows + 1 {
        return Err(Error::InvalidStructure(format!(
            "row_ptr has length {}, expected {}",
            row_ptr.len(),
            nrows + 1
        )));
    }
    if row_ptr[0] != 0 || row_ptr[nrows] != col_idx.len() {
        return Err(Error::InvalidStructure(
            "row_ptr must start at 0 and end at nnz".into(),
        ));
    }
    for i in 0..nrows {
        if row_ptr[i] > row_ptr[i + 1] {
            return Err(Error::InvalidStructure(format!("row_ptr decreases at row {i}")));
        }
        let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
        for w in cols.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidStructure(format!(
                    "columns of row {i} are not strictly increasing"
                )));
            }
        }
        if let Some(&c) = cols.last() {
            if c >= ncols {
                return Err(Error::InvalidStructure(format!(
                    "column {c} in row {i} is out of range ({ncols} columns)"
                )));
            }
        }
    }
    Ok(())
}

/// Sparsity pattern of a CSR matrix without values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl Pattern {
    pub fn new(nrows: usize, ncols: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Result<Self> {
        check_structure(nrows, ncols, &row_ptr, &col_idx)?;
        Ok(Self::new_unchecked(nrows, ncols, row_ptr, col_idx))
    }

    pub(crate) fn new_unchecked(nrows: usize, ncols: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        debug_assert!(check_structure(nrows, ncols, &row_ptr, &col_idx).is_ok());
        Pattern {
            nrows,
            ncols,
            row_ptr,
            col_idx,
        }
    }

    /// Does the pattern store entry `(i, j)`?
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.nrows && self.row_cols(i).binary_search(&j).is_ok()
    }
}

impl SparseStructure for Pattern {
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.ncols
    }
    fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
    fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
}

/// Compressed sparse row matrix of `f64` values.
///
/// Columns within a row are strictly increasing. Explicit zeros are allowed
/// and are never dropped by any kernel in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating every invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_structure(nrows, ncols, &row_ptr, &col_idx)?;
        if values.len() != col_idx.len() {
            return Err(Error::InvalidStructure(format!(
                "{} values for {} stored entries",
                values.len(),
                col_idx.len()
            )));
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(pattern: Pattern, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), pattern.col_idx.len());
        CsrMatrix {
            nrows: pattern.nrows,
            ncols: pattern.ncols,
            row_ptr: pattern.row_ptr,
            col_idx: pattern.col_idx,
            values,
        }
    }

    /// Assembles a matrix from `(row, col, value)` triplets in any order.
    /// Duplicate coordinates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        for (index, &(row, col, _)) in entries.iter().enumerate() {
            if row >= nrows || col >= ncols {
                return Err(Error::EntryOutOfRange {
                    index,
                    row,
                    col,
                    nrows,
                    ncols,
                });
            }
        }

        // Bucket by row (stable, so duplicates are summed in input order).
        let mut counts = vec![0usize; nrows + 1];
        for &(row, _, _) in entries {
            counts[row + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut bucket = vec![(0usize, 0.0f64); entries.len()];
        for &(row, col, val) in entries {
            bucket[next[row]] = (col, val);
            next[row] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        for i in 0..nrows {
            let row = &mut bucket[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Converts a row-major dense matrix, storing only the nonzero entries.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged dense matrix");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        dense
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored entries of row `i` as `(col, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Stored value at `(i, j)`, or `None` when the entry is not stored.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let lo = self.row_ptr[i];
        self.row_cols(i)
            .binary_search(&j)
            .ok()
            .map(|k| self.values[lo + k])
    }

    /// The structure of this matrix without its values.
    pub fn pattern(&self) -> Pattern {
        Pattern::new_unchecked(self.nrows, self.ncols, self.row_ptr.clone(), self.col_idx.clone())
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Diagonal entries; missing diagonal entries read as zero.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i).unwrap_or(0.0))
            .collect()
    }

    /// Returns a copy with every value multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x` into a caller-provided buffer.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                op: "spmv",
                expected: self.ncols,
                found: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                op: "spmv output",
                expected: self.nrows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let mut sum = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                sum += self.values[k] * x[self.col_idx[k]];
            }
            *yi = sum;
        }
        Ok(())
    }

    /// `r = f - A u` into a caller-provided buffer.
    pub fn residual_into(&self, f: &[f64], u: &[f64], r: &mut [f64]) -> Result<()> {
        if f.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                op: "residual",
                expected: self.nrows,
                found: f.len(),
            });
        }
        self.spmv_into(u, r)?;
        for (ri, fi) in r.iter_mut().zip(f) {
            *ri = fi - *ri;
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let nnz = self.nnz();
        let mut row_ptr = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for j in 0..self.ncols {
            row_ptr[j + 1] += row_ptr[j];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        // Scanning source rows in ascending order keeps target rows sorted.
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.col_idx[k];
                let dst = next[c];
                col_idx[dst] = i;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SparseStructure for CsrMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }
    fn ncols(&self) -> usize {
        self.ncols
    }
    fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
    fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn triplets_identity() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a, CsrMatrix::identity(2));
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), Some(3.0));
    }

    #[test]
    fn triplets_unsorted_input() {
        let a = CsrMatrix::from_triplets(2, 3, &[(1, 2, 4.0), (0, 1, 1.0), (1, 0, 3.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.to_dense(), vec![vec![2.0, 1.0, 0.0], vec![3.0, 0.0, 4.0]]);
    }

    #[test]
    fn triplets_out_of_range() {
        let err = CsrMatrix::from_triplets(2, 2, &[(0, 2, 1.0)]).unwrap_err();
        match err {
            Error::EntryOutOfRange { index, row, col, .. } => assert_eq!((index, row, col), (0, 0, 2)),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn new_rejects_unsorted_rows() {
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(CsrMatrix::new(1, 3, vec![0, 1], vec![2], vec![]).is_err());
    }

    #[test]
    fn spmv_identity() {
        let y = CsrMatrix::identity(3).spmv(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn spmv_tridiag() {
        assert_eq!(tridiag(3).spmv(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn spmv_zero_row() {
        let a = CsrMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (2, 1, 2.0)]).unwrap();
        let y = a.spmv(&[5.0, 7.0]).unwrap();
        assert_eq!(y[1], 0.0);
        assert_eq!(y, vec![5.0, 0.0, 14.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        assert!(matches!(
            tridiag(3).spmv(&[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transpose_identity_and_single_entry() {
        assert_eq!(CsrMatrix::identity(5).transpose(), CsrMatrix::identity(5));
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 2, 5.0)]).unwrap();
        let t = a.transpose();
        assert_eq!((t.nrows(), t.ncols()), (3, 2));
        assert_eq!(t.triplets().collect::<Vec<_>>(), vec![(2, 0, 5.0)]);
    }

    #[test]
    fn explicit_zeros_are_kept() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), Some(0.0));
        assert_eq!(a.transpose().get(1, 0), Some(0.0));
    }
}
