//! Small model problems used by tests, examples and the benchmark.

use crate::sparse::CsrMatrix;

/// `tridiag(-1, 2, -1)` of size `n`.
pub fn poisson_1d(n: usize) -> CsrMatrix {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        t.push((i, i, 2.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
        }
    }
    CsrMatrix::from_triplets(n, n, &t).expect("indices in range")
}

/// Five-point Laplacian on an `m x m` interior grid (diagonal 4, unscaled),
/// lexicographic ordering with `x` fastest.
pub fn poisson_2d(m: usize) -> CsrMatrix {
    let n = m * m;
    let mut t = Vec::with_capacity(5 * n);
    for y in 0..m {
        for x in 0..m {
            let i = y * m + x;
            if y > 0 {
                t.push((i, i - m, -1.0));
            }
            if x > 0 {
                t.push((i, i - 1, -1.0));
            }
            t.push((i, i, 4.0));
            if x + 1 < m {
                t.push((i, i + 1, -1.0));
            }
            if y + 1 < m {
                t.push((i, i + m, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t).expect("indices in range")
}
