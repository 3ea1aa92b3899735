//! Plain (non-smoothed) aggregation coarsening.
//!
//! Unknowns are grouped into disjoint aggregates over the graph of strong
//! couplings, and the prolongation is the binary piecewise-constant
//! operator `P[i, agg(i)] = 1`. Because `P` only depends on which couplings
//! are strong, it tends to survive small changes of the matrix values.

use crate::sparse::{CsrMatrix, SparseStructure};
use crate::{Error, Result};

/// Default strength threshold.
pub const DEFAULT_EPS_STRONG: f64 = 0.08;

/// Symmetric graph of strong off-diagonal couplings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrengthGraph {
    row_ptr: Vec<usize>,
    adjacency: Vec<usize>,
}

impl StrengthGraph {
    /// Builds a graph from per-node neighbor lists. Lists are sorted and
    /// deduplicated; self-edges and out-of-range indices are rejected.
    /// The lists are taken as given and are not symmetrized.
    pub fn from_adjacency(lists: &[Vec<usize>]) -> Result<Self> {
        let n = lists.len();
        let mut row_ptr = vec![0];
        let mut adjacency = Vec::new();
        for (i, list) in lists.iter().enumerate() {
            let start = adjacency.len();
            for &j in list {
                if j >= n || j == i {
                    return Err(Error::InvalidParameter(format!(
                        "invalid strength graph edge ({i}, {j}) for {n} nodes"
                    )));
                }
                adjacency.push(j);
            }
            adjacency[start..].sort_unstable();
            let mut w = start;
            for r in start..adjacency.len() {
                if w == start || adjacency[w - 1] != adjacency[r] {
                    adjacency[w] = adjacency[r];
                    w += 1;
                }
            }
            adjacency.truncate(w);
            row_ptr.push(adjacency.len());
        }
        Ok(StrengthGraph { row_ptr, adjacency })
    }

    pub fn len(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sorted strong neighbors of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }
}

/// Strong-coupling graph of a square matrix.
///
/// `(i, j)` is strong when `a_ij^2 > eps^2 * |a_ii * a_jj|`; the result is
/// the union of the strong couplings in both directions.
pub fn strength_graph(a: &CsrMatrix, eps: f64) -> Result<StrengthGraph> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "strength_graph",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "strength threshold must lie in [0, 1), got {eps}"
        )));
    }
    let n = a.nrows();
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row, level: None });
    }
    let eps2 = eps * eps;

    // Directed strong edges, row-sorted because CSR rows are sorted.
    let mut out_ptr = Vec::with_capacity(n + 1);
    let mut out_adj = Vec::with_capacity(a.nnz());
    out_ptr.push(0);
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j != i && v * v > eps2 * (diag[i] * diag[j]).abs() {
                out_adj.push(j);
            }
        }
        out_ptr.push(out_adj.len());
    }

    // Reverse edges, also row-sorted (filled in ascending source order).
    let mut in_ptr = vec![0usize; n + 1];
    for &j in &out_adj {
        in_ptr[j + 1] += 1;
    }
    for i in 0..n {
        in_ptr[i + 1] += in_ptr[i];
    }
    let mut next = in_ptr.clone();
    let mut in_adj = vec![0usize; out_adj.len()];
    for i in 0..n {
        for &j in &out_adj[out_ptr[i]..out_ptr[i + 1]] {
            in_adj[next[j]] = i;
            next[j] += 1;
        }
    }

    // Sorted merge of both directions.
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut adjacency = Vec::with_capacity(2 * out_adj.len());
    row_ptr.push(0);
    for i in 0..n {
        let out = &out_adj[out_ptr[i]..out_ptr[i + 1]];
        let inc = &in_adj[in_ptr[i]..in_ptr[i + 1]];
        let (mut x, mut y) = (0, 0);
        while x < out.len() || y < inc.len() {
            let next = match (out.get(x), inc.get(y)) {
                (Some(&o), Some(&r)) if o == r => {
                    x += 1;
                    y += 1;
                    o
                }
                (Some(&o), Some(&r)) if o < r => {
                    x += 1;
                    o
                }
                (Some(&o), None) => {
                    x += 1;
                    o
                }
                (_, Some(&r)) => {
                    y += 1;
                    r
                }
                (None, None) => unreachable!(),
            };
            adjacency.push(next);
        }
        row_ptr.push(adjacency.len());
    }
    Ok(StrengthGraph { row_ptr, adjacency })
}

/// Partition of fine unknowns into aggregates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregates {
    n_coarse: usize,
    assignment: Vec<usize>,
}

impl Aggregates {
    /// Validates an explicit assignment: every id below `n_coarse` and every
    /// id in use.
    pub fn new(n_coarse: usize, assignment: Vec<usize>) -> Result<Self> {
        let mut used = vec![false; n_coarse];
        for (i, &id) in assignment.iter().enumerate() {
            if id >= n_coarse {
                return Err(Error::InvalidParameter(format!(
                    "node {i} assigned to aggregate {id} >= {n_coarse}"
                )));
            }
            used[id] = true;
        }
        if let Some(id) = used.iter().position(|u| !u) {
            return Err(Error::InvalidParameter(format!("aggregate {id} is empty")));
        }
        Ok(Aggregates {
            n_coarse,
            assignment,
        })
    }

    pub fn n_fine(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_coarse(&self) -> usize {
        self.n_coarse
    }

    /// Aggregate id of every fine unknown.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Number of fine unknowns in each aggregate.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_coarse];
        for &id in &self.assignment {
            sizes[id] += 1;
        }
        sizes
    }

    /// Fine indices grouped by aggregate id, each group ascending.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_coarse];
        for (i, &id) in self.assignment.iter().enumerate() {
            groups[id].push(i);
        }
        groups
    }
}

/// Greedy two-pass aggregation.
///
/// Pass 1 visits nodes in ascending order; a node that is still free and has
/// at least one free strong neighbor becomes a root and takes all of its free
/// neighbors. Pass 2 attaches every leftover node to the aggregate of its
/// lowest-indexed strong neighbor, or makes it a singleton if it has none.
pub fn aggregate(g: &StrengthGraph) -> Aggregates {
    const FREE: usize = usize::MAX;
    let n = g.len();
    let mut assignment = vec![FREE; n];
    let mut n_coarse = 0;

    for i in 0..n {
        if assignment[i] != FREE {
            continue;
        }
        let nbrs = g.neighbors(i);
        if !nbrs.iter().any(|&j| assignment[j] == FREE) {
            continue;
        }
        let id = n_coarse;
        n_coarse += 1;
        assignment[i] = id;
        for &j in nbrs {
            if assignment[j] == FREE {
                assignment[j] = id;
            }
        }
    }

    for i in 0..n {
        if assignment[i] != FREE {
            continue;
        }
        // Any strong neighbor of a leftover node was aggregated in pass 1.
        match g.neighbors(i).first() {
            Some(&j) => assignment[i] = assignment[j],
            None => {
                assignment[i] = n_coarse;
                n_coarse += 1;
            }
        }
    }

    Aggregates {
        n_coarse,
        assignment,
    }
}

/// Piecewise-constant prolongation: `P[i, agg(i)] = 1`.
pub fn tentative_prolongation(agg: &Aggregates) -> CsrMatrix {
    let n = agg.n_fine();
    CsrMatrix::new(
        n,
        agg.n_coarse(),
        (0..=n).collect(),
        agg.assignment.clone(),
        vec![1.0; n],
    )
    .expect("aggregate ids are in range")
}
