//! Synthetic sequence of variable-coefficient diffusion problems.
//!
//! Step `k` discretizes `-div(kappa_k grad u) = f` on the unit square with
//! homogeneous Dirichlet boundary conditions using the five-point stencil.
//! The coefficient is one everywhere except for a Gaussian blob of height
//! `contrast` whose center moves along the diagonal, bouncing off the walls.
//! Face coefficients are harmonic means of the nodal values, so every matrix
//! is symmetric positive definite and the sparsity pattern never changes.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::reuse::LinearSystem;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionSequenceSpec {
    /// Interior grid is `grid_n x grid_n`.
    pub grid_n: usize,
    pub steps: usize,
    /// Coefficient ratio between the blob center and the background.
    pub contrast: f64,
    /// Gaussian radius in grid units.
    pub blob_sigma: f64,
    /// Blob displacement per step in grid units.
    pub path_speed: f64,
    /// Seed of the right-hand side.
    pub seed: u64,
}

impl DiffusionSequenceSpec {
    pub const DEFAULT_SEED: u64 = 42;

    /// Default blob radius: one eighth of the grid width.
    pub fn default_sigma(grid_n: usize) -> f64 {
        grid_n as f64 / 8.0
    }

    /// Slowly drifting, moderate contrast.
    pub fn slow(grid_n: usize, steps: usize) -> Self {
        DiffusionSequenceSpec {
            grid_n,
            steps,
            contrast: 10.0,
            blob_sigma: Self::default_sigma(grid_n),
            path_speed: 0.25,
            seed: Self::DEFAULT_SEED,
        }
    }

    /// Fast moving, high contrast.
    pub fn fast(grid_n: usize, steps: usize) -> Self {
        DiffusionSequenceSpec {
            contrast: 1000.0,
            path_speed: 2.0,
            ..Self::slow(grid_n, steps)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 4 {
            return Err(Error::InvalidParameter(format!("grid_n must be at least 4, got {}", self.grid_n)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if !(self.contrast >= 1.0 && self.contrast.is_finite()) {
            return Err(Error::InvalidParameter(format!("contrast must be >= 1, got {}", self.contrast)));
        }
        if !(self.blob_sigma > 0.0 && self.blob_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("blob_sigma must be positive, got {}", self.blob_sigma)));
        }
        if !(self.path_speed >= 0.0 && self.path_speed.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "path_speed must be non-negative, got {}",
                self.path_speed
            )));
        }
        Ok(())
    }

    /// Blob center at step `k`, in grid units (walls at 0 and `grid_n + 1`).
    pub fn blob_center(&self, k: usize) -> (f64, f64) {
        let width = (self.grid_n + 1) as f64;
        let start = 0.25 * width;
        let d = k as f64 * self.path_speed / std::f64::consts::SQRT_2;
        let c = reflect(start + d, width);
        (c, c)
    }

    /// Number of unknowns per step.
    pub fn size(&self) -> usize {
        self.grid_n * self.grid_n
    }
}

/// Folds `x` into `[0, width]` as if bouncing between two walls.
fn reflect(x: f64, width: f64) -> f64 {
    let period = 2.0 * width;
    let y = x.rem_euclid(period);
    if y <= width {
        y
    } else {
        period - y
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Matrix of step `k`.
pub fn diffusion_matrix(spec: &DiffusionSequenceSpec, k: usize) -> CsrMatrix {
    let m = spec.grid_n;
    let h = 1.0 / (m + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    let (cx, cy) = spec.blob_center(k);
    let s2 = spec.blob_sigma * spec.blob_sigma;
    // Node (x, y) sits at grid coordinates (x + 1, y + 1); ghost nodes at 0 and m + 1.
    let kappa = |gx: isize, gy: isize| -> f64 {
        let dx = (gx + 1) as f64 - cx;
        let dy = (gy + 1) as f64 - cy;
        1.0 + (spec.contrast - 1.0) * (-(dx * dx + dy * dy) / s2).exp()
    };

    let n = m * m;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(5 * n);
    let mut values = Vec::with_capacity(5 * n);
    row_ptr.push(0);
    for y in 0..m {
        for x in 0..m {
            let i = y * m + x;
            let (xi, yi) = (x as isize, y as isize);
            let kc = kappa(xi, yi);
            let south = harmonic(kc, kappa(xi, yi - 1));
            let west = harmonic(kc, kappa(xi - 1, yi));
            let east = harmonic(kc, kappa(xi + 1, yi));
            let north = harmonic(kc, kappa(xi, yi + 1));
            if y > 0 {
                col_idx.push(i - m);
                values.push(-south * inv_h2);
            }
            if x > 0 {
                col_idx.push(i - 1);
                values.push(-west * inv_h2);
            }
            col_idx.push(i);
            values.push((south + west + east + north) * inv_h2);
            if x + 1 < m {
                col_idx.push(i + 1);
                values.push(-east * inv_h2);
            }
            if y + 1 < m {
                col_idx.push(i + m);
                values.push(-north * inv_h2);
            }
            row_ptr.push(col_idx.len());
        }
    }
    CsrMatrix::new(n, n, row_ptr, col_idx, values).expect("five-point stencil is well formed")
}

/// The fixed right-hand side: uniform in `[0.5, 1.5)`, seeded.
pub fn diffusion_rhs(spec: &DiffusionSequenceSpec) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.size()).map(|_| rng.gen_range(0.5..1.5)).collect()
}

/// Lazily generates the sequence, one system per step.
pub fn diffusion_sequence(spec: DiffusionSequenceSpec) -> Result<impl Iterator<Item = LinearSystem>> {
    spec.validate()?;
    let rhs = diffusion_rhs(&spec);
    Ok((0..spec.steps).map(move |k| LinearSystem {
        matrix: Arc::new(diffusion_matrix(&spec, k)),
        rhs: rhs.clone(),
    }))
}

/// Generates every step of the sequence.
pub fn gen_diffusion_sequence(spec: &DiffusionSequenceSpec) -> Result<Vec<LinearSystem>> {
    Ok(diffusion_sequence(*spec)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseStructure;

    fn rel_change(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
        assert_eq!(a.pattern(), b.pattern());
        let d: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum();
        d.sqrt() / a.frobenius_norm()
    }

    #[test]
    fn unit_contrast_is_constant_laplacian() {
        let spec = DiffusionSequenceSpec {
            contrast: 1.0,
            ..DiffusionSequenceSpec::fast(4, 3)
        };
        let seq = gen_diffusion_sequence(&spec).unwrap();
        assert!(seq.iter().all(|s| s.matrix == seq[0].matrix));

        // Hand-assembled 4x4-grid Laplacian scaled by 1/h^2, h = 1/5.
        let a = &seq[0].matrix;
        let inv_h2 = 25.0;
        let mut t = Vec::new();
        for y in 0..4usize {
            for x in 0..4usize {
                let i = y * 4 + x;
                t.push((i, i, 4.0 * inv_h2));
                if x > 0 {
                    t.push((i, i - 1, -inv_h2));
                }
                if x < 3 {
                    t.push((i, i + 1, -inv_h2));
                }
                if y > 0 {
                    t.push((i, i - 4, -inv_h2));
                }
                if y < 3 {
                    t.push((i, i + 4, -inv_h2));
                }
            }
        }
        let oracle = CsrMatrix::from_triplets(16, 16, &t).unwrap();
        assert_eq!(a.nrows(), 16);
        for (x, y) in a.values().iter().zip(oracle.values()) {
            assert!((x - y).abs() <= 1e-12 * y.abs());
        }
        assert_eq!(a.pattern(), oracle.pattern());
        // Interior-of-interior rows (not touching the boundary) sum to zero.
        for i in [5, 6, 9, 10] {
            let s: f64 = a.row(i).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_diagonally_dominant_constant_pattern() {
        let spec = DiffusionSequenceSpec::fast(12, 5);
        let seq = gen_diffusion_sequence(&spec).unwrap();
        let pattern = seq[0].matrix.pattern();
        for s in &seq {
            let a = &s.matrix;
            assert_eq!(a.pattern(), pattern);
            assert_eq!(a.transpose(), **a);
            for i in 0..a.nrows() {
                let d = a.get(i, i).unwrap();
                let off: f64 = a.row(i).filter(|&(j, _)| j != i).map(|(_, v)| v.abs()).sum();
                assert!(off <= d * (1.0 + 1e-14));
                if a.row(i).count() < 5 {
                    assert!(off < d);
                }
            }
        }
    }

    #[test]
    fn fast_preset_drifts_more_than_slow() {
        let fast = gen_diffusion_sequence(&DiffusionSequenceSpec::fast(32, 10)).unwrap();
        let slow = gen_diffusion_sequence(&DiffusionSequenceSpec::slow(32, 10)).unwrap();
        for k in 0..9 {
            let f = rel_change(&fast[k].matrix, &fast[k + 1].matrix);
            let s = rel_change(&slow[k].matrix, &slow[k + 1].matrix);
            assert!(f > s, "step {k}: fast {f} vs slow {s}");
        }
    }

    #[test]
    fn seeded_determinism() {
        let spec = DiffusionSequenceSpec::slow(8, 3);
        let a = gen_diffusion_sequence(&spec).unwrap();
        let b = gen_diffusion_sequence(&spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.matrix, y.matrix);
            assert_eq!(x.rhs, y.rhs);
        }
        assert!(a[0].rhs.iter().all(|&v| v > 0.0));
        let other = gen_diffusion_sequence(&DiffusionSequenceSpec { seed: 7, ..spec }).unwrap();
        assert_ne!(other[0].rhs, a[0].rhs);
    }

    #[test]
    fn center_reflects_at_walls() {
        let spec = DiffusionSequenceSpec {
            path_speed: 10.0,
            ..DiffusionSequenceSpec::fast(9, 1)
        };
        for k in 0..50 {
            let (x, y) = spec.blob_center(k);
            assert!((0.0..=10.0).contains(&x) && x == y);
        }
        assert_eq!(reflect(12.0, 10.0), 8.0);
        assert_eq!(reflect(-1.0, 10.0), 1.0);
        assert_eq!(reflect(23.0, 10.0), 3.0);
    }

    #[test]
    fn invalid_specs() {
        let ok = DiffusionSequenceSpec::slow(8, 2);
        assert!(ok.validate().is_ok());
        for bad in [
            DiffusionSequenceSpec { grid_n: 3, ..ok },
            DiffusionSequenceSpec { steps: 0, ..ok },
            DiffusionSequenceSpec { contrast: 0.5, ..ok },
            DiffusionSequenceSpec { blob_sigma: 0.0, ..ok },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
