//! Directories of numbered systems: `step_0000.mtx`, `step_0001.mtx`, ...
//! with optional right-hand sides `step_0000.rhs.mtx` in array format.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::matrix_market::{read_matrix, read_vector, write_matrix, write_vector, MmStorage};
use crate::reuse::LinearSystem;
use crate::sparse::SparseStructure;
use crate::{Error, Result};

pub fn matrix_file_name(step: usize) -> String {
    format!("step_{step:04}.mtx")
}

pub fn rhs_file_name(step: usize) -> String {
    format!("step_{step:04}.rhs.mtx")
}

/// Step index of a matrix file name, `None` for anything else (including
/// right-hand-side files).
fn step_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("step_")?.strip_suffix(".mtx")?;
    if digits.len() < 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Matrix files of a sequence directory, ordered by step. Numbering must
/// start at 0 and be contiguous.
pub fn list_sequence(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut steps = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(k) = entry.file_name().to_str().and_then(step_index) {
            if steps.insert(k, entry.path()).is_some() {
                return Err(Error::Sequence(format!("step {k} appears more than once in {}", dir.display())));
            }
        }
    }
    if steps.is_empty() {
        return Err(Error::Sequence(format!("no step_NNNN.mtx files in {}", dir.display())));
    }
    for (expected, &k) in steps.keys().enumerate() {
        if k != expected {
            return Err(Error::Sequence(format!(
                "gap in step numbering in {}: {} is missing",
                dir.display(),
                matrix_file_name(expected)
            )));
        }
    }
    Ok(steps.into_values().collect())
}

fn read_step(path: &Path) -> Result<LinearSystem> {
    let matrix = read_matrix(path)?;
    let rhs_path = path.with_extension("rhs.mtx");
    let rhs = if rhs_path.exists() {
        let rhs = read_vector(&rhs_path)?;
        if rhs.len() != matrix.nrows() {
            return Err(Error::Sequence(format!(
                "{} has {} entries but {} has {} rows",
                rhs_path.display(),
                rhs.len(),
                path.display(),
                matrix.nrows()
            )));
        }
        rhs
    } else {
        vec![1.0; matrix.nrows()]
    };
    Ok(LinearSystem {
        matrix: Arc::new(matrix),
        rhs,
    })
}

/// Reads every step of a sequence directory in order. A missing
/// right-hand side defaults to a vector of ones.
pub fn read_sequence(dir: impl AsRef<Path>) -> Result<Vec<LinearSystem>> {
    list_sequence(dir)?.iter().map(|p| read_step(p)).collect()
}

/// Lazy variant of [`read_sequence`]; the directory listing is validated up
/// front, files are parsed on demand.
pub fn sequence_iter(dir: impl AsRef<Path>) -> Result<impl Iterator<Item = Result<LinearSystem>>> {
    Ok(list_sequence(dir)?.into_iter().map(|p| read_step(&p)))
}

/// Writes `systems` as a sequence directory (created if needed).
pub fn write_sequence(dir: impl AsRef<Path>, systems: &[LinearSystem], comments: &[String]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (k, s) in systems.iter().enumerate() {
        write_matrix(dir.join(matrix_file_name(k)), &s.matrix, MmStorage::General, comments)?;
        write_vector(dir.join(rhs_file_name(k)), &s.rhs, comments)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::poisson_1d;
    use crate::sparse::CsrMatrix;

    fn write_step(dir: &Path, k: usize, a: &CsrMatrix) {
        write_matrix(dir.join(matrix_file_name(k)), a, MmStorage::General, &[]).unwrap();
    }

    #[test]
    fn steps_come_back_in_order() {
        let dir = tempfile::tempdir().unwrap();
        for k in [2, 0, 1] {
            write_step(dir.path(), k, &poisson_1d(3 + k));
        }
        let seq = read_sequence(dir.path()).unwrap();
        assert_eq!(seq.iter().map(|s| s.matrix.nrows()).collect::<Vec<_>>(), vec![3, 4, 5]);
    }

    #[test]
    fn missing_rhs_defaults_to_ones() {
        let dir = tempfile::tempdir().unwrap();
        write_step(dir.path(), 0, &poisson_1d(4));
        assert_eq!(read_sequence(dir.path()).unwrap()[0].rhs, vec![1.0; 4]);
    }

    #[test]
    fn rhs_is_read() {
        let dir = tempfile::tempdir().unwrap();
        write_step(dir.path(), 0, &poisson_1d(2));
        write_vector(dir.path().join(rhs_file_name(0)), &[3.0, -1.0], &[]).unwrap();
        assert_eq!(read_sequence(dir.path()).unwrap()[0].rhs, vec![3.0, -1.0]);
    }

    #[test]
    fn gap_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write_step(dir.path(), 0, &poisson_1d(3));
        write_step(dir.path(), 2, &poisson_1d(3));
        let err = read_sequence(dir.path()).unwrap_err();
        assert!(err.to_string().contains("step_0001.mtx"), "{err}");
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        assert!(matches!(read_sequence(dir.path()), Err(Error::Sequence(_))));
    }

    #[test]
    fn rhs_length_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write_step(dir.path(), 0, &poisson_1d(3));
        write_vector(dir.path().join(rhs_file_name(0)), &[1.0, 2.0], &[]).unwrap();
        assert!(matches!(read_sequence(dir.path()), Err(Error::Sequence(_))));
    }

    #[test]
    fn file_name_parsing() {
        assert_eq!(step_index("step_0012.mtx"), Some(12));
        assert_eq!(step_index("step_12345.mtx"), Some(12345));
        assert_eq!(step_index("step_0012.rhs.mtx"), None);
        assert_eq!(step_index("step_12.mtx"), None);
        assert_eq!(step_index("other.mtx"), None);
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let systems: Vec<LinearSystem> = (0..3)
            .map(|k| LinearSystem {
                matrix: Arc::new(poisson_1d(5).scaled(1.0 + k as f64 / 3.0)),
                rhs: (0..5).map(|i| i as f64 * 0.1).collect(),
            })
            .collect();
        write_sequence(dir.path(), &systems, &["test".into()]).unwrap();
        let back = read_sequence(dir.path()).unwrap();
        for (a, b) in systems.iter().zip(&back) {
            assert_eq!(a.matrix, b.matrix);
            assert_eq!(a.rhs, b.rhs);
        }
    }
}
