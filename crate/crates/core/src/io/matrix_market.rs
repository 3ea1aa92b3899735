//! Matrix Market exchange format.
//!
//! Reads `coordinate` matrices with `real` or `integer` fields in `general` or
//! `symmetric` storage (symmetric storage is expanded), and dense `array`
//! vectors. Values are written with 17 significant digits so a write/read
//! round trip is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::sparse::{CsrMatrix, SparseStructure};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
}

/// Storage layout used when writing a sparse matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MmStorage {
    #[default]
    General,
    /// Lower triangle only; the matrix must be exactly symmetric.
    Symmetric,
}

struct Header {
    layout: Layout,
    field: Field,
    symmetry: Symmetry,
}

struct Lines<R> {
    inner: R,
    path: PathBuf,
    line_no: usize,
    comments: Vec<String>,
}

impl<R: BufRead> Lines<R> {
    fn parse_err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line_no,
            message: message.into(),
        }
    }

    fn raw(&mut self) -> Result<Option<String>> {
        let mut buf = String::new();
        let read = self.inner.read_line(&mut buf).map_err(|e| Error::io(&self.path, e))?;
        if read == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        Ok(Some(buf.trim_end_matches(['\n', '\r']).to_string()))
    }

    /// Next non-blank, non-comment line. Comment text is collected.
    fn data(&mut self) -> Result<Option<String>> {
        while let Some(line) = self.raw()? {
            let trimmed = line.trim();
            if let Some(comment) = trimmed.strip_prefix('%') {
                self.comments.push(comment.trim().to_string());
            } else if !trimmed.is_empty() {
                return Ok(Some(trimmed.to_string()));
            }
        }
        Ok(None)
    }

    fn expect_data(&mut self, what: &str) -> Result<String> {
        match self.data()? {
            Some(line) => Ok(line),
            None => Err(self.parse_err(format!("unexpected end of file, expected {what}"))),
        }
    }
}

fn parse_header<R: BufRead>(lines: &mut Lines<R>) -> Result<Header> {
    let first = lines
        .raw()?
        .ok_or_else(|| lines.parse_err("empty file"))?;
    let tokens: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(lines.parse_err(format!("malformed header '{first}'")));
    }
    let unsupported = |what: String| Error::UnsupportedFormat {
        path: lines.path.clone(),
        what,
    };
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(unsupported(format!("format '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        other => return Err(unsupported(format!("field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(unsupported(format!("symmetry '{other}'"))),
    };
    Ok(Header {
        layout,
        field,
        symmetry,
    })
}

fn parse_usize<R: BufRead>(lines: &Lines<R>, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| lines.parse_err(format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| lines.parse_err(format!("invalid {what} '{tok}'")))
}

fn parse_value<R: BufRead>(lines: &Lines<R>, tok: Option<&str>, field: Field) -> Result<f64> {
    let tok = tok.ok_or_else(|| lines.parse_err("missing value"))?;
    let v = match field {
        Field::Real => tok.parse::<f64>().ok(),
        Field::Integer => tok.parse::<i64>().ok().map(|v| v as f64),
    };
    v.ok_or_else(|| lines.parse_err(format!("non-numeric value '{tok}'")))
}

fn open(path: &Path) -> Result<Lines<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(Lines {
        inner: BufReader::new(file),
        path: path.to_path_buf(),
        line_no: 0,
        comments: Vec::new(),
    })
}

/// Parses a sparse matrix from any reader. `origin` only labels errors.
pub fn parse_matrix<R: BufRead>(reader: R, origin: &Path) -> Result<(CsrMatrix, Vec<String>)> {
    let mut lines = Lines {
        inner: reader,
        path: origin.to_path_buf(),
        line_no: 0,
        comments: Vec::new(),
    };
    let header = parse_header(&mut lines)?;
    if header.layout != Layout::Coordinate {
        return Err(Error::UnsupportedFormat {
            path: lines.path.clone(),
            what: "dense 'array' matrices (use read_vector for vectors)".into(),
        });
    }
    let size = lines.expect_data("size line")?;
    let mut tok = size.split_whitespace();
    let nrows = parse_usize(&lines, tok.next(), "row count")?;
    let ncols = parse_usize(&lines, tok.next(), "column count")?;
    let nnz = parse_usize(&lines, tok.next(), "entry count")?;
    if tok.next().is_some() {
        return Err(lines.parse_err("trailing tokens on size line"));
    }
    if header.symmetry == Symmetry::Symmetric && nrows != ncols {
        return Err(lines.parse_err("symmetric storage requires a square matrix"));
    }

    let mut triplets = Vec::with_capacity(if header.symmetry == Symmetry::Symmetric { 2 * nnz } else { nnz });
    for _ in 0..nnz {
        let entry = lines.expect_data("matrix entry")?;
        let mut tok = entry.split_whitespace();
        let i = parse_usize(&lines, tok.next(), "row index")?;
        let j = parse_usize(&lines, tok.next(), "column index")?;
        let v = parse_value(&lines, tok.next(), header.field)?;
        if tok.next().is_some() {
            return Err(lines.parse_err("trailing tokens in entry"));
        }
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(lines.parse_err(format!(
                "index ({i}, {j}) outside declared {nrows}x{ncols} bounds"
            )));
        }
        triplets.push((i - 1, j - 1, v));
        if header.symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    if lines.data()?.is_some() {
        return Err(lines.parse_err(format!("more entries than the declared {nnz}")));
    }
    let matrix = CsrMatrix::from_triplets(nrows, ncols, &triplets)?;
    Ok((matrix, lines.comments))
}

/// Reads a sparse matrix in coordinate format.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    read_matrix_with_comments(path).map(|(m, _)| m)
}

/// Reads a sparse matrix and the text of its `%` comment lines.
pub fn read_matrix_with_comments(path: impl AsRef<Path>) -> Result<(CsrMatrix, Vec<String>)> {
    let path = path.as_ref();
    let lines = open(path)?;
    parse_matrix(lines.inner, path)
}

fn write_comments<W: Write>(w: &mut W, comments: &[String]) -> std::io::Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(w, "% {line}")?;
        }
    }
    Ok(())
}

/// Writes a sparse matrix in coordinate format.
pub fn write_matrix(path: impl AsRef<Path>, a: &CsrMatrix, storage: MmStorage, comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    if storage == MmStorage::Symmetric && !is_symmetric(a) {
        return Err(Error::InvalidParameter(format!(
            "{}: symmetric storage requested for a non-symmetric matrix",
            path.display()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let kind = match storage {
        MmStorage::General => "general",
        MmStorage::Symmetric => "symmetric",
    };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}").map_err(io)?;
    write_comments(&mut w, comments).map_err(io)?;
    let entries: Vec<(usize, usize, f64)> = match storage {
        MmStorage::General => a.triplets().collect(),
        MmStorage::Symmetric => a.triplets().filter(|&(i, j, _)| j <= i).collect(),
    };
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), entries.len()).map_err(io)?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Structurally and numerically symmetric.
pub fn is_symmetric(a: &CsrMatrix) -> bool {
    a.is_square() && a.transpose() == *a
}

/// Reads a dense `array` vector (an `n x 1` matrix).
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut lines = open(path)?;
    let header = parse_header(&mut lines)?;
    if header.layout != Layout::Array || header.symmetry != Symmetry::General {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            what: "vectors must use 'array ... general' storage".into(),
        });
    }
    let size = lines.expect_data("size line")?;
    let mut tok = size.split_whitespace();
    let nrows = parse_usize(&lines, tok.next(), "row count")?;
    let ncols = parse_usize(&lines, tok.next(), "column count")?;
    if ncols != 1 {
        return Err(lines.parse_err(format!("expected a single column, found {ncols}")));
    }
    let mut values = Vec::with_capacity(nrows);
    while values.len() < nrows {
        let line = lines.expect_data("vector value")?;
        for t in line.split_whitespace() {
            values.push(parse_value(&lines, Some(t), header.field)?);
        }
    }
    if values.len() > nrows || lines.data()?.is_some() {
        return Err(lines.parse_err(format!("more values than the declared {nrows}")));
    }
    Ok(values)
}

/// Writes a dense vector as an `n x 1` array.
pub fn write_vector(path: impl AsRef<Path>, v: &[f64], comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "%%MatrixMarket matrix array real general").map_err(io)?;
    write_comments(&mut w, comments).map_err(io)?;
    writeln!(w, "{} 1", v.len()).map_err(io)?;
    for x in v {
        writeln!(w, "{x:.16e}").map_err(io)?;
    }
    w.flush().map_err(io)
}
