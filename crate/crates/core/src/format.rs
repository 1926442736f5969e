//! Dense-matrix and edge-list text formats.
//!
//! Dense: one row per line, entries separated by commas, `#` starts a comment
//! line, blank lines are skipped. Edge list: `i j w` per line with 0-based
//! node indices and a positive weight.
//!
//! Matrices are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::stochmat::{AffinityMatrix, Matrix, MatrixError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} entries, found {found}")]
    RaggedRows { line: usize, expected: usize, found: usize },
    #[error("no data rows")]
    Empty,
    #[error("line {line}: weight {weight} must be positive")]
    NegativeWeight { line: usize, weight: f64 },
    #[error("line {line}: node {index} out of range for {nodes} nodes")]
    IndexOutOfRange { line: usize, index: usize, nodes: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_matrix_str(text: &str) -> Result<Matrix, FormatError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut last_line = 0;
    for (line, content) in data_lines(text) {
        let row = content
            .split(',')
            .map(|cell| {
                let cell = cell.trim();
                cell.parse::<f64>().map_err(|_| FormatError::Parse { line, message: format!("`{cell}` is not a number") })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(FormatError::RaggedRows { line, expected: first.len(), found: row.len() });
            }
        }
        rows.push(row);
        last_line = line;
    }
    if rows.is_empty() {
        return Err(FormatError::Empty);
    }
    if rows.len() != rows[0].len() {
        return Err(FormatError::Parse {
            line: last_line,
            message: format!("{} rows of {} entries is not square", rows.len(), rows[0].len()),
        });
    }
    Ok(Matrix::from_rows(&rows)?)
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn parse_matrix_file(path: impl AsRef<Path>) -> Result<Matrix, FormatError> {
    parse_matrix_str(&read(path.as_ref())?)
}

/// Builds an affinity matrix from `i j w` lines.
///
/// Repeated edges accumulate. With `undirected`, each edge is also added in
/// the reverse direction (self-loops once). When `nodes` is `None` the node
/// count is one past the largest index.
pub fn parse_edgelist_str(text: &str, undirected: bool, nodes: Option<usize>) -> Result<AffinityMatrix, FormatError> {
    let mut edges = Vec::new();
    for (line, content) in data_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(FormatError::Parse { line, message: format!("expected `i j w`, found {} fields", fields.len()) });
        }
        let index = |s: &str| {
            s.parse::<usize>().map_err(|_| FormatError::Parse { line, message: format!("`{s}` is not a node index") })
        };
        let (i, j) = (index(fields[0])?, index(fields[1])?);
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| FormatError::Parse { line, message: format!("`{}` is not a weight", fields[2]) })?;
        if !w.is_finite() || w <= 0.0 {
            return Err(FormatError::NegativeWeight { line, weight: w });
        }
        edges.push((line, i, j, w));
    }
    if edges.is_empty() {
        return Err(FormatError::Empty);
    }
    let n = match nodes {
        Some(n) => n,
        None => edges.iter().map(|(_, i, j, _)| i.max(j) + 1).max().unwrap_or(0),
    };
    let mut data = vec![0.0; n * n];
    for (line, i, j, w) in edges {
        for index in [i, j] {
            if index >= n {
                return Err(FormatError::IndexOutOfRange { line, index, nodes: n });
            }
        }
        data[i * n + j] += w;
        if undirected && i != j {
            data[j * n + i] += w;
        }
    }
    Ok(AffinityMatrix::new(Matrix::new(n, data)?)?)
}

pub fn parse_edgelist(path: impl AsRef<Path>, undirected: bool) -> Result<AffinityMatrix, FormatError> {
    parse_edgelist_str(&read(path.as_ref())?, undirected, None)
}

/// Formats a number with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn matrix_to_string(m: &Matrix) -> String {
    let mut out = String::new();
    for r in m.rows() {
        let cells: Vec<String> = r.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &Matrix, header: Option<&str>) -> Result<(), FormatError> {
    let path = path.as_ref();
    let mut text = String::new();
    if let Some(h) = header {
        for l in h.lines() {
            text.push_str("# ");
            text.push_str(l);
            text.push('\n');
        }
    }
    text.push_str(&matrix_to_string(m));
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}
