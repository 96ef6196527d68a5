//! Matrix Market file I/O for complex square matrices.
//!
//! Two variants are supported, both with `complex general` fields and 1-based
//! indices:
//! - `coordinate`: size line `rows cols nnz`, then `row col re im` per entry;
//! - `array`: size line `rows cols`, then `re im` per entry in column-major
//!   order.
//!
//! Values are printed with shortest-round-trip formatting, so a write/read
//! cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseMatrix};

/// A parsed matrix, keeping the representation of the source file.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedMatrix {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
}

impl ParsedMatrix {
    pub fn n(&self) -> usize {
        match self {
            ParsedMatrix::Sparse(m) => m.n(),
            ParsedMatrix::Dense(m) => m.n(),
        }
    }

    pub fn into_dense(self) -> DenseMatrix {
        match self {
            ParsedMatrix::Sparse(m) => m.to_dense(),
            ParsedMatrix::Dense(m) => m,
        }
    }

    pub fn into_sparse(self) -> Result<SparseMatrix> {
        match self {
            ParsedMatrix::Sparse(m) => Ok(m),
            ParsedMatrix::Dense(m) => {
                let n = m.n();
                let mut rows = Vec::with_capacity(n);
                for i in 0..n {
                    let mut row = Vec::new();
                    for j in 0..n {
                        let v = m.get(i, j);
                        if v != Complex64::ZERO {
                            row.push((j, v));
                        }
                    }
                    rows.push(row);
                }
                SparseMatrix::from_rows(n, rows)
            }
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} value '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {what} value '{tok}'")));
    }
    Ok(v)
}

fn parse_index(tok: &str, line: usize, what: &str, n: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} index '{tok}'")))?;
    if v == 0 || v > n {
        return Err(parse_err(
            line,
            format!("{what} index {v} out of range 1..={n}"),
        ));
    }
    Ok(v - 1)
}

/// Parse Matrix Market text.
pub fn parse_matrix(text: &str) -> Result<ParsedMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let head_fields: Vec<&str> = header.split_whitespace().collect();
    if head_fields.len() != 5
        || !head_fields[0].eq_ignore_ascii_case("%%MatrixMarket")
        || !head_fields[1].eq_ignore_ascii_case("matrix")
    {
        return Err(parse_err(
            1,
            "expected header '%%MatrixMarket matrix <format> complex general'",
        ));
    }
    let format = head_fields[2].to_ascii_lowercase();
    if format != "coordinate" && format != "array" {
        return Err(parse_err(
            1,
            format!("unsupported format '{}': expected coordinate or array", head_fields[2]),
        ));
    }
    if !head_fields[3].eq_ignore_ascii_case("complex") {
        return Err(parse_err(
            1,
            format!("unsupported field type '{}': expected complex", head_fields[3]),
        ));
    }
    if !head_fields[4].eq_ignore_ascii_case("general") {
        return Err(parse_err(
            1,
            format!("unsupported symmetry '{}': expected general", head_fields[4]),
        ));
    }

    // Size line: first non-comment, non-blank line.
    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx + 1, trimmed.to_string()));
        break;
    }
    let (size_lineno, size_text) =
        size_line.ok_or_else(|| parse_err(2, "missing size line"))?;
    let size_fields: Vec<&str> = size_text.split_whitespace().collect();

    let expect_counts = if format == "coordinate" { 3 } else { 2 };
    if size_fields.len() != expect_counts {
        return Err(parse_err(
            size_lineno,
            format!("size line needs {expect_counts} integers, got {}", size_fields.len()),
        ));
    }
    let rows: usize = size_fields[0]
        .parse()
        .map_err(|_| parse_err(size_lineno, "invalid row count"))?;
    let cols: usize = size_fields[1]
        .parse()
        .map_err(|_| parse_err(size_lineno, "invalid column count"))?;
    if rows != cols {
        return Err(parse_err(
            size_lineno,
            format!("matrix must be square, got {rows}x{cols}"),
        ));
    }
    if rows == 0 {
        return Err(parse_err(size_lineno, "matrix dimension must be positive"));
    }
    let n = rows;

    let mut data_lines = lines.filter_map(|(idx, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            None
        } else {
            Some((idx + 1, trimmed))
        }
    });

    if format == "coordinate" {
        let nnz: usize = size_fields[2]
            .parse()
            .map_err(|_| parse_err(size_lineno, "invalid nonzero count"))?;
        let mut triplets = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let (lineno, line) = data_lines
                .next()
                .ok_or_else(|| parse_err(size_lineno, format!("expected {nnz} entries, file ended early")))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(parse_err(
                    lineno,
                    format!("entry needs 'row col re im', got {} fields", f.len()),
                ));
            }
            let i = parse_index(f[0], lineno, "row", n)?;
            let j = parse_index(f[1], lineno, "column", n)?;
            let re = parse_f64(f[2], lineno, "real")?;
            let im = parse_f64(f[3], lineno, "imaginary")?;
            triplets.push((i, j, Complex64::new(re, im)));
        }
        if let Some((lineno, _)) = data_lines.next() {
            return Err(parse_err(lineno, "trailing data after declared entries"));
        }
        Ok(ParsedMatrix::Sparse(SparseMatrix::from_triplets(n, &triplets)?))
    } else {
        let mut entries = vec![Complex64::ZERO; n * n];
        for col in 0..n {
            for row in 0..n {
                let (lineno, line) = data_lines
                    .next()
                    .ok_or_else(|| {
                        parse_err(size_lineno, format!("expected {} values, file ended early", n * n))
                    })?;
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(parse_err(
                        lineno,
                        format!("array entry needs 're im', got {} fields", f.len()),
                    ));
                }
                let re = parse_f64(f[0], lineno, "real")?;
                let im = parse_f64(f[1], lineno, "imaginary")?;
                entries[row * n + col] = Complex64::new(re, im);
            }
        }
        if let Some((lineno, _)) = data_lines.next() {
            return Err(parse_err(lineno, "trailing data after declared entries"));
        }
        Ok(ParsedMatrix::Dense(DenseMatrix::from_row_major(n, &entries)?))
    }
}

/// Serialize a sparse matrix in coordinate format.
pub fn format_sparse(m: &SparseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(out, "{} {} {}", m.n(), m.n(), m.nnz());
    for i in 0..m.n() {
        for (j, v) in m.row(i) {
            let _ = writeln!(out, "{} {} {} {}", i + 1, j + 1, v.re, v.im);
        }
    }
    out
}

/// Serialize a dense matrix in array format (column-major values).
pub fn format_dense(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} {}", m.n(), m.n());
    for j in 0..m.n() {
        for i in 0..m.n() {
            let v = m.get(i, j);
            let _ = writeln!(out, "{} {}", v.re, v.im);
        }
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<ParsedMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix(&text)
}

pub fn write_sparse(path: &Path, m: &SparseMatrix) -> Result<()> {
    fs::write(path, format_sparse(m))?;
    Ok(())
}

pub fn write_dense(path: &Path, m: &DenseMatrix) -> Result<()> {
    fs::write(path, format_dense(m))?;
    Ok(())
}
