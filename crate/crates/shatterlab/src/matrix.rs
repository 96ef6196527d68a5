//! Dense and sparse complex matrix types.
//!
//! `DenseMatrix` is a square row-major array of complex doubles. `SparseMatrix`
//! is compressed-row storage with strictly increasing column indices per row.
//! Both reject non-finite entries at construction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entry scalar for every matrix in this crate.
pub type ComplexScalar = Complex64;

fn check_finite(v: Complex64, row: usize, col: usize) -> Result<()> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { row, col })
    }
}

/// Square dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            entries: vec![Complex64::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            check_finite(d, i, i)?;
            m.entries[i * n + i] = d;
        }
        Ok(m)
    }

    /// Build from a row-major slice of length `n * n`.
    pub fn from_row_major(n: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for (idx, &v) in entries.iter().enumerate() {
            check_finite(v, idx / n, idx % n)?;
        }
        Ok(DenseMatrix {
            n,
            entries: entries.to_vec(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                check_finite(v, i, j)?;
                entries.push(v);
            }
        }
        Ok(DenseMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) -> Result<()> {
        check_finite(v, i, j)?;
        self.entries[i * self.n + j] = v;
        Ok(())
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        DenseMatrix {
            n: self.n,
            entries: self.entries.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(DenseMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    /// Subtract `z` from the diagonal, giving `A - zI`.
    pub fn shifted(&self, z: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.entries[i * self.n + i] -= z;
        }
        m
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut out = vec![Complex64::ZERO; self.n];
        for i in 0..self.n {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            let mut acc = Complex64::ZERO;
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_na(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn from_na(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }
}

/// Square sparse complex matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn empty(n: usize) -> Self {
        SparseMatrix {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![Complex64::ONE; n],
        }
    }

    /// Build from (row, col, value) triplets. Duplicate coordinates are an error.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut sorted: Vec<&(usize, usize, Complex64)> = triplets.iter().collect();
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for &&(i, j, v) in &sorted {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch { expected: n, got: i.max(j) + 1 });
            }
            if prev == Some((i, j)) {
                return Err(Error::domain(
                    "triplets",
                    format!("duplicate coordinate ({i}, {j})"),
                ));
            }
            check_finite(v, i, j)?;
            prev = Some((i, j));
            row_offsets[i + 1] += 1;
            col_indices.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(SparseMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Build directly from per-row (col, value) lists with strictly increasing columns.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, Complex64)>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for (i, row) in rows.iter().enumerate() {
            let mut last: Option<usize> = None;
            for &(j, v) in row {
                if j >= n {
                    return Err(Error::DimensionMismatch { expected: n, got: j + 1 });
                }
                if let Some(l) = last {
                    if j <= l {
                        return Err(Error::domain(
                            "rows",
                            format!("columns not strictly increasing in row {i}"),
                        ));
                    }
                }
                check_finite(v, i, j)?;
                last = Some(j);
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Iterate the stored entries of one row as (col, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        self.col_indices[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&j, &v)| (j, v))
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    /// Sparse product `A v`; cost proportional to nnz(A).
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut out = vec![Complex64::ZERO; self.n];
        for i in 0..self.n {
            let lo = self.row_offsets[i];
            let hi = self.row_offsets[i + 1];
            let mut acc = Complex64::ZERO;
            for k in lo..hi {
                acc += self.values[k] * v[self.col_indices[k]];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        SparseMatrix {
            n: self.n,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    /// Entry-wise sum; the result's pattern is the structural union.
    pub fn add(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut rows = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut merged: Vec<(usize, Complex64)> = Vec::new();
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                match (a.peek().copied(), b.peek().copied()) {
                    (Some((ja, va)), Some((jb, vb))) => {
                        if ja < jb {
                            merged.push((ja, va));
                            a.next();
                        } else if jb < ja {
                            merged.push((jb, vb));
                            b.next();
                        } else {
                            merged.push((ja, va + vb));
                            a.next();
                            b.next();
                        }
                    }
                    (Some(x), None) => {
                        merged.push(x);
                        a.next();
                    }
                    (None, Some(x)) => {
                        merged.push(x);
                        b.next();
                    }
                    (None, None) => break,
                }
            }
            rows.push(merged);
        }
        SparseMatrix::from_rows(self.n, rows)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d.entries[i * self.n + j] = v;
            }
        }
        d
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}
