use crate::error::{LodError, Result};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing inside each row and duplicates are
/// never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` entries, summing duplicates.
    ///
    /// Duplicates are summed in insertion order, so the result is bit-stable
    /// for a fixed input sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(r, c, _) in &entries {
            if r >= nrows {
                return Err(LodError::Index { what: "row", index: r, len: nrows });
            }
            if c >= ncols {
                return Err(LodError::Index { what: "column", index: c, len: ncols });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(SparseMatrix { nrows, ncols, row_offsets, col_indices, values })
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(LodError::Shape { expected: ncols, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, entries)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.ncols, x.len())?;
        Ok((0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    pub fn transpose_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.nrows, y.len())?;
        let mut out = vec![0.0; self.ncols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[j] += v * yi;
            }
        }
        Ok(out)
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.nrows, x.len())?;
        let ay = self.matvec(y)?;
        Ok(dot(x, &ay))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut entries = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                entries.push((j, i, v));
            }
        }
        SparseMatrix::from_triplets(self.ncols, self.nrows, entries).expect("transpose indices in range")
    }

    /// Submatrix with the given row and column index lists, in the order given.
    pub fn extract_submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<SparseMatrix> {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &c) in cols.iter().enumerate() {
            if c >= self.ncols {
                return Err(LodError::Index { what: "column", index: c, len: self.ncols });
            }
            col_map[c] = new;
        }
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for &r in rows {
            if r >= self.nrows {
                return Err(LodError::Index { what: "row", index: r, len: self.nrows });
            }
            scratch.clear();
            let (cs, vs) = self.row(r);
            for (&c, &v) in cs.iter().zip(vs) {
                let m = col_map[c];
                if m != usize::MAX {
                    scratch.push((m, v));
                }
            }
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            nrows: rows.len(),
            ncols: cols.len(),
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SparseMatrix, s: f64) -> Result<SparseMatrix> {
        check_len(self.nrows, other.nrows)?;
        check_len(self.ncols, other.ncols)?;
        let mut entries = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            entries.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
            let (cols, vals) = other.row(i);
            entries.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, s * v)));
        }
        SparseMatrix::from_triplets(self.nrows, self.ncols, entries)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - Aᵀ| <= rel_tol * max |A|`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let bound = rel_tol * self.max_abs();
        (0..self.nrows).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| (v - self.get(j, i)).abs() <= bound)
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(LodError::Shape { expected, got })
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
