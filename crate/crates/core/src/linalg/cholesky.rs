use super::sparse::{check_len, norm2, SparseMatrix};
use crate::error::{LodError, Result};

/// Refinement sweeps allowed before a solve is declared failed.
const MAX_REFINEMENT: usize = 6;

/// Envelope (profile) Cholesky factor `A = L Lᵀ`.
///
/// Row `i` of `L` is stored densely from its first structural nonzero to the
/// diagonal. Fill-in stays inside that envelope, so structured meshes with
/// lexicographic numbering factor in `O(n · bandwidth²)`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors the lower triangle of `a`; the upper triangle is ignored.
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        check_len(n, a.ncols())?;
        let first: Vec<usize> = (0..n)
            .map(|i| {
                let (cols, _) = a.row(i);
                cols.first().copied().unwrap_or(i).min(i)
            })
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; offsets[n]];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    data[offsets[i] + j - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let s = {
                    let row_i = &data[offsets[i] + k0 - fi..offsets[i] + j - fi];
                    let row_j = &data[offsets[j] + k0 - fj..offsets[j] + j - fj];
                    let acc: f64 = row_i.iter().zip(row_j).map(|(x, y)| x * y).sum();
                    data[offsets[i] + j - fi] - acc
                };
                if j < i {
                    let djj = data[offsets[j + 1] - 1];
                    data[offsets[i] + j - fi] = s / djj;
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(LodError::NotPositiveDefinite { pivot: i, value: s });
                    }
                    data[offsets[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(EnvelopeCholesky { first, offsets, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Solves `L Lᵀ x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offsets[i]..self.offsets[i + 1]];
            let acc: f64 = row[..i - fi].iter().zip(&x[fi..i]).map(|(l, y)| l * y).sum();
            x[i] = (x[i] - acc) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offsets[i]..self.offsets[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (l, y) in row[..i - fi].iter().zip(&mut x[fi..i]) {
                *y -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// A factored SPD matrix that solves to a relative residual tolerance,
/// applying iterative refinement when the first solve falls short.
#[derive(Debug, Clone)]
pub struct SpdSolver {
    matrix: SparseMatrix,
    factor: EnvelopeCholesky,
}

impl SpdSolver {
    pub fn new(matrix: SparseMatrix) -> Result<Self> {
        let factor = EnvelopeCholesky::factor(&matrix)?;
        Ok(SpdSolver { matrix, factor })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn factor(&self) -> &EnvelopeCholesky {
        &self.factor
    }

    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        check_len(self.matrix.nrows(), b.len())?;
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = self.factor.solve(b);
        let mut rel = f64::INFINITY;
        for _ in 0..MAX_REFINEMENT {
            let ax = self.matrix.matvec(&x)?;
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            rel = norm2(&r) / bnorm;
            if rel <= tol {
                return Ok(x);
            }
            let dx = self.factor.solve(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        }
        Err(LodError::SolverFailure { residual: rel, tol })
    }
}

/// Solves `A x = b` for symmetric positive definite `A` with
/// `‖A x − b‖₂ <= tol · ‖b‖₂`.
pub fn spd_solve(a: &SparseMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_len(a.nrows(), b.len())?;
    SpdSolver::new(a.clone())?.solve(b, tol)
}
