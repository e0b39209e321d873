use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use super::cholesky::EnvelopeCholesky;
use super::sparse::{check_len, norm2, SparseMatrix};
use crate::error::{LodError, Result};

const MAX_REFINEMENT: usize = 6;

/// Relative eigenvalue cutoff below which a Schur direction is treated as
/// lying in the null space of `Cᵀ`.
const SCHUR_RANK_TOL: f64 = 1e-12;

/// `A x + Cᵀ μ = b`, `C x = 0`.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: SparseMatrix,
    pub c: SparseMatrix,
    pub b: Vec<f64>,
}

/// Schur-complement solver for equality-constrained SPD systems.
///
/// `A` is factored once and `Y = A⁻¹ Cᵀ` and `S = C Y` are formed up front,
/// so every further right-hand side costs two triangular solves plus a
/// dense `m × m` product. `S` is inverted through its eigen-decomposition;
/// directions with negligible eigenvalue get a zero multiplier, which yields
/// the least-squares multiplier when `C` is rank deficient.
#[derive(Debug, Clone)]
pub struct SaddleSolver {
    a: SparseMatrix,
    c: SparseMatrix,
    factor: EnvelopeCholesky,
    /// Columns of `A⁻¹ Cᵀ`.
    y: Vec<Vec<f64>>,
    schur_pinv: DMatrix<f64>,
}

impl SaddleSolver {
    pub fn new(a: SparseMatrix, c: SparseMatrix) -> Result<Self> {
        check_len(a.nrows(), a.ncols())?;
        check_len(a.ncols(), c.ncols())?;
        let factor = EnvelopeCholesky::factor(&a)?;
        let m = c.nrows();
        let y: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let mut col = vec![0.0; a.nrows()];
                let (cols, vals) = c.row(k);
                for (&i, &v) in cols.iter().zip(vals) {
                    col[i] = v;
                }
                factor.solve_in_place(&mut col);
                col
            })
            .collect();

        let mut schur = DMatrix::<f64>::zeros(m, m);
        for (k, yk) in y.iter().enumerate() {
            let cy = c.matvec(yk)?;
            for (i, v) in cy.into_iter().enumerate() {
                schur[(i, k)] = v;
            }
        }
        let schur = (&schur + schur.transpose()) * 0.5;
        let schur_pinv = if m == 0 {
            DMatrix::zeros(0, 0)
        } else {
            let eig = SymmetricEigen::new(schur);
            let lmax = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if lmax == 0.0 {
                DMatrix::zeros(m, m)
            } else {
                let inv = eig.eigenvalues.map(|l| if l > SCHUR_RANK_TOL * lmax { 1.0 / l } else { 0.0 });
                &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
            }
        };
        Ok(SaddleSolver { a, c, factor, y, schur_pinv })
    }

    pub fn num_unknowns(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_constraints(&self) -> usize {
        self.c.nrows()
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn constraints(&self) -> &SparseMatrix {
        &self.c
    }

    /// One pass of `[A Cᵀ; C 0] [x; μ] = [f; g]` without refinement.
    fn solve_once(&self, f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut x = self.factor.solve(f);
        if self.y.is_empty() {
            return (x, Vec::new());
        }
        let cx = self.c.matvec(&x).expect("constraint shape checked at construction");
        let r = DVector::from_iterator(cx.len(), cx.iter().zip(g).map(|(a, b)| a - b));
        let mu = &self.schur_pinv * r;
        for (yk, &mk) in self.y.iter().zip(mu.iter()) {
            if mk != 0.0 {
                x.iter_mut().zip(yk).for_each(|(xi, yi)| *xi -= mk * yi);
            }
        }
        (x, mu.iter().copied().collect())
    }

    /// Minimizes `½ xᵀ A x − bᵀ x` subject to `C x = 0`.
    ///
    /// Guarantees `‖A x + Cᵀ μ − b‖ <= tol ‖b‖` and `‖C x‖ <= tol max(1, ‖x‖)`.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.a.nrows(), b.len())?;
        let m = self.c.nrows();
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok((vec![0.0; b.len()], vec![0.0; m]));
        }
        let zeros = vec![0.0; m];
        let (mut x, mut mu) = self.solve_once(b, &zeros);
        let mut worst = f64::INFINITY;
        for _ in 0..MAX_REFINEMENT {
            let ax = self.a.matvec(&x)?;
            let ctmu = self.c.transpose_matvec(&mu)?;
            let r1: Vec<f64> = (0..b.len()).map(|i| b[i] - ax[i] - ctmu[i]).collect();
            let r2: Vec<f64> = self.c.matvec(&x)?.iter().map(|v| -v).collect();
            let rel1 = norm2(&r1) / bnorm;
            let rel2 = norm2(&r2) / norm2(&x).max(1.0);
            worst = rel1.max(rel2);
            if rel1 <= tol && rel2 <= tol {
                return Ok((x, mu));
            }
            let (dx, dmu) = self.solve_once(&r1, &r2);
            x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
            mu.iter_mut().zip(&dmu).for_each(|(a, d)| *a += d);
        }
        Err(LodError::SolverFailure { residual: worst, tol })
    }
}

/// One-shot constrained solve; see [`SaddleSolver::solve`].
pub fn saddle_solve(sys: &SaddleSystem, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    SaddleSolver::new(sys.a.clone(), sys.c.clone())?.solve(&sys.b, tol)
}
