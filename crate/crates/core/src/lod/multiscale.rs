use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{CorrectorSet, LodContext};
use crate::error::{LodError, Result};
use crate::linalg::{dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Trial and test functions `λ_a − φ_a`.
    Galerkin,
    /// Trial functions `λ_a − φ_a`, test functions `λ_a`.
    PetrovGalerkin,
}

/// The modified nodal basis and its coarse systems.
#[derive(Debug, Clone)]
pub struct MultiscaleSpace {
    /// `b_a = λ_a − φ_a` as fine interior vectors.
    pub basis: Vec<Vec<f64>>,
    /// `a(b_b, b_a)`.
    pub gram: DMatrix<f64>,
    /// `(f, b_a)`.
    pub load: Vec<f64>,
    /// `a(b_b, λ_a)`.
    pub petrov_matrix: DMatrix<f64>,
    /// `(f, λ_a)`.
    pub petrov_load: Vec<f64>,
}

impl MultiscaleSpace {
    /// `fine_load` is the fine load vector `(f, μ_i)` on interior dofs.
    pub fn new(ctx: &LodContext, correctors: &CorrectorSet, fine_load: &[f64]) -> Result<Self> {
        if correctors.len() != ctx.num_coarse() {
            return Err(LodError::Shape { expected: ctx.num_coarse(), got: correctors.len() });
        }
        let h = ctx.hierarchy();
        let hats: Vec<Vec<f64>> = (0..ctx.num_coarse()).map(|a| h.coarse_hat(a)).collect();
        let basis: Vec<Vec<f64>> = hats
            .iter()
            .zip(&correctors.correctors)
            .map(|(hat, phi)| hat.iter().zip(phi).map(|(x, y)| x - y).collect())
            .collect();
        Self::from_basis(ctx, hats, basis, fine_load)
    }

    /// Plain coarse P1 space (no correction), used as the baseline.
    pub fn coarse_p1(ctx: &LodContext, fine_load: &[f64]) -> Result<Self> {
        let h = ctx.hierarchy();
        let hats: Vec<Vec<f64>> = (0..ctx.num_coarse()).map(|a| h.coarse_hat(a)).collect();
        let basis = hats.clone();
        Self::from_basis(ctx, hats, basis, fine_load)
    }

    fn from_basis(ctx: &LodContext, hats: Vec<Vec<f64>>, basis: Vec<Vec<f64>>, fine_load: &[f64]) -> Result<Self> {
        if fine_load.len() != ctx.num_fine() {
            return Err(LodError::Shape { expected: ctx.num_fine(), got: fine_load.len() });
        }
        let n = basis.len();
        let stiff_basis: Vec<Vec<f64>> = basis
            .par_iter()
            .map(|b| ctx.stiffness().matvec(b))
            .collect::<Result<_>>()?;
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|a| {
                let gram_row = (0..n).map(|b| if b >= a { dot(&basis[a], &stiff_basis[b]) } else { 0.0 }).collect();
                let petrov_row = (0..n).map(|b| dot(&hats[a], &stiff_basis[b])).collect();
                (gram_row, petrov_row)
            })
            .collect();
        let mut gram = DMatrix::zeros(n, n);
        let mut petrov_matrix = DMatrix::zeros(n, n);
        for (a, (g, p)) in rows.into_iter().enumerate() {
            for b in 0..n {
                if b >= a {
                    gram[(a, b)] = g[b];
                    gram[(b, a)] = g[b];
                }
                petrov_matrix[(a, b)] = p[b];
            }
        }
        let load = basis.iter().map(|b| dot(b, fine_load)).collect();
        let petrov_load = hats.iter().map(|l| dot(l, fine_load)).collect();
        Ok(MultiscaleSpace { basis, gram, load, petrov_matrix, petrov_load })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleSolution {
    /// Coefficients in the modified nodal basis.
    pub coefficients: Vec<f64>,
    /// `Σ_a c_a b_a` on fine interior dofs.
    pub fine: Vec<f64>,
}

pub fn solve_multiscale(space: &MultiscaleSpace, mode: SolveMode, tol: f64) -> Result<MultiscaleSolution> {
    let n = space.dim();
    let fine_len = space.basis.first().map_or(0, Vec::len);
    let (matrix, rhs) = match mode {
        SolveMode::Galerkin => (&space.gram, &space.load),
        SolveMode::PetrovGalerkin => (&space.petrov_matrix, &space.petrov_load),
    };
    let rhs_vec = DVector::from_column_slice(rhs);
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok(MultiscaleSolution { coefficients: vec![0.0; n], fine: vec![0.0; fine_len] });
    }
    let mut coeffs = match mode {
        SolveMode::Galerkin => matrix
            .clone()
            .cholesky()
            .ok_or_else(|| LodError::AssemblyIntegrity("multiscale Gram matrix is not positive definite".into()))?
            .solve(&rhs_vec),
        SolveMode::PetrovGalerkin => matrix
            .clone()
            .lu()
            .solve(&rhs_vec)
            .ok_or_else(|| LodError::AssemblyIntegrity("Petrov-Galerkin matrix is singular".into()))?,
    };
    // one step of refinement, then check the coarse residual
    let r = &rhs_vec - matrix * &coeffs;
    if let Some(dc) = matrix.clone().lu().solve(&r) {
        coeffs += dc;
    }
    let residual = (&rhs_vec - matrix * &coeffs).norm() / rhs_norm;
    if !(residual <= tol) {
        return Err(LodError::SolverFailure { residual, tol });
    }

    let mut fine = vec![0.0; fine_len];
    for (b, &c) in space.basis.iter().zip(coeffs.iter()) {
        fine.iter_mut().zip(b).for_each(|(u, x)| *u += c * x);
    }
    Ok(MultiscaleSolution { coefficients: coeffs.iter().copied().collect(), fine })
}
