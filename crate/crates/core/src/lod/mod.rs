//! Correctors, the multiscale space and the multiscale solve.
//!
//! A corrector `φ_a` is the `a(·,·)`-orthogonal projection of the coarse hat
//! `λ_a` onto the kernel of the quasi-interpolation. Subtracting it gives the
//! multiscale basis function `λ_a − φ_a`. Localized correctors solve the same
//! problem restricted to element patches, one patch per coarse element `K`
//! containing `a`, with the right-hand side taken from `K` alone.

mod corrector;
mod decay;
mod multiscale;

pub use corrector::{solve_global_corrector, solve_local_corrector, GlobalCorrectorSolver, PatchCorrectorSolver};
pub use decay::{fit_log_decay, measure_corrector_decay, nearest_coarse_node, DecayFit};
pub use multiscale::{solve_multiscale, MultiscaleSolution, MultiscaleSpace, SolveMode};

use rayon::prelude::*;

use crate::coefficient::CoefficientField;
use crate::error::{LodError, Result};
use crate::fem::assemble_stiffness;
use crate::interpolation::{build_interpolation, InterpolationOperator};
use crate::linalg::SparseMatrix;
use crate::mesh::MeshHierarchy;

/// Everything the corrector problems share: the fine coefficient stiffness
/// on interior dofs and the interpolation matrix.
#[derive(Debug, Clone)]
pub struct LodContext<'a> {
    hierarchy: &'a MeshHierarchy,
    coefficient: &'a CoefficientField,
    stiffness: SparseMatrix,
    interpolation: InterpolationOperator,
    tol: f64,
}

impl<'a> LodContext<'a> {
    pub fn new(hierarchy: &'a MeshHierarchy, coefficient: &'a CoefficientField, tol: f64) -> Result<Self> {
        let stiffness = assemble_stiffness(hierarchy.fine(), Some(coefficient))?;
        let interpolation = build_interpolation(hierarchy)?;
        Ok(LodContext { hierarchy, coefficient, stiffness, interpolation, tol })
    }

    /// Context with a caller-supplied interpolation operator.
    pub fn with_interpolation(
        hierarchy: &'a MeshHierarchy,
        coefficient: &'a CoefficientField,
        interpolation: InterpolationOperator,
        tol: f64,
    ) -> Result<Self> {
        let stiffness = assemble_stiffness(hierarchy.fine(), Some(coefficient))?;
        if interpolation.matrix().nrows() != hierarchy.coarse().num_interior()
            || interpolation.matrix().ncols() != hierarchy.fine().num_interior()
        {
            return Err(LodError::Shape { expected: hierarchy.fine().num_interior(), got: interpolation.matrix().ncols() });
        }
        Ok(LodContext { hierarchy, coefficient, stiffness, interpolation, tol })
    }

    pub fn hierarchy(&self) -> &'a MeshHierarchy {
        self.hierarchy
    }

    pub fn coefficient(&self) -> &'a CoefficientField {
        self.coefficient
    }

    /// Fine coefficient stiffness on interior dofs.
    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    pub fn interpolation(&self) -> &InterpolationOperator {
        &self.interpolation
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn num_coarse(&self) -> usize {
        self.hierarchy.coarse().num_interior()
    }

    pub fn num_fine(&self) -> usize {
        self.hierarchy.fine().num_interior()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectorMode {
    Global,
    /// Patch order `l`.
    Localized(usize),
}

/// One fine interior vector per coarse interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorSet {
    pub mode: CorrectorMode,
    pub correctors: Vec<Vec<f64>>,
}

impl CorrectorSet {
    pub fn len(&self) -> usize {
        self.correctors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.correctors.is_empty()
    }
}

/// Solves every corrector of the given mode.
///
/// Independent problems run in parallel; results are merged in coarse node
/// order, and localized components are summed in increasing element order,
/// so the output is bit-identical for any thread count.
pub fn assemble_corrector_set(ctx: &LodContext, mode: CorrectorMode) -> Result<CorrectorSet> {
    let correctors = match mode {
        CorrectorMode::Global => {
            let solver = GlobalCorrectorSolver::new(ctx)?;
            (0..ctx.num_coarse())
                .into_par_iter()
                .map(|a| solver.solve(ctx, a))
                .collect::<Result<Vec<_>>>()?
        }
        CorrectorMode::Localized(order) => {
            let coarse = ctx.hierarchy.coarse();
            let parts: Vec<Vec<(usize, Vec<usize>, Vec<f64>)>> = (0..coarse.num_triangles())
                .into_par_iter()
                .map(|k| -> Result<_> {
                    let nodes: Vec<usize> = coarse.triangles()[k]
                        .iter()
                        .filter_map(|&v| coarse.interior_index(v))
                        .collect();
                    if nodes.is_empty() {
                        return Ok(Vec::new());
                    }
                    let solver = PatchCorrectorSolver::new(ctx, k, order)?;
                    nodes
                        .into_iter()
                        .map(|a| {
                            let local = solver.solve_local(ctx, a)?;
                            Ok((a, solver.patch().fine_interior_dofs.clone(), local))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            let mut sums = vec![vec![0.0; ctx.num_fine()]; ctx.num_coarse()];
            for (a, dofs, values) in parts.into_iter().flatten() {
                for (&i, &v) in dofs.iter().zip(&values) {
                    sums[a][i] += v;
                }
            }
            sums
        }
    };
    Ok(CorrectorSet { mode, correctors })
}
