use super::LodContext;
use crate::error::{LodError, Result};
use crate::fem::local_stiffness;
use crate::linalg::SaddleSolver;
use crate::mesh::{element_patch, Patch};

fn with_node(node: usize) -> impl FnOnce(LodError) -> LodError {
    move |e| LodError::Corrector { node, source: Box::new(e) }
}

fn check_node(ctx: &LodContext, a: usize) -> Result<()> {
    if a >= ctx.num_coarse() {
        return Err(LodError::Index { what: "coarse node", index: a, len: ctx.num_coarse() });
    }
    Ok(())
}

/// Global corrector problems: one factorization of the constrained fine
/// system shared by every coarse node.
#[derive(Debug, Clone)]
pub struct GlobalCorrectorSolver {
    saddle: SaddleSolver,
}

impl GlobalCorrectorSolver {
    pub fn new(ctx: &LodContext) -> Result<Self> {
        let saddle = SaddleSolver::new(ctx.stiffness().clone(), ctx.interpolation().matrix().clone())?;
        Ok(GlobalCorrectorSolver { saddle })
    }

    /// `φ_a ∈ ker J` with `a(φ_a, w) = a(λ_a, w)` for all `w ∈ ker J`.
    pub fn solve(&self, ctx: &LodContext, a: usize) -> Result<Vec<f64>> {
        check_node(ctx, a)?;
        let hat = ctx.hierarchy().coarse_hat(a);
        let rhs = ctx.stiffness().matvec(&hat)?;
        let (phi, _) = self.saddle.solve(&rhs, ctx.tol()).map_err(with_node(a))?;
        Ok(phi)
    }
}

/// Single global corrector; builds the shared factorization each call.
pub fn solve_global_corrector(ctx: &LodContext, a: usize) -> Result<Vec<f64>> {
    GlobalCorrectorSolver::new(ctx)?.solve(ctx, a)
}

/// Patch problem around one coarse element, shared by the (at most three)
/// coarse nodes of that element.
#[derive(Debug, Clone)]
pub struct PatchCorrectorSolver {
    patch: Patch,
    saddle: SaddleSolver,
    /// Fine interior dof → position in the patch, `usize::MAX` outside.
    local_index: Vec<usize>,
}

impl PatchCorrectorSolver {
    pub fn new(ctx: &LodContext, k: usize, order: usize) -> Result<Self> {
        let patch = element_patch(ctx.hierarchy(), k, order)?;
        if patch.fine_interior_dofs.is_empty() {
            return Err(LodError::DegeneratePatch(k));
        }
        let a = ctx.stiffness().extract_submatrix(&patch.fine_interior_dofs, &patch.fine_interior_dofs)?;
        let c = ctx
            .interpolation()
            .matrix()
            .extract_submatrix(&patch.active_coarse_nodes, &patch.fine_interior_dofs)?;
        let saddle = SaddleSolver::new(a, c)?;
        let mut local_index = vec![usize::MAX; ctx.num_fine()];
        for (p, &i) in patch.fine_interior_dofs.iter().enumerate() {
            local_index[i] = p;
        }
        Ok(PatchCorrectorSolver { patch, saddle, local_index })
    }

    pub fn patch(&self) -> &Patch {
        &self.patch
    }

    /// `a_K(λ_a, w)` for every patch dof `w`: only fine children of the seed
    /// element contribute.
    fn element_rhs(&self, ctx: &LodContext, a: usize) -> Vec<f64> {
        let h = ctx.hierarchy();
        let fine = h.fine();
        let hat = fine.extend(&h.coarse_hat(a));
        let coeff = ctx.coefficient().values();
        let mut rhs = vec![0.0; self.patch.fine_interior_dofs.len()];
        for &e in h.children(self.patch.seed_element) {
            let t = fine.triangles()[e];
            let k = local_stiffness(fine.triangle_coords(e));
            for i in 0..3 {
                let Some(dof) = fine.interior_index(t[i]) else { continue };
                let p = self.local_index[dof];
                if p == usize::MAX {
                    continue;
                }
                rhs[p] += coeff[e] * (0..3).map(|j| k[i][j] * hat[t[j]]).sum::<f64>();
            }
        }
        rhs
    }

    /// `φ_{a,l,K}` in patch-local numbering.
    pub fn solve_local(&self, ctx: &LodContext, a: usize) -> Result<Vec<f64>> {
        check_node(ctx, a)?;
        let seed = self.patch.seed_element;
        let coarse = ctx.hierarchy().coarse();
        let vertex = coarse.interior_vertices()[a];
        if !coarse.triangles()[seed].contains(&vertex) {
            return Err(LodError::InvalidArgument(format!(
                "coarse node {a} is not a vertex of element {seed}"
            )));
        }
        let rhs = self.element_rhs(ctx, a);
        let (x, _) = self.saddle.solve(&rhs, ctx.tol()).map_err(with_node(a))?;
        Ok(x)
    }

    /// `φ_{a,l,K}` embedded in the fine interior space, zero outside the patch.
    pub fn solve(&self, ctx: &LodContext, a: usize) -> Result<Vec<f64>> {
        let local = self.solve_local(ctx, a)?;
        let mut out = vec![0.0; ctx.num_fine()];
        for (&i, &v) in self.patch.fine_interior_dofs.iter().zip(&local) {
            out[i] = v;
        }
        Ok(out)
    }
}

/// `φ_{a,l,K}` for one coarse node `a` of coarse element `k`.
pub fn solve_local_corrector(ctx: &LodContext, a: usize, k: usize, order: usize) -> Result<Vec<f64>> {
    PatchCorrectorSolver::new(ctx, k, order)?.solve(ctx, a)
}
