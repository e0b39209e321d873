//! P1 assembly on a [`TriMesh`], the fine reference solve and error norms.
//!
//! Matrices come in two flavours: `*_full` over every vertex (used when the
//! boundary rows matter, e.g. for integrals of hat functions touching the
//! boundary) and the interior-restricted versions that realize homogeneous
//! Dirichlet data by dof elimination.

use crate::coefficient::CoefficientField;
use crate::error::{LodError, Result};
use crate::linalg::{SparseMatrix, SpdSolver};
use crate::mesh::{MeshHierarchy, TriMesh};

/// Constant gradients of the three barycentric hats and the element area.
pub fn hat_gradients(tri: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let [p0, p1, p2] = tri;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let grads = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    (grads, 0.5 * det.abs())
}

/// `∫ ∇λ_i · ∇λ_j` over one element.
pub fn local_stiffness(tri: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let (g, area) = hat_gradients(tri);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    k
}

/// `∫ λ_i λ_j` over one element.
pub fn local_mass(tri: [[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let (_, area) = hat_gradients(tri);
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

fn check_coefficient(mesh: &TriMesh, coeff: Option<&CoefficientField>) -> Result<()> {
    match coeff {
        Some(c) if c.len() != mesh.num_triangles() => Err(LodError::Alignment(format!(
            "coefficient has {} values but the mesh has {} elements",
            c.len(),
            mesh.num_triangles()
        ))),
        _ => Ok(()),
    }
}

fn assemble_full<F>(mesh: &TriMesh, elements: impl Iterator<Item = usize>, local: F) -> Result<SparseMatrix>
where
    F: Fn(usize) -> [[f64; 3]; 3],
{
    let mut entries = Vec::new();
    for e in elements {
        let t = mesh.triangles()[e];
        let k = local(e);
        for i in 0..3 {
            for j in 0..3 {
                entries.push((t[i], t[j], k[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.num_vertices(), mesh.num_vertices(), entries)
}

/// Stiffness over all vertices; `None` means the unit coefficient.
pub fn assemble_full_stiffness(mesh: &TriMesh, coeff: Option<&CoefficientField>) -> Result<SparseMatrix> {
    check_coefficient(mesh, coeff)?;
    assemble_full(mesh, 0..mesh.num_triangles(), |e| {
        let a = coeff.map_or(1.0, |c| c.values()[e]);
        let mut k = local_stiffness(mesh.triangle_coords(e));
        k.iter_mut().flatten().for_each(|x| *x *= a);
        k
    })
}

/// Stiffness contributions of the listed elements only.
pub fn assemble_stiffness_on(
    mesh: &TriMesh,
    coeff: Option<&CoefficientField>,
    elements: &[usize],
) -> Result<SparseMatrix> {
    check_coefficient(mesh, coeff)?;
    assemble_full(mesh, elements.iter().copied(), |e| {
        let a = coeff.map_or(1.0, |c| c.values()[e]);
        let mut k = local_stiffness(mesh.triangle_coords(e));
        k.iter_mut().flatten().for_each(|x| *x *= a);
        k
    })
}

pub fn assemble_full_mass(mesh: &TriMesh) -> Result<SparseMatrix> {
    assemble_full(mesh, 0..mesh.num_triangles(), |e| local_mass(mesh.triangle_coords(e)))
}

/// Interior-dof block of a full vertex matrix.
pub fn restrict_to_interior(mesh: &TriMesh, full: &SparseMatrix) -> Result<SparseMatrix> {
    full.extract_submatrix(mesh.interior_vertices(), mesh.interior_vertices())
}

/// Stiffness on interior dofs (homogeneous Dirichlet by elimination).
pub fn assemble_stiffness(mesh: &TriMesh, coeff: Option<&CoefficientField>) -> Result<SparseMatrix> {
    restrict_to_interior(mesh, &assemble_full_stiffness(mesh, coeff)?)
}

pub fn assemble_mass(mesh: &TriMesh) -> Result<SparseMatrix> {
    restrict_to_interior(mesh, &assemble_full_mass(mesh)?)
}

/// `∫ f λ_i` for every vertex with the edge-midpoint rule (exact for
/// quadratic integrands).
pub fn assemble_full_load(mesh: &TriMesh, f: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_vertices()];
    for (e, t) in mesh.triangles().iter().enumerate() {
        let [p0, p1, p2] = mesh.triangle_coords(e);
        let area = mesh.area(e);
        let mid = |a: [f64; 2], b: [f64; 2]| f(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
        // midpoints opposite to vertex 0, 1, 2
        let m = [mid(p1, p2), mid(p2, p0), mid(p0, p1)];
        for i in 0..3 {
            // λ_i is 1/2 at the two midpoints adjacent to vertex i, 0 opposite
            let adjacent: f64 = (0..3).filter(|&k| k != i).map(|k| m[k]).sum();
            load[t[i]] += area / 3.0 * 0.5 * adjacent;
        }
    }
    load
}

pub fn assemble_load(mesh: &TriMesh, f: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    mesh.restrict(&assemble_full_load(mesh, f))
}

/// Interior operators of one mesh level.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    /// `a(·,·)` with the coefficient.
    pub stiffness_coeff: SparseMatrix,
    /// Unit-coefficient stiffness.
    pub stiffness_plain: SparseMatrix,
    pub mass: SparseMatrix,
    pub load: Vec<f64>,
    /// Interior dof → vertex id.
    pub dof_map: Vec<usize>,
}

impl AssembledOperators {
    pub fn new(mesh: &TriMesh, coeff: &CoefficientField, f: &dyn Fn(f64, f64) -> f64) -> Result<Self> {
        Ok(AssembledOperators {
            stiffness_coeff: assemble_stiffness(mesh, Some(coeff))?,
            stiffness_plain: assemble_stiffness(mesh, None)?,
            mass: assemble_mass(mesh)?,
            load: assemble_load(mesh, f),
            dof_map: mesh.interior_vertices().to_vec(),
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.dof_map.len()
    }
}

/// Fine-mesh Galerkin solution with homogeneous Dirichlet data.
pub fn solve_reference(
    h: &MeshHierarchy,
    coeff: &CoefficientField,
    f: &dyn Fn(f64, f64) -> f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let fine = h.fine();
    let stiffness = assemble_stiffness(fine, Some(coeff))?;
    let load = assemble_load(fine, f);
    SpdSolver::new(stiffness)?.solve(&load, tol)
}

/// L², full H¹ and energy norms of a difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub energy: f64,
}

pub fn error_norms(u: &[f64], v: &[f64], ops: &AssembledOperators) -> Result<ErrorNorms> {
    if u.len() != v.len() || u.len() != ops.num_dofs() {
        return Err(LodError::Shape { expected: ops.num_dofs(), got: if u.len() != ops.num_dofs() { u.len() } else { v.len() } });
    }
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let l2sq = ops.mass.bilinear(&d, &d)?.max(0.0);
    let semi = ops.stiffness_plain.bilinear(&d, &d)?.max(0.0);
    let energy = ops.stiffness_coeff.bilinear(&d, &d)?.max(0.0);
    Ok(ErrorNorms { l2: l2sq.sqrt(), h1: (l2sq + semi).sqrt(), energy: energy.sqrt() })
}

/// Degree-5 seven-point rule on the reference triangle: barycentric points
/// and weights summing to one.
fn seven_point_rule() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let (p1, w1) = ((6.0 - s) / 21.0, (155.0 - s) / 1200.0);
    let (p2, w2) = ((6.0 + s) / 21.0, (155.0 + s) / 1200.0);
    let q1 = 1.0 - 2.0 * p1;
    let q2 = 1.0 - 2.0 * p2;
    [
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([p1, p1, q1], w1),
        ([p1, q1, p1], w1),
        ([q1, p1, p1], w1),
        ([p2, p2, q2], w2),
        ([p2, q2, p2], w2),
        ([q2, p2, p2], w2),
    ]
}

/// L² and full H¹ error of a discrete interior solution against an exact
/// solution, integrated with a degree-5 rule per element.
pub fn exact_errors(
    mesh: &TriMesh,
    uh: &[f64],
    exact: &dyn Fn(f64, f64) -> f64,
    exact_grad: &dyn Fn(f64, f64) -> [f64; 2],
) -> Result<(f64, f64)> {
    if uh.len() != mesh.num_interior() {
        return Err(LodError::Shape { expected: mesh.num_interior(), got: uh.len() });
    }
    let full = mesh.extend(uh);
    let rule = seven_point_rule();
    let (mut l2, mut semi) = (0.0, 0.0);
    for (e, t) in mesh.triangles().iter().enumerate() {
        let tri = mesh.triangle_coords(e);
        let (g, area) = hat_gradients(tri);
        let vals = [full[t[0]], full[t[1]], full[t[2]]];
        let grad_h = [
            vals[0] * g[0][0] + vals[1] * g[1][0] + vals[2] * g[2][0],
            vals[0] * g[0][1] + vals[1] * g[1][1] + vals[2] * g[2][1],
        ];
        for (b, w) in rule {
            let x = b[0] * tri[0][0] + b[1] * tri[1][0] + b[2] * tri[2][0];
            let y = b[0] * tri[0][1] + b[1] * tri[1][1] + b[2] * tri[2][1];
            let uh_q = b[0] * vals[0] + b[1] * vals[1] + b[2] * vals[2];
            let ge = exact_grad(x, y);
            l2 += w * area * (exact(x, y) - uh_q).powi(2);
            semi += w * area * ((ge[0] - grad_h[0]).powi(2) + (ge[1] - grad_h[1]).powi(2));
        }
    }
    Ok((l2.sqrt(), (l2 + semi).sqrt()))
}
