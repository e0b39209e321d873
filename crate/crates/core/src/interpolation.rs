//! The H¹-weighted quasi-interpolation onto the coarse P1 space.
//!
//! For a coarse interior node `a` with hat `λ_a` and coarse mesh size `H`,
//!
//! ```text
//!            ∫ v λ_a  +  H² Σ_K ∫_K ∇v · ∇λ_a
//!   ṽ(a) = ----------------------------------- ,   J v = Σ_a ṽ(a) λ_a .
//!            ∫ λ_a    +  H² Σ_K ∫_K |∇λ_a|
//! ```
//!
//! Only fine elements inside the node star contribute, so row `a` of the
//! matrix is supported on fine dofs in `ω_a`. The kernel of this matrix is
//! the fine-scale space the correctors live in.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LodError, Result};
use crate::fem::{hat_gradients, local_mass, local_stiffness};
use crate::linalg::SparseMatrix;
use crate::mesh::{barycentric, grow_once, MeshHierarchy};

#[derive(Debug, Clone)]
pub struct InterpolationOperator {
    /// Coarse interior nodes × fine interior dofs.
    matrix: SparseMatrix,
    /// Coarse interior nodes × all fine vertices, before boundary elimination.
    full: SparseMatrix,
    denominators: Vec<f64>,
    coarse_size: f64,
}

impl InterpolationOperator {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Rows over every fine vertex, boundary included.
    pub fn full_matrix(&self) -> &SparseMatrix {
        &self.full
    }

    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    /// The `H` in the `H²` weighting.
    pub fn coarse_size(&self) -> f64 {
        self.coarse_size
    }

    /// Nodal values `ṽ(a)` of a fine interior vector.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.matrix.matvec(v)
    }

    /// Nodal values for a vector over all fine vertices.
    pub fn apply_full(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.full.matvec(v)
    }

    /// `J v` as a fine interior vector.
    pub fn apply_fine(&self, h: &MeshHierarchy, v: &[f64]) -> Result<Vec<f64>> {
        h.prolongate(&self.apply(v)?)
    }
}

pub fn build_interpolation(h: &MeshHierarchy) -> Result<InterpolationOperator> {
    build_interpolation_scaled(h, h.coarse().mesh_size())
}

/// Same operator with an explicit length `size` in the gradient weight `size²`.
pub fn build_interpolation_scaled(h: &MeshHierarchy, size: f64) -> Result<InterpolationOperator> {
    if !(size >= 0.0 && size.is_finite()) {
        return Err(LodError::InvalidArgument(format!("interpolation length scale {size} must be finite and >= 0")));
    }
    let coarse = h.coarse();
    let fine = h.fine();
    let weight = size * size;

    let mut full_entries = Vec::new();
    let mut denominators = Vec::with_capacity(coarse.num_interior());
    for (row, &a) in coarse.interior_vertices().iter().enumerate() {
        let mut numer: BTreeMap<usize, f64> = BTreeMap::new();
        let mut denom = 0.0;
        for &k in coarse.node_star(a)? {
            let tri_k = coarse.triangle_coords(k);
            let pos = coarse.triangles()[k].iter().position(|&b| b == a).expect("a is a vertex of its star");
            for &e in h.children(k) {
                let t = fine.triangles()[e];
                let tri = fine.triangle_coords(e);
                let hat: [f64; 3] = std::array::from_fn(|i| barycentric(tri_k, tri[i])[pos]);
                let mass = local_mass(tri);
                let stiff = local_stiffness(tri);
                for i in 0..3 {
                    let c: f64 = (0..3).map(|j| hat[j] * (mass[j][i] + weight * stiff[j][i])).sum();
                    *numer.entry(t[i]).or_default() += c;
                }
                let (g, area) = hat_gradients(tri);
                let grad = [
                    hat[0] * g[0][0] + hat[1] * g[1][0] + hat[2] * g[2][0],
                    hat[0] * g[0][1] + hat[1] * g[1][1] + hat[2] * g[2][1],
                ];
                let integral_hat = area * (hat[0] + hat[1] + hat[2]) / 3.0;
                denom += integral_hat + weight * area * grad[0].hypot(grad[1]);
            }
        }
        for (v, c) in numer {
            full_entries.push((row, v, c / denom));
        }
        denominators.push(denom);
    }
    let full = SparseMatrix::from_triplets(coarse.num_interior(), fine.num_vertices(), full_entries)?;
    let rows: Vec<usize> = (0..coarse.num_interior()).collect();
    let matrix = full.extract_submatrix(&rows, fine.interior_vertices())?;
    Ok(InterpolationOperator { matrix, full, denominators, coarse_size: size })
}

/// Largest measured ratios over all coarse elements and trial functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationConstants {
    /// `max ‖J v‖_{L²(K)} / ‖v‖_{H¹(ω_K)}`.
    pub stability: f64,
    /// `max ‖v − J v‖_{L²(K)} / (H ‖v‖_{H¹(ω_K)})`.
    pub approximation: f64,
}

/// Per-fine-element squared L² norms and squared gradient norms.
fn element_norms(h: &MeshHierarchy, v_full: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let fine = h.fine();
    let mut l2 = Vec::with_capacity(fine.num_triangles());
    let mut grad = Vec::with_capacity(fine.num_triangles());
    for (e, t) in fine.triangles().iter().enumerate() {
        let tri = fine.triangle_coords(e);
        let vals = [v_full[t[0]], v_full[t[1]], v_full[t[2]]];
        let (m, s) = (local_mass(tri), local_stiffness(tri));
        let quad = |k: &[[f64; 3]; 3]| -> f64 {
            (0..3).map(|i| (0..3).map(|j| vals[i] * k[i][j] * vals[j]).sum::<f64>()).sum()
        };
        l2.push(quad(&m).max(0.0));
        grad.push(quad(&s).max(0.0));
    }
    (l2, grad)
}

/// Random test functions for [`measure_constants`]: even trials are smooth
/// sine series, odd trials are nodal white noise.
pub fn random_trial_function(h: &MeshHierarchy, trial: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let fine = h.fine();
    if trial % 2 == 0 {
        let coeffs: Vec<(f64, f64, f64)> = (1..=3)
            .flat_map(|k| (1..=3).map(move |l| (k as f64, l as f64)))
            .map(|(k, l)| (k, l, rng.random_range(-1.0..1.0)))
            .collect();
        fine.interpolate(|x, y| {
            coeffs
                .iter()
                .map(|&(k, l, c)| c * (k * std::f64::consts::PI * x).sin() * (l * std::f64::consts::PI * y).sin())
                .sum()
        })
    } else {
        (0..fine.num_interior()).map(|_| rng.random_range(-1.0..1.0)).collect()
    }
}

/// Measures the local stability and approximation ratios of `op` over
/// `trials` random fine functions (`seed` fixes the draw).
pub fn measure_constants(
    h: &MeshHierarchy,
    op: &InterpolationOperator,
    trials: usize,
    seed: u64,
) -> Result<InterpolationConstants> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let functions: Vec<Vec<f64>> = (0..trials.max(1)).map(|t| random_trial_function(h, t, &mut rng)).collect();
    measure_ratios(h, op, &functions)
}

/// Ratios for explicit fine interior vectors. Elements whose neighborhood
/// norm vanishes are skipped.
pub fn measure_ratios(
    h: &MeshHierarchy,
    op: &InterpolationOperator,
    functions: &[Vec<f64>],
) -> Result<InterpolationConstants> {
    let coarse = h.coarse();
    let neighborhoods: Vec<Vec<usize>> = (0..coarse.num_triangles())
        .map(|k| {
            let mut inside = vec![false; coarse.num_triangles()];
            inside[k] = true;
            grow_once(coarse, &mut inside);
            (0..inside.len()).filter(|&e| inside[e]).collect()
        })
        .collect();

    let mut out = InterpolationConstants { stability: 0.0, approximation: 0.0 };
    for v in functions {
        let jv = op.apply_fine(h, v)?;
        let diff: Vec<f64> = v.iter().zip(&jv).map(|(a, b)| a - b).collect();
        let (v_l2, v_grad) = element_norms(h, &h.fine().extend(v));
        let (jv_l2, _) = element_norms(h, &h.fine().extend(&jv));
        let (d_l2, _) = element_norms(h, &h.fine().extend(&diff));
        for (k, patch) in neighborhoods.iter().enumerate() {
            let v_h1: f64 = patch
                .iter()
                .flat_map(|&q| h.children(q))
                .map(|&e| v_l2[e] + v_grad[e])
                .sum::<f64>()
                .sqrt();
            if v_h1 == 0.0 {
                continue;
            }
            let jv_k: f64 = h.children(k).iter().map(|&e| jv_l2[e]).sum::<f64>().sqrt();
            let d_k: f64 = h.children(k).iter().map(|&e| d_l2[e]).sum::<f64>().sqrt();
            out.stability = out.stability.max(jv_k / v_h1);
            out.approximation = out.approximation.max(d_k / (op.coarse_size() * v_h1));
        }
    }
    Ok(out)
}

/// `max_K ‖v − J v‖_{L²(K)}` for a fine interior vector.
pub fn max_local_approximation_error(h: &MeshHierarchy, op: &InterpolationOperator, v: &[f64]) -> Result<f64> {
    let jv = op.apply_fine(h, v)?;
    let diff: Vec<f64> = v.iter().zip(&jv).map(|(a, b)| a - b).collect();
    let (d_l2, _) = element_norms(h, &h.fine().extend(&diff));
    Ok((0..h.coarse().num_triangles())
        .map(|k| h.children(k).iter().map(|&e| d_l2[e]).sum::<f64>().sqrt())
        .fold(0.0, f64::max))
}
