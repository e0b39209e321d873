use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::trimesh::TriMesh;
use crate::error::{LodError, Result};
use crate::linalg::SparseMatrix;

/// Coarse mesh, its red-refined fine mesh and the maps between them.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    coarse: TriMesh,
    fine: TriMesh,
    levels: usize,
    children: Vec<Vec<usize>>,
    parent: Vec<usize>,
    vertex_embed: Vec<usize>,
    prolongation: SparseMatrix,
}

impl MeshHierarchy {
    pub fn coarse(&self) -> &TriMesh {
        &self.coarse
    }

    pub fn fine(&self) -> &TriMesh {
        &self.fine
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Fine elements tiling coarse element `k`.
    pub fn children(&self, k: usize) -> &[usize] {
        &self.children[k]
    }

    /// Coarse element containing fine element `e`.
    pub fn parent(&self, e: usize) -> usize {
        self.parent[e]
    }

    /// Fine vertex id of coarse vertex `a`.
    pub fn vertex_embed(&self, a: usize) -> usize {
        self.vertex_embed[a]
    }

    /// Fine interior dofs × coarse interior dofs; column `j` is the coarse hat
    /// of coarse dof `j` written in the fine P1 basis.
    pub fn prolongation(&self) -> &SparseMatrix {
        &self.prolongation
    }

    /// Coarse interior vector to fine interior vector.
    pub fn prolongate(&self, coarse: &[f64]) -> Result<Vec<f64>> {
        self.prolongation.matvec(coarse)
    }

    /// Full coarse vertex vector to full fine vertex vector (no boundary
    /// elimination).
    pub fn prolongate_full(&self, coarse: &[f64]) -> Result<Vec<f64>> {
        if coarse.len() != self.coarse.num_vertices() {
            return Err(LodError::Shape { expected: self.coarse.num_vertices(), got: coarse.len() });
        }
        let mut fine = vec![0.0; self.fine.num_vertices()];
        for (k, kids) in self.children.iter().enumerate() {
            let tri = self.coarse.triangle_coords(k);
            let ids = self.coarse.triangles()[k];
            for &e in kids {
                for &v in &self.fine.triangles()[e] {
                    let l = barycentric(tri, self.fine.vertices()[v]);
                    fine[v] = l[0] * coarse[ids[0]] + l[1] * coarse[ids[1]] + l[2] * coarse[ids[2]];
                }
            }
        }
        Ok(fine)
    }

    /// Fine interior representation of the coarse hat of coarse dof `j`.
    pub fn coarse_hat(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.coarse.num_interior()];
        e[j] = 1.0;
        self.prolongation.matvec(&e).expect("prolongation shape")
    }

    /// Coarse grid spacing `1/n` for structured hierarchies, otherwise the
    /// coarse mesh size.
    pub fn coarse_spacing(&self) -> f64 {
        self.coarse
            .resolution()
            .map_or(self.coarse.mesh_size(), |n| 1.0 / n as f64)
    }
}

/// Barycentric coordinates of `p` in triangle `t`.
pub fn barycentric(t: [[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = t;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

struct RawMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    parent: Vec<usize>,
}

fn red_refine(vertices: &[[f64; 2]], triangles: &[[usize; 3]]) -> RawMesh {
    let mut vertices = vertices.to_vec();
    let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| {
        *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * triangles.len());
    let mut parent = Vec::with_capacity(4 * triangles.len());
    for (k, &[a, b, c]) in triangles.iter().enumerate() {
        let mab = midpoint(a, b, &mut vertices);
        let mbc = midpoint(b, c, &mut vertices);
        let mca = midpoint(c, a, &mut vertices);
        out.extend([[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]]);
        parent.extend([k; 4]);
    }
    RawMesh { vertices, triangles: out, parent }
}

/// Applies `levels` uniform red (1:4) refinements to `coarse`.
///
/// Fine vertices are renumbered lexicographically by `(y, x)`, which keeps
/// the fine stiffness banded for structured meshes.
pub fn refine_hierarchy(coarse: &TriMesh, levels: usize) -> Result<MeshHierarchy> {
    if levels == 0 {
        return Err(LodError::InvalidLevel(levels));
    }
    let mut raw = RawMesh {
        vertices: coarse.vertices().to_vec(),
        triangles: coarse.triangles().to_vec(),
        parent: (0..coarse.num_triangles()).collect(),
    };
    for _ in 0..levels {
        let next = red_refine(&raw.vertices, &raw.triangles);
        let parent = next.parent.iter().map(|&p| raw.parent[p]).collect();
        raw = RawMesh { parent, ..next };
    }

    let mut order: Vec<usize> = (0..raw.vertices.len()).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (raw.vertices[i], raw.vertices[j]);
        p[1].partial_cmp(&q[1])
            .unwrap_or(Ordering::Equal)
            .then(p[0].partial_cmp(&q[0]).unwrap_or(Ordering::Equal))
    });
    let mut new_id = vec![0usize; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new;
    }
    let vertices = order.iter().map(|&old| raw.vertices[old]).collect();
    let triangles = raw
        .triangles
        .iter()
        .map(|t| [new_id[t[0]], new_id[t[1]], new_id[t[2]]])
        .collect();
    let fine = TriMesh::from_parts(vertices, triangles, coarse.resolution().map(|n| n << levels))?;

    let mut children = vec![Vec::new(); coarse.num_triangles()];
    for (e, &k) in raw.parent.iter().enumerate() {
        children[k].push(e);
    }
    let vertex_embed: Vec<usize> = (0..coarse.num_vertices()).map(|a| new_id[a]).collect();
    let prolongation = build_prolongation(coarse, &fine, &children)?;

    Ok(MeshHierarchy {
        coarse: coarse.clone(),
        fine,
        levels,
        children,
        parent: raw.parent,
        vertex_embed,
        prolongation,
    })
}

fn build_prolongation(coarse: &TriMesh, fine: &TriMesh, children: &[Vec<usize>]) -> Result<SparseMatrix> {
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (k, kids) in children.iter().enumerate() {
        let tri = coarse.triangle_coords(k);
        let coarse_vertices = coarse.triangles()[k];
        for &e in kids {
            for &v in &fine.triangles()[e] {
                let Some(row) = fine.interior_index(v) else { continue };
                let lambda = barycentric(tri, fine.vertices()[v]);
                for (&a, &value) in coarse_vertices.iter().zip(&lambda) {
                    let Some(col) = coarse.interior_index(a) else { continue };
                    if value.abs() > 1e-14 {
                        entries.entry((row, col)).or_insert(value);
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(
        fine.num_interior(),
        coarse.num_interior(),
        entries.into_iter().map(|((r, c), v)| (r, c, v)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_mesh;

    #[test]
    fn one_level_counts() {
        let h = refine_hierarchy(&build_uniform_mesh(2).unwrap(), 1).unwrap();
        assert_eq!(h.fine().num_vertices(), 25);
        assert_eq!(h.fine().num_triangles(), 32);
        assert!((0..8).all(|k| h.children(k).len() == 4));
    }

    #[test]
    fn zero_levels_rejected() {
        assert!(matches!(
            refine_hierarchy(&build_uniform_mesh(2).unwrap(), 0),
            Err(LodError::InvalidLevel(0))
        ));
    }

    #[test]
    fn matches_direct_uniform_mesh() {
        let h = refine_hierarchy(&build_uniform_mesh(2).unwrap(), 2).unwrap();
        let direct = build_uniform_mesh(8).unwrap();
        assert_eq!(h.fine().vertices(), direct.vertices());
        let mut a: Vec<[usize; 3]> = h.fine().triangles().iter().map(|t| sorted(*t)).collect();
        let mut b: Vec<[usize; 3]> = direct.triangles().iter().map(|t| sorted(*t)).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(h.fine().resolution(), Some(8));
        assert!((h.fine().mesh_size() - h.coarse().mesh_size() / 4.0).abs() < 1e-15);
    }

    fn sorted(mut t: [usize; 3]) -> [usize; 3] {
        t.sort();
        t
    }

    #[test]
    fn paper_scale_mesh_width() {
        let h = refine_hierarchy(&build_uniform_mesh(8).unwrap(), 5).unwrap();
        assert_eq!(h.fine().resolution(), Some(256));
        assert!((h.fine().mesh_size() - 2f64.sqrt() / 256.0).abs() < 1e-15);
    }

    #[test]
    fn children_tile_parents() {
        let h = refine_hierarchy(&build_uniform_mesh(3).unwrap(), 2).unwrap();
        for k in 0..h.coarse().num_triangles() {
            let sum: f64 = h.children(k).iter().map(|&e| h.fine().area(e)).sum();
            assert!((sum - h.coarse().area(k)).abs() <= 1e-12 * h.coarse().area(k));
            assert!(h.children(k).iter().all(|&e| h.parent(e) == k));
        }
    }

    #[test]
    fn center_hat_prolongation() {
        let h = refine_hierarchy(&build_uniform_mesh(2).unwrap(), 1).unwrap();
        let hat = h.fine().extend(&h.coarse_hat(0));
        // analytic hat of the center node (0.5, 0.5) on the coarse n=2 mesh
        let coarse = h.coarse();
        for (v, p) in h.fine().vertices().iter().enumerate() {
            let expect = coarse
                .node_star(4)
                .unwrap()
                .iter()
                .filter_map(|&k| {
                    let l = barycentric(coarse.triangle_coords(k), *p);
                    let inside = l.iter().all(|&x| x >= -1e-12);
                    let pos = coarse.triangles()[k].iter().position(|&a| a == 4).unwrap();
                    inside.then_some(l[pos])
                })
                .fold(0.0, f64::max);
            assert!((hat[v] - expect).abs() < 1e-14, "vertex {v}");
        }
        assert_eq!(hat[h.vertex_embed(4)], 1.0);
        assert_eq!(hat.iter().filter(|&&x| x == 0.5).count(), 6);
    }

    #[test]
    fn hats_vanish_at_other_coarse_vertices() {
        let h = refine_hierarchy(&build_uniform_mesh(4).unwrap(), 1).unwrap();
        for (j, &a) in h.coarse().interior_vertices().iter().enumerate() {
            let hat = h.fine().extend(&h.coarse_hat(j));
            for b in 0..h.coarse().num_vertices() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_eq!(hat[h.vertex_embed(b)], expect);
            }
        }
    }

    #[test]
    fn prolongation_reproduces_linears() {
        let h = refine_hierarchy(&build_uniform_mesh(4).unwrap(), 2).unwrap();
        let f = |p: [f64; 2]| 0.3 + 2.0 * p[0] - 1.5 * p[1];
        let coarse: Vec<f64> = h.coarse().vertices().iter().map(|&p| f(p)).collect();
        let fine = h.prolongate_full(&coarse).unwrap();
        for (v, &p) in h.fine().vertices().iter().enumerate() {
            assert!((fine[v] - f(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_and_interior_prolongation_agree() {
        let h = refine_hierarchy(&build_uniform_mesh(4).unwrap(), 1).unwrap();
        let coarse: Vec<f64> = (0..h.coarse().num_interior()).map(|j| (j as f64).sin()).collect();
        let a = h.fine().extend(&h.prolongate(&coarse).unwrap());
        let b = h.prolongate_full(&h.coarse().extend(&coarse)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
