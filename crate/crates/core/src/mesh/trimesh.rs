use std::io::Write;

use crate::error::{LodError, Result};

const BOUNDARY_EPS: f64 = 1e-14;

/// A conforming triangulation of the unit square with P1 dof bookkeeping.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
    vertex_stars: Vec<Vec<usize>>,
    mesh_size: f64,
    resolution: Option<usize>,
}

impl TriMesh {
    /// Assembles a mesh from raw arrays, orienting every triangle
    /// counter-clockwise and deriving boundary flags and adjacency.
    pub fn from_parts(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>, resolution: Option<usize>) -> Result<Self> {
        let nv = vertices.len();
        for t in &mut triangles {
            for &v in t.iter() {
                if v >= nv {
                    return Err(LodError::Index { what: "vertex", index: v, len: nv });
                }
            }
            if signed_area(&vertices, *t) < 0.0 {
                t.swap(1, 2);
            }
        }
        let boundary: Vec<bool> = vertices
            .iter()
            .map(|p| p.iter().any(|&c| c.abs() <= BOUNDARY_EPS || (c - 1.0).abs() <= BOUNDARY_EPS))
            .collect();
        let mut interior_index = vec![None; nv];
        let mut interior_vertices = Vec::new();
        for (v, &b) in boundary.iter().enumerate() {
            if !b {
                interior_index[v] = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }
        let mut vertex_stars = vec![Vec::new(); nv];
        for (e, t) in triangles.iter().enumerate() {
            for &v in t {
                vertex_stars[v].push(e);
            }
        }
        let mesh_size = triangles
            .iter()
            .map(|&t| diameter(&vertices, t))
            .fold(0.0, f64::max);
        Ok(TriMesh {
            vertices,
            triangles,
            boundary,
            interior_index,
            interior_vertices,
            vertex_stars,
            mesh_size,
            resolution,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Interior dof index of vertex `v`, `None` on the boundary.
    pub fn interior_index(&self, v: usize) -> Option<usize> {
        self.interior_index[v]
    }

    /// Vertex ids of the interior dofs, in dof order.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    pub fn num_interior(&self) -> usize {
        self.interior_vertices.len()
    }

    /// Maximum element diameter.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    /// Cells per side for meshes of the structured family.
    pub fn resolution(&self) -> Option<usize> {
        self.resolution
    }

    pub fn triangle_coords(&self, e: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[e];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn area(&self, e: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[e])
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let [p, q, r] = self.triangle_coords(e);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Elements having `a` as a vertex (the support of the hat at `a`).
    pub fn node_star(&self, a: usize) -> Result<&[usize]> {
        self.vertex_stars
            .get(a)
            .map(Vec::as_slice)
            .ok_or(LodError::Index { what: "vertex", index: a, len: self.vertices.len() })
    }

    /// Restricts a full vertex vector to interior dofs.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior_vertices.iter().map(|&v| full[v]).collect()
    }

    /// Extends an interior dof vector by zeros on the boundary.
    pub fn extend(&self, interior: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.vertices.len()];
        for (&v, &x) in self.interior_vertices.iter().zip(interior) {
            full[v] = x;
        }
        full
    }

    /// Nodal interpolant of `f` on the interior dofs.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.interior_vertices
            .iter()
            .map(|&v| f(self.vertices[v][0], self.vertices[v][1]))
            .collect()
    }

    /// Plain-text dump: `x y boundary_flag` per vertex, then `v0 v1 v2` per
    /// triangle.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (p, &b) in self.vertices.iter().zip(&self.boundary) {
            writeln!(out, "{} {} {}", p[0], p[1], u8::from(b))?;
        }
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

pub(crate) fn signed_area(vertices: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [p, q, r] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn diameter(vertices: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let d = |a: usize, b: usize| {
        let (p, q) = (vertices[a], vertices[b]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[0], t[2]))
}

/// `n × n` grid on the unit square, each cell split along its
/// lower-left/upper-right diagonal.
///
/// Vertex `(i, j)` has id `j (n + 1) + i`; cell `(i, j)` owns elements
/// `2 (j n + i)` (below the diagonal) and `2 (j n + i) + 1` (above).
pub fn build_uniform_mesh(n: usize) -> Result<TriMesh> {
    if n < 2 {
        return Err(LodError::InvalidResolution(n));
    }
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh::from_parts(vertices, triangles, Some(n))
}
