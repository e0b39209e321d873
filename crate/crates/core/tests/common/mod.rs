//! Dense, independently derived oracles shared by the integration tests.
#![allow(dead_code)]

use lodfem::linalg::SparseMatrix;
use lodfem::mesh::MeshHierarchy;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Coarse hat of the vertex `(xa, ya)` on the uniform mesh of `n` cells per
/// side whose cells are cut along the lower-left to upper-right diagonal.
pub fn analytic_hat(n: usize, xa: f64, ya: f64, x: f64, y: f64) -> f64 {
    let s = (x - xa) * n as f64;
    let t = (y - ya) * n as f64;
    (1.0 - s.abs().max(t.abs()).max((s - t).abs())).max(0.0)
}

/// Seven-point degree-5 rule: barycentric coordinates and weights.
fn rule() -> Vec<([f64; 3], f64)> {
    let r = 15f64.sqrt();
    let a1 = (6.0 - r) / 21.0;
    let a2 = (6.0 + r) / 21.0;
    let w1 = (155.0 - r) / 1200.0;
    let w2 = (155.0 + r) / 1200.0;
    let mut out = vec![([1.0 / 3.0; 3], 0.225)];
    for (a, w) in [(a1, w1), (a2, w2)] {
        let b = 1.0 - 2.0 * a;
        out.push(([a, a, b], w));
        out.push(([a, b, a], w));
        out.push(([b, a, a], w));
    }
    out
}

/// Affine data of a triangle: area and gradients of the three vertex hats,
/// from the inverse of the 2×2 edge matrix.
fn triangle_data(p: [[f64; 2]; 3]) -> (f64, [[f64; 2]; 3]) {
    let (e1, e2) = ([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]);
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    // rows of the inverse of [e1 e2] are ∇λ1 and ∇λ2
    let g1 = [e2[1] / det, -e2[0] / det];
    let g2 = [-e1[1] / det, e1[0] / det];
    let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
    (det.abs() / 2.0, [g0, g1, g2])
}

/// Dense interpolation matrix (coarse interior × fine interior) by quadrature
/// of `[∫ λ_a μ_i + H² ∫ ∇λ_a·∇μ_i] / [∫ λ_a + H² ∫ |∇λ_a|]` with the analytic
/// coarse hat, `H` the coarse element diameter.
pub fn dense_interpolation(h: &MeshHierarchy) -> DMatrix<f64> {
    let coarse = h.coarse();
    let fine = h.fine();
    let n = coarse.resolution().expect("structured coarse mesh");
    let big_h = std::f64::consts::SQRT_2 / n as f64;
    let w = big_h * big_h;
    let q = rule();
    let mut out = DMatrix::zeros(coarse.num_interior(), fine.num_interior());
    for (row, &va) in coarse.interior_vertices().iter().enumerate() {
        let [xa, ya] = coarse.vertices()[va];
        let hat = |x: f64, y: f64| analytic_hat(n, xa, ya, x, y);
        let mut numer = vec![0.0; fine.num_vertices()];
        let mut denom = 0.0;
        for t in fine.triangles() {
            let p = [fine.vertices()[t[0]], fine.vertices()[t[1]], fine.vertices()[t[2]]];
            let vals = [hat(p[0][0], p[0][1]), hat(p[1][0], p[1][1]), hat(p[2][0], p[2][1])];
            if vals.iter().all(|&v| v == 0.0) {
                continue;
            }
            let (area, g) = triangle_data(p);
            let grad_hat = [
                vals[0] * g[0][0] + vals[1] * g[1][0] + vals[2] * g[2][0],
                vals[0] * g[0][1] + vals[1] * g[1][1] + vals[2] * g[2][1],
            ];
            for (b, wq) in &q {
                let x = b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0];
                let y = b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1];
                let lam = hat(x, y);
                denom += wq * area * lam;
                for k in 0..3 {
                    numer[t[k]] += wq * area * lam * b[k];
                }
            }
            denom += w * area * grad_hat[0].hypot(grad_hat[1]);
            for k in 0..3 {
                numer[t[k]] += w * area * (grad_hat[0] * g[k][0] + grad_hat[1] * g[k][1]);
            }
        }
        for (col, &v) in fine.interior_vertices().iter().enumerate() {
            out[(row, col)] = numer[v] / denom;
        }
    }
    out
}

pub fn to_dmatrix(m: &SparseMatrix) -> DMatrix<f64> {
    let d = m.to_dense();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| d[i][j])
}

/// Orthonormal basis of `ker C` as columns, from the eigenvectors of `CᵀC`.
pub fn null_space(c: &DMatrix<f64>) -> DMatrix<f64> {
    let ctc = c.transpose() * c;
    let eig = SymmetricEigen::new(ctc);
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cols: Vec<DVector<f64>> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k].abs() <= 1e-12 * lmax.max(1.0))
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Dense KKT solve of `[A Cᵀ; C 0] [x; μ] = [b; 0]` by LU.
pub fn dense_kkt(a: &DMatrix<f64>, c: &DMatrix<f64>, b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = (a.nrows(), c.nrows());
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(a);
    k.view_mut((0, n), (n, m)).copy_from(&c.transpose());
    k.view_mut((n, 0), (m, n)).copy_from(c);
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from_slice(b);
    let sol = k.lu().solve(&rhs).expect("nonsingular KKT system");
    (sol.rows(0, n).iter().copied().collect(), sol.rows(n, m).iter().copied().collect())
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn energy(s: &SparseMatrix, v: &[f64]) -> f64 {
    s.bilinear(v, v).unwrap().max(0.0).sqrt()
}

/// Smallest patch order whose patches cover the whole coarse mesh.
pub fn saturation_order(h: &MeshHierarchy) -> usize {
    let m = h.coarse().num_triangles();
    (1..)
        .find(|&l| (0..m).all(|k| lodfem::mesh::element_patch(h, k, l).unwrap().coarse_elements.len() == m))
        .unwrap()
}
