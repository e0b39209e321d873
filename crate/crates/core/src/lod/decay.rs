use crate::error::{LodError, Result};
use crate::fem::{local_mass, local_stiffness};
use crate::mesh::MeshHierarchy;

/// H¹ norm of `phi` outside closed balls `B_R(a)` around coarse node `a`.
///
/// An element counts as outside when all three of its vertices lie strictly
/// farther than `R` from `a`. Radii beyond the domain give a zero tail.
pub fn measure_corrector_decay(
    h: &MeshHierarchy,
    a: usize,
    phi: &[f64],
    radii: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let coarse = h.coarse();
    let fine = h.fine();
    if a >= coarse.num_interior() {
        return Err(LodError::Index { what: "coarse node", index: a, len: coarse.num_interior() });
    }
    if phi.len() != fine.num_interior() {
        return Err(LodError::Shape { expected: fine.num_interior(), got: phi.len() });
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(LodError::InvalidArgument("radii must be positive and increasing".into()));
    }
    let center = coarse.vertices()[coarse.interior_vertices()[a]];
    let full = fine.extend(phi);

    // per element: squared H¹ contribution and the smallest vertex distance
    let elements: Vec<(f64, f64)> = fine
        .triangles()
        .iter()
        .enumerate()
        .map(|(e, t)| {
            let tri = fine.triangle_coords(e);
            let (m, s) = (local_mass(tri), local_stiffness(tri));
            let vals = [full[t[0]], full[t[1]], full[t[2]]];
            let mut sq = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    sq += vals[i] * (m[i][j] + s[i][j]) * vals[j];
                }
            }
            let dist = tri
                .iter()
                .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
                .fold(f64::INFINITY, f64::min);
            (sq.max(0.0), dist)
        })
        .collect();

    Ok(radii
        .iter()
        .map(|&r| {
            let tail: f64 = elements.iter().filter(|&&(_, d)| d > r).fold(0.0, |acc, &(sq, _)| acc + sq);
            (r, tail.sqrt())
        })
        .collect())
}

/// Least-squares fit of `ln(tail) = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points that entered the fit (zero tails are skipped).
    pub points: usize,
}

/// Fits `(x, tail)` pairs; tails that are exactly zero carry no logarithm and
/// are left out. Needs at least two positive tails.
pub fn fit_log_decay(points: &[(f64, f64)]) -> Option<DecayFit> {
    let usable: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, t)| (x, t.ln())).collect();
    let n = usable.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(DecayFit { slope, intercept: my - slope * mx, r_squared, points: n })
}

/// Coarse interior node closest to `point` (lowest index on ties).
pub fn nearest_coarse_node(h: &MeshHierarchy, point: [f64; 2]) -> usize {
    let coarse = h.coarse();
    coarse
        .interior_vertices()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let p = coarse.vertices()[v];
            (j, (p[0] - point[0]).hypot(p[1] - point[1]))
        })
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_mesh, refine_hierarchy};

    #[test]
    fn exact_exponential_fits_perfectly() {
        let pts: Vec<(f64, f64)> = (2..6).map(|k| (k as f64, 3.0 * (-0.7 * k as f64).exp())).collect();
        let fit = fit_log_decay(&pts).unwrap();
        assert!((fit.slope + 0.7).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_tails_are_skipped() {
        let fit = fit_log_decay(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.0)]).unwrap();
        assert_eq!(fit.points, 2);
        assert!(fit_log_decay(&[(1.0, 1.0), (2.0, 0.0)]).is_none());
    }

    #[test]
    fn tails_are_monotone_and_vanish_beyond_the_domain() {
        let h = refine_hierarchy(&build_uniform_mesh(4).unwrap(), 2).unwrap();
        let phi: Vec<f64> = (0..h.fine().num_interior()).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let a = nearest_coarse_node(&h, [0.5, 0.5]);
        let radii = [0.1, 0.3, 0.5, 0.8, 1.5];
        let tails = measure_corrector_decay(&h, a, &phi, &radii).unwrap();
        for w in tails.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        assert_eq!(tails[4].1, 0.0);
        assert!(measure_corrector_decay(&h, a, &phi, &[0.5, 0.3]).is_err());
    }

    #[test]
    fn nearest_node_is_center() {
        let h = refine_hierarchy(&build_uniform_mesh(8).unwrap(), 1).unwrap();
        let a = nearest_coarse_node(&h, [0.5, 0.5]);
        let v = h.coarse().interior_vertices()[a];
        assert_eq!(h.coarse().vertices()[v], [0.5, 0.5]);
    }
}
