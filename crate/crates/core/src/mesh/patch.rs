use super::hierarchy::MeshHierarchy;
use super::trimesh::TriMesh;
use crate::error::{LodError, Result};

/// The `l`-th order element patch around a coarse element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub seed_element: usize,
    pub order: usize,
    /// Sorted coarse element ids.
    pub coarse_elements: Vec<usize>,
    /// Sorted fine interior dof indices strictly inside the patch.
    pub fine_interior_dofs: Vec<usize>,
    /// Sorted coarse interior dof indices whose node star meets the patch.
    pub active_coarse_nodes: Vec<usize>,
}

/// One layer of vertex-adjacency closure: every element sharing at least one
/// vertex with the current set.
pub(crate) fn grow_once(mesh: &TriMesh, inside: &mut [bool]) {
    let mut touched = vec![false; mesh.num_vertices()];
    for (e, t) in mesh.triangles().iter().enumerate() {
        if inside[e] {
            for &v in t {
                touched[v] = true;
            }
        }
    }
    for (e, t) in mesh.triangles().iter().enumerate() {
        if t.iter().any(|&v| touched[v]) {
            inside[e] = true;
        }
    }
}

pub fn element_patch(h: &MeshHierarchy, k: usize, order: usize) -> Result<Patch> {
    if order < 1 {
        return Err(LodError::InvalidOrder(order));
    }
    let coarse = h.coarse();
    if k >= coarse.num_triangles() {
        return Err(LodError::Index { what: "coarse element", index: k, len: coarse.num_triangles() });
    }
    let mut inside = vec![false; coarse.num_triangles()];
    inside[k] = true;
    for _ in 0..order {
        grow_once(coarse, &mut inside);
    }
    let coarse_elements: Vec<usize> = (0..inside.len()).filter(|&e| inside[e]).collect();

    let mut active = vec![false; coarse.num_vertices()];
    for &e in &coarse_elements {
        for &a in &coarse.triangles()[e] {
            active[a] = true;
        }
    }
    let active_coarse_nodes = coarse
        .interior_vertices()
        .iter()
        .enumerate()
        .filter(|&(_, &a)| active[a])
        .map(|(j, _)| j)
        .collect();

    let fine = h.fine();
    let fine_interior_dofs = fine
        .interior_vertices()
        .iter()
        .enumerate()
        .filter(|&(_, &v)| {
            fine.node_star(v)
                .expect("interior vertex")
                .iter()
                .all(|&e| inside[h.parent(e)])
        })
        .map(|(i, _)| i)
        .collect();

    Ok(Patch {
        seed_element: k,
        order,
        coarse_elements,
        fine_interior_dofs,
        active_coarse_nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_mesh, refine_hierarchy};
    use std::collections::BTreeSet;

    fn hierarchy(n: usize, k: usize) -> MeshHierarchy {
        refine_hierarchy(&build_uniform_mesh(n).unwrap(), k).unwrap()
    }

    /// Brute-force closure using geometric vertex coincidence.
    fn oracle_patch(mesh: &TriMesh, k: usize, order: usize) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = [k].into();
        for _ in 0..order {
            let pts: Vec<[f64; 2]> = set.iter().flat_map(|&e| mesh.triangle_coords(e)).collect();
            set = (0..mesh.num_triangles())
                .filter(|&e| mesh.triangle_coords(e).iter().any(|p| pts.contains(p)))
                .collect();
        }
        set
    }

    #[test]
    fn interior_first_order_patch_has_thirteen_elements() {
        let h = hierarchy(8, 1);
        // lower triangle of cell (3, 3)
        let k = 2 * (3 * 8 + 3);
        let p = element_patch(&h, k, 1).unwrap();
        assert_eq!(p.coarse_elements.len(), 13);
        let oracle: Vec<usize> = oracle_patch(h.coarse(), k, 1).into_iter().collect();
        assert_eq!(p.coarse_elements, oracle);
        let upper = element_patch(&h, k + 1, 1).unwrap();
        assert_eq!(upper.coarse_elements.len(), 13);
    }

    #[test]
    fn matches_oracle_for_higher_orders() {
        let h = hierarchy(6, 1);
        for k in [0, 7, 30, 71] {
            for l in 1..=3 {
                let p = element_patch(&h, k, l).unwrap();
                let oracle: Vec<usize> = oracle_patch(h.coarse(), k, l).into_iter().collect();
                assert_eq!(p.coarse_elements, oracle);
            }
        }
    }

    #[test]
    fn monotone_and_saturating() {
        let h = hierarchy(4, 1);
        for k in 0..h.coarse().num_triangles() {
            let mut prev: BTreeSet<usize> = BTreeSet::new();
            // patches grow slower across the split diagonal, so full cover takes up to 2n
            for l in 1..=8 {
                let p = element_patch(&h, k, l).unwrap();
                let cur: BTreeSet<usize> = p.coarse_elements.iter().copied().collect();
                assert!(cur.is_superset(&prev));
                prev = cur;
            }
            assert_eq!(prev.len(), h.coarse().num_triangles());
        }
    }

    #[test]
    fn order_zero_rejected() {
        let h = hierarchy(2, 1);
        assert!(matches!(element_patch(&h, 0, 0), Err(LodError::InvalidOrder(0))));
        assert!(element_patch(&h, 99, 1).is_err());
    }

    #[test]
    fn fine_dofs_exclude_patch_boundary() {
        let h = hierarchy(8, 2);
        let k = 2 * (3 * 8 + 3);
        let p = element_patch(&h, k, 1).unwrap();
        let fine = h.fine();
        for (i, &v) in fine.interior_vertices().iter().enumerate() {
            // strictly inside the union of patch elements
            let inside = fine.node_star(v).unwrap().iter().all(|&e| p.coarse_elements.contains(&h.parent(e)));
            assert_eq!(inside, p.fine_interior_dofs.binary_search(&i).is_ok());
        }
        // saturated patch: every fine interior dof, every coarse node
        let full = element_patch(&h, k, 8).unwrap();
        assert_eq!(full.fine_interior_dofs.len(), fine.num_interior());
        assert_eq!(full.active_coarse_nodes.len(), h.coarse().num_interior());
    }

    #[test]
    fn active_nodes_touch_patch() {
        let h = hierarchy(8, 1);
        let p = element_patch(&h, 2 * (3 * 8 + 3), 1).unwrap();
        let coarse = h.coarse();
        let expect: Vec<usize> = coarse
            .interior_vertices()
            .iter()
            .enumerate()
            .filter(|&(_, &a)| coarse.node_star(a).unwrap().iter().any(|e| p.coarse_elements.contains(e)))
            .map(|(j, _)| j)
            .collect();
        assert_eq!(p.active_coarse_nodes, expect);
    }
}
