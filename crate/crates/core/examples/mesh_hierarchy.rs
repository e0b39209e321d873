//! Coarse mesh, its red-refined fine mesh and element patches.

use lodfem::mesh::{build_uniform_mesh, element_patch, refine_hierarchy};

fn main() -> lodfem::Result<()> {
    let coarse = build_uniform_mesh(4)?;
    let h = refine_hierarchy(&coarse, 3)?;
    let fine = h.fine();
    println!(
        "coarse: {} vertices, {} triangles, H = {:.4}",
        coarse.num_vertices(),
        coarse.num_triangles(),
        coarse.mesh_size()
    );
    println!(
        "fine:   {} vertices, {} triangles, h = {:.4}, {} interior dofs",
        fine.num_vertices(),
        fine.num_triangles(),
        fine.mesh_size(),
        fine.num_interior()
    );
    println!("each coarse element has {} children", h.children(0).len());

    // the prolongated hat of the center node peaks at 1 on its coarse vertex
    let center = (0..coarse.num_interior())
        .find(|&j| coarse.vertices()[coarse.interior_vertices()[j]] == [0.5, 0.5])
        .expect("n = 4 has a center vertex");
    let hat = h.coarse_hat(center);
    let support = hat.iter().filter(|&&v| v != 0.0).count();
    println!("center hat: max {:.3}, {} nonzero fine dofs", hat.iter().cloned().fold(0.0, f64::max), support);

    // patches around the lower-left element grow by one vertex layer per order
    for l in 1..=4 {
        let p = element_patch(&h, 0, l)?;
        println!(
            "patch order {l}: {:2} coarse elements, {:4} fine dofs, {:2} constrained coarse nodes",
            p.coarse_elements.len(),
            p.fine_interior_dofs.len(),
            p.active_coarse_nodes.len()
        );
    }
    Ok(())
}
