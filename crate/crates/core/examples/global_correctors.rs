//! Global correctors and the ideal multiscale solution on a high-contrast field.

use lodfem::coefficient::make_checkerboard;
use lodfem::fem::{error_norms, solve_reference, AssembledOperators};
use lodfem::linalg::norm2;
use lodfem::lod::{assemble_corrector_set, solve_multiscale, CorrectorMode, LodContext, MultiscaleSpace, SolveMode};
use lodfem::mesh::{build_uniform_mesh, refine_hierarchy};

fn main() -> lodfem::Result<()> {
    let h = refine_hierarchy(&build_uniform_mesh(8)?, 3)?;
    let coeff = make_checkerboard(32, 1000.0, 1, h.fine())?;
    let f = |x: f64, _: f64| x;
    let ops = AssembledOperators::new(h.fine(), &coeff, &f)?;
    let reference = solve_reference(&h, &coeff, &f, 1e-10)?;

    let ctx = LodContext::new(&h, &coeff, 1e-10)?;
    let set = assemble_corrector_set(&ctx, CorrectorMode::Global)?;
    let worst_constraint = set
        .correctors
        .iter()
        .map(|phi| ctx.interpolation().apply(phi).map(|v| norm2(&v)))
        .collect::<lodfem::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("{} correctors, max |J phi| = {worst_constraint:.2e}", set.len());

    for (name, space) in [
        ("coarse P1", MultiscaleSpace::coarse_p1(&ctx, &ops.load)?),
        ("ideal LOD", MultiscaleSpace::new(&ctx, &set, &ops.load)?),
    ] {
        let u = solve_multiscale(&space, SolveMode::Galerkin, 1e-10)?;
        let e = error_norms(&u.fine, &reference, &ops)?;
        println!("{name:>10}: L2 {:.3e}  H1 {:.3e}  energy {:.3e}", e.l2, e.h1, e.energy);
    }
    Ok(())
}
