//! Patch-localized correctors for growing patch order, compared with the
//! global ones and with the fine reference solution.

use lodfem::coefficient::make_periodic;
use lodfem::fem::{error_norms, solve_reference, AssembledOperators};
use lodfem::lod::{assemble_corrector_set, solve_multiscale, CorrectorMode, LodContext, MultiscaleSpace, SolveMode};
use lodfem::mesh::{build_uniform_mesh, refine_hierarchy};

fn main() -> lodfem::Result<()> {
    let h = refine_hierarchy(&build_uniform_mesh(8)?, 3)?;
    let coeff = make_periodic(1.0 / 16.0, 2.0, h.fine())?;
    let f = |x: f64, _: f64| x;
    let ops = AssembledOperators::new(h.fine(), &coeff, &f)?;
    let reference = solve_reference(&h, &coeff, &f, 1e-10)?;
    let ctx = LodContext::new(&h, &coeff, 1e-10)?;
    let global = assemble_corrector_set(&ctx, CorrectorMode::Global)?;

    println!("{:>6} {:>14} {:>12} {:>12}", "l", "max |phi-phi_l|", "H1 (G)", "H1 (PG)");
    for l in 1..=5 {
        let set = assemble_corrector_set(&ctx, CorrectorMode::Localized(l))?;
        let gap = global
            .correctors
            .iter()
            .zip(&set.correctors)
            .map(|(g, p)| {
                let d: Vec<f64> = g.iter().zip(p).map(|(a, b)| a - b).collect();
                ctx.stiffness().bilinear(&d, &d).map(|v| v.sqrt())
            })
            .collect::<lodfem::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let space = MultiscaleSpace::new(&ctx, &set, &ops.load)?;
        let g = solve_multiscale(&space, SolveMode::Galerkin, 1e-10)?;
        let pg = solve_multiscale(&space, SolveMode::PetrovGalerkin, 1e-10)?;
        println!(
            "{l:>6} {gap:>14.3e} {:>12.4e} {:>12.4e}",
            error_norms(&g.fine, &reference, &ops)?.h1,
            error_norms(&pg.fine, &reference, &ops)?.h1
        );
    }
    Ok(())
}
