//! Exponential decay of a global corrector away from its node.

use lodfem::coefficient::make_checkerboard;
use lodfem::lod::{fit_log_decay, measure_corrector_decay, nearest_coarse_node, solve_global_corrector, LodContext};
use lodfem::mesh::{build_uniform_mesh, refine_hierarchy};

fn main() -> lodfem::Result<()> {
    let n = 8;
    let h = refine_hierarchy(&build_uniform_mesh(n)?, 3)?;
    let coeff = make_checkerboard(32, 1000.0, 1, h.fine())?;
    let ctx = LodContext::new(&h, &coeff, 1e-10)?;
    let a = nearest_coarse_node(&h, [0.5, 0.5]);
    let phi = solve_global_corrector(&ctx, a)?;

    let radii: Vec<f64> = (2..=6).map(|k| k as f64 / n as f64).collect();
    let tails = measure_corrector_decay(&h, a, &phi, &radii)?;
    println!("{:>6} {:>12}", "R/H", "tail H1");
    for &(r, t) in &tails {
        println!("{:>6.1} {t:>12.4e}", r * n as f64);
    }
    let scaled: Vec<(f64, f64)> = tails.iter().map(|&(r, t)| (r * n as f64, t)).collect();
    if let Some(fit) = fit_log_decay(&scaled) {
        println!("ln tail ~ {:.3} + {:.3} R/H  (R² = {:.4})", fit.intercept, fit.slope, fit.r_squared);
    }
    Ok(())
}
