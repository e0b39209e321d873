//! The H¹-weighted quasi-interpolation: its action on simple functions and
//! measured stability / approximation constants.

use lodfem::interpolation::{build_interpolation, max_local_approximation_error, measure_constants};
use lodfem::mesh::{build_uniform_mesh, refine_hierarchy};

fn main() -> lodfem::Result<()> {
    println!("{:>4} {:>10} {:>12} {:>14} {:>12} {:>14}", "n", "max J1", "min J1", "local L2 err", "stability", "approximation");
    for n in [4, 8, 16] {
        let h = refine_hierarchy(&build_uniform_mesh(n)?, 2)?;
        let op = build_interpolation(&h)?;

        // J applied to the constant 1 (all fine vertices, boundary included)
        let ones = vec![1.0; h.fine().num_vertices()];
        let j1 = op.apply_full(&ones)?;
        let max = j1.iter().cloned().fold(f64::MIN, f64::max);
        let min = j1.iter().cloned().fold(f64::MAX, f64::min);

        let smooth = h
            .fine()
            .interpolate(|x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin());
        let err = max_local_approximation_error(&h, &op, &smooth)?;
        let c = measure_constants(&h, &op, 8, 7)?;
        println!("{n:>4} {max:>10.6} {min:>12.6} {err:>14.4e} {:>12.4} {:>14.4}", c.stability, c.approximation);
    }
    Ok(())
}
