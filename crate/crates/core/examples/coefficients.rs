//! The two rough coefficient families, optionally written as rasters.
//!
//! `cargo run --example coefficients -- out_dir` writes `periodic.txt` and
//! `checkerboard.txt` with `centroid_x centroid_y value` lines.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use lodfem::coefficient::{make_checkerboard, make_periodic};
use lodfem::mesh::build_uniform_mesh;

fn main() -> lodfem::Result<()> {
    let fine = build_uniform_mesh(64)?;
    let fields = [
        ("periodic", make_periodic(1.0 / 16.0, 2.0, &fine)?),
        ("checkerboard", make_checkerboard(32, 1000.0, 1, &fine)?),
    ];
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    for (name, field) in &fields {
        println!(
            "{name:>12}: {:?}\n{:>12}  min {:.4}, max {:.4}, contrast {:.1}",
            field.kind(),
            "",
            field.alpha(),
            field.beta(),
            field.contrast()
        );
        if let Some(dir) = &out_dir {
            let path = dir.join(format!("{name}.txt"));
            field.write_raster(&fine, BufWriter::new(File::create(&path)?))?;
            println!("{:>12}  raster written to {}", "", path.display());
        }
    }
    Ok(())
}
