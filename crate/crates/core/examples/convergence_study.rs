//! Desk-scale (H, l) sweep for both coefficient families with the plain
//! coarse FEM baseline, through the experiment harness.
//!
//! `cargo run --release --example convergence_study -- out_dir` also writes
//! the CSV files.

use std::fs;
use std::path::PathBuf;

use lodfem::coefficient::CoefficientKind;
use lodfem::harness::{run_convergence, ExperimentConfig, Preset};

fn main() -> lodfem::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let families = [
        ("checkerboard", CoefficientKind::Checkerboard { cell: 32, contrast: 1000.0, seed: 1 }),
        ("periodic", CoefficientKind::Periodic { epsilon: 1.0 / 16.0, amplitude: 2.0 }),
    ];
    for (name, kind) in families {
        let mut cfg = ExperimentConfig::preset(Preset::Desk);
        cfg.coefficient = kind;
        let report = run_convergence(&cfg)?;
        println!("== {name}\n{}", report.summary());
        if let Some(dir) = &out_dir {
            fs::write(dir.join(format!("convergence_{name}.csv")), report.to_csv())?;
        }
    }
    Ok(())
}
