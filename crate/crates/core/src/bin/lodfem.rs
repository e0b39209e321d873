use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lodfem::harness::{self, ExperimentConfig, Preset};
use lodfem::{LodError, Result};

#[derive(Parser)]
#[command(version, about = "LOD multiscale FEM experiments on the unit square")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file (`key = value` lines); keys not given keep the preset value.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; overrides `out` in the config. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = PresetArg::Desk)]
    preset: PresetArg,
}

#[derive(Subcommand)]
enum Command {
    /// Multiscale solve per coarse level; writes the error table and the finest solution.
    Solve,
    /// (H, l) sweep with the coarse FEM baseline; writes CSV.
    Convergence,
    /// Tail norms of one global corrector; writes CSV.
    Decay,
    /// Coefficient raster `centroid_x centroid_y value`.
    CoeffExport,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::preset(match cli.preset {
        PresetArg::Desk => Preset::Desk,
        PresetArg::Paper => Preset::Paper,
    });
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| LodError::Config { field: "--config".into(), message: format!("{}: {e}", path.display()) })?;
            ExperimentConfig::parse_onto(base, &text)?
        }
        None => base,
    };
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok(cfg)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out_path = cfg.out.as_deref();
    match cli.command {
        Command::Solve => {
            let result = harness::run_solve(&cfg)?;
            eprint!("{}", result.report.summary());
            let mut out = output(out_path)?;
            result.report.write_csv(&mut out)?;
            out.flush()?;
            if let Some(p) = out_path {
                let last = result.solutions.len() - 1;
                if result.solutions[last].is_some() {
                    let sol = p.with_extension("solution.txt");
                    result.write_solution(last, BufWriter::new(File::create(&sol)?))?;
                    eprintln!("solution for coarse_n = {} written to {}", cfg.coarse_n[last], sol.display());
                }
            }
            fail_on_errors(result.report.failures())
        }
        Command::Convergence => {
            let report = harness::run_convergence(&cfg)?;
            eprint!("{}", report.summary());
            let mut out = output(out_path)?;
            report.write_csv(&mut out)?;
            out.flush()?;
            fail_on_errors(report.failures())
        }
        Command::Decay => {
            let report = harness::run_decay(&cfg, cfg.decay_node)?;
            match report.fit {
                Some(fit) => eprintln!(
                    "node {} on coarse_n = {}: slope {:.4} per H, R² {:.4} ({} radii with positive tail)",
                    report.node, report.coarse_n, fit.slope, fit.r_squared, fit.points
                ),
                None => eprintln!("node {}: fewer than two positive tails, no fit", report.node),
            }
            let mut out = output(out_path)?;
            report.write_csv(&mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::CoeffExport => {
            let mut out = output(out_path)?;
            harness::run_coeff_export(&cfg, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn fail_on_errors(failures: usize) -> Result<()> {
    if failures > 0 {
        return Err(LodError::AssemblyIntegrity(format!("{failures} row(s) failed, marked `error` in the output")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 2 } else { 1 })
        }
    }
}
