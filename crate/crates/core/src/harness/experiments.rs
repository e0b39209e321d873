use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Mode, NodeSelector};
use crate::coefficient::{make_field, CoefficientField};
use crate::error::{LodError, Result};
use crate::fem::{assemble_full_mass, assemble_full_stiffness, error_norms, solve_reference, AssembledOperators, ErrorNorms};
use crate::lod::{
    assemble_corrector_set, fit_log_decay, measure_corrector_decay, nearest_coarse_node, solve_multiscale,
    CorrectorMode, DecayFit, LodContext, MultiscaleSpace, SolveMode,
};
use crate::mesh::{build_uniform_mesh, refine_hierarchy, MeshHierarchy};

pub const CONVERGENCE_HEADER: &str = "coarse_n,level_l,err_l2,err_h1,err_energy,order_l2,order_h1,seconds";
pub const DECAY_HEADER: &str = "radius,tail_h1,ratio";

/// Which discretization a report row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    /// Plain coarse P1 FEM on the same coarse mesh.
    Fem,
    Global,
    Patch(usize),
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Series::Fem => f.write_str("fem"),
            Series::Global => f.write_str("global"),
            Series::Patch(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub coarse_n: usize,
    pub series: Series,
    /// Errors against the fine reference solution, or the failure message.
    pub errors: std::result::Result<ErrorNorms, String>,
    /// Observed orders against the previous coarse level of the same series.
    pub order_l2: Option<f64>,
    pub order_h1: Option<f64>,
    pub seconds: Option<f64>,
    /// Corrector problems solved for this row.
    pub correctors: usize,
}

impl ErrorRow {
    pub fn h1(&self) -> Option<f64> {
        self.errors.as_ref().ok().map(|e| e.h1)
    }
}

/// Rows of an `(H, l)` sweep in deterministic order: coarse levels as listed
/// in the config, and within a level the series in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    /// `‖f‖_{L²}` and `‖f‖_{H¹}` of the nodal interpolant of `f` on the fine mesh.
    pub f_norm_l2: f64,
    pub f_norm_h1: f64,
}

fn fmt_num(x: Option<f64>) -> String {
    match x {
        Some(v) if !v.is_nan() => format!("{v:.11e}"),
        _ => "nan".to_string(),
    }
}

impl ErrorReport {
    pub fn row(&self, coarse_n: usize, series: Series) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.coarse_n == coarse_n && r.series == series)
    }

    pub fn series(&self, series: Series) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(move |r| r.series == series)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.errors.is_err()).count()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CONVERGENCE_HEADER}")?;
        for r in &self.rows {
            match &r.errors {
                Ok(e) => writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.coarse_n,
                    r.series,
                    fmt_num(Some(e.l2)),
                    fmt_num(Some(e.h1)),
                    fmt_num(Some(e.energy)),
                    fmt_num(r.order_l2),
                    fmt_num(r.order_h1),
                    fmt_num(r.seconds)
                )?,
                Err(_) => writeln!(out, "{},{},error,error,error,nan,nan,{}", r.coarse_n, r.series, fmt_num(r.seconds))?,
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Aligned table for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "‖f‖_L2 = {:.4e}, ‖f‖_H1 = {:.4e}\n{:>8} {:>7} {:>12} {:>12} {:>12} {:>8} {:>8}\n",
            self.f_norm_l2, self.f_norm_h1, "coarse_n", "l", "L2", "H1", "energy", "ord L2", "ord H1"
        );
        let ord = |o: Option<f64>| o.map_or("-".to_string(), |v| format!("{v:.2}"));
        for r in &self.rows {
            match &r.errors {
                Ok(e) => s.push_str(&format!(
                    "{:>8} {:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>8} {:>8}\n",
                    r.coarse_n,
                    r.series.to_string(),
                    e.l2,
                    e.h1,
                    e.energy,
                    ord(r.order_l2),
                    ord(r.order_h1)
                )),
                Err(msg) => s.push_str(&format!("{:>8} {:>7} failed: {msg}\n", r.coarse_n, r.series.to_string())),
            }
        }
        s
    }
}

/// Fine-mesh data shared by every discretization at one coarse level.
struct Level {
    hierarchy: MeshHierarchy,
    coefficient: CoefficientField,
}

impl Level {
    fn new(cfg: &ExperimentConfig, coarse_n: usize) -> Result<Self> {
        let levels = cfg.refinement_levels(coarse_n)?;
        let hierarchy = refine_hierarchy(&build_uniform_mesh(coarse_n)?, levels)?;
        let coefficient = make_field(cfg.coefficient, hierarchy.fine())?;
        Ok(Level { hierarchy, coefficient })
    }
}

struct CellResult {
    errors: std::result::Result<ErrorNorms, String>,
    seconds: f64,
    correctors: usize,
}

fn lod_series(cfg: &ExperimentConfig) -> Vec<Series> {
    match cfg.mode {
        Mode::Global => vec![Series::Global],
        Mode::Localized | Mode::Petrov => cfg.levels.iter().map(|&l| Series::Patch(l)).collect(),
    }
}

/// Solves every series at one coarse level. Setup failures mark all rows.
fn run_level(cfg: &ExperimentConfig, coarse_n: usize, series: &[Series]) -> Vec<CellResult> {
    let f = |x: f64, y: f64| cfg.rhs.eval(x, y);
    let setup = || -> Result<_> {
        let level = Level::new(cfg, coarse_n)?;
        let ops = AssembledOperators::new(level.hierarchy.fine(), &level.coefficient, &f)?;
        let reference = solve_reference(&level.hierarchy, &level.coefficient, &f, cfg.tol)?;
        Ok((level, ops, reference))
    };
    let (level, ops, reference) = match setup() {
        Ok(s) => s,
        Err(e) => {
            let msg = e.to_string();
            return series
                .iter()
                .map(|_| CellResult { errors: Err(msg.clone()), seconds: 0.0, correctors: 0 })
                .collect();
        }
    };
    let ctx = match LodContext::new(&level.hierarchy, &level.coefficient, cfg.tol) {
        Ok(c) => c,
        Err(e) => {
            let msg = e.to_string();
            return series
                .iter()
                .map(|_| CellResult { errors: Err(msg.clone()), seconds: 0.0, correctors: 0 })
                .collect();
        }
    };
    series
        .iter()
        .map(|&s| {
            let start = Instant::now();
            let solve = || -> Result<(Vec<f64>, usize)> {
                let (space, count) = match s {
                    Series::Fem => (MultiscaleSpace::coarse_p1(&ctx, &ops.load)?, 0),
                    Series::Global => {
                        let set = assemble_corrector_set(&ctx, CorrectorMode::Global)?;
                        (MultiscaleSpace::new(&ctx, &set, &ops.load)?, set.len())
                    }
                    Series::Patch(l) => {
                        let set = assemble_corrector_set(&ctx, CorrectorMode::Localized(l))?;
                        (MultiscaleSpace::new(&ctx, &set, &ops.load)?, set.len())
                    }
                };
                let mode = match (s, cfg.mode) {
                    (Series::Patch(_), Mode::Petrov) => SolveMode::PetrovGalerkin,
                    _ => SolveMode::Galerkin,
                };
                Ok((solve_multiscale(&space, mode, cfg.tol)?.fine, count))
            };
            let (errors, correctors) = match solve() {
                Ok((u, count)) => (error_norms(&u, &reference, &ops).map_err(|e| e.to_string()), count),
                Err(e) => (Err(e.to_string()), 0),
            };
            CellResult { errors, seconds: start.elapsed().as_secs_f64(), correctors }
        })
        .collect()
}

fn order(prev: &ErrorRow, cur: &ErrorRow, pick: fn(&ErrorNorms) -> f64) -> Option<f64> {
    let (Ok(a), Ok(b)) = (&prev.errors, &cur.errors) else { return None };
    let (ea, eb) = (pick(a), pick(b));
    if !(ea > 0.0 && eb > 0.0) {
        return None;
    }
    Some((ea / eb).ln() / (cur.coarse_n as f64 / prev.coarse_n as f64).ln())
}

fn rhs_norms(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    let fine = build_uniform_mesh(cfg.fine_n)?;
    let fv: Vec<f64> = fine.vertices().iter().map(|p| cfg.rhs.eval(p[0], p[1])).collect();
    let l2 = assemble_full_mass(&fine)?.bilinear(&fv, &fv)?.max(0.0);
    let semi = assemble_full_stiffness(&fine, None)?.bilinear(&fv, &fv)?.max(0.0);
    Ok((l2.sqrt(), (l2 + semi).sqrt()))
}

fn sweep(cfg: &ExperimentConfig, series: &[Series]) -> Result<ErrorReport> {
    cfg.validate()?;
    let cells: Vec<Vec<CellResult>> = cfg.coarse_n.par_iter().map(|&n| run_level(cfg, n, series)).collect();
    let mut rows: Vec<ErrorRow> = Vec::new();
    for (&n, results) in cfg.coarse_n.iter().zip(cells) {
        for (&s, r) in series.iter().zip(results) {
            let mut row = ErrorRow {
                coarse_n: n,
                series: s,
                errors: r.errors,
                order_l2: None,
                order_h1: None,
                seconds: cfg.timing.then_some(r.seconds),
                correctors: r.correctors,
            };
            if let Some(prev) = rows.iter().rev().find(|p| p.series == s) {
                row.order_l2 = order(prev, &row, |e| e.l2);
                row.order_h1 = order(prev, &row, |e| e.h1);
            }
            rows.push(row);
        }
    }
    let (f_norm_l2, f_norm_h1) = rhs_norms(cfg)?;
    Ok(ErrorReport { rows, f_norm_l2, f_norm_h1 })
}

/// Multiscale solutions for every coarse level, next to their error rows.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub report: ErrorReport,
    /// Fine vertex coordinates shared by all solutions.
    pub vertices: Vec<[f64; 2]>,
    /// Per coarse level: nodal values on all fine vertices (zero on the boundary).
    pub solutions: Vec<Option<Vec<f64>>>,
}

impl SolveOutput {
    /// `x y u` per fine vertex.
    pub fn write_solution<W: Write>(&self, index: usize, mut out: W) -> Result<()> {
        let u = self
            .solutions
            .get(index)
            .and_then(Option::as_ref)
            .ok_or_else(|| LodError::InvalidArgument(format!("no solution stored for coarse level {index}")))?;
        for (p, v) in self.vertices.iter().zip(u) {
            writeln!(out, "{:.12e} {:.12e} {:.12e}", p[0], p[1], v)?;
        }
        Ok(())
    }
}

/// Multiscale solve at each coarse level with the first patch order of the
/// config (or global correctors), errors against the fine reference solve.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<SolveOutput> {
    cfg.validate()?;
    let series = lod_series(cfg)[0];
    let f = |x: f64, y: f64| cfg.rhs.eval(x, y);
    let per_level: Vec<(CellResult, Option<Vec<f64>>)> = cfg
        .coarse_n
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let run = || -> Result<(ErrorNorms, Vec<f64>, usize)> {
                let level = Level::new(cfg, n)?;
                let ops = AssembledOperators::new(level.hierarchy.fine(), &level.coefficient, &f)?;
                let reference = solve_reference(&level.hierarchy, &level.coefficient, &f, cfg.tol)?;
                let ctx = LodContext::new(&level.hierarchy, &level.coefficient, cfg.tol)?;
                let mode = match series {
                    Series::Patch(l) => CorrectorMode::Localized(l),
                    _ => CorrectorMode::Global,
                };
                let set = assemble_corrector_set(&ctx, mode)?;
                let space = MultiscaleSpace::new(&ctx, &set, &ops.load)?;
                let solve_mode = if cfg.mode == Mode::Petrov { SolveMode::PetrovGalerkin } else { SolveMode::Galerkin };
                let u = solve_multiscale(&space, solve_mode, cfg.tol)?.fine;
                let errors = error_norms(&u, &reference, &ops)?;
                Ok((errors, level.hierarchy.fine().extend(&u), set.len()))
            };
            match run() {
                Ok((errors, u, count)) => (
                    CellResult { errors: Ok(errors), seconds: start.elapsed().as_secs_f64(), correctors: count },
                    Some(u),
                ),
                Err(e) => (
                    CellResult { errors: Err(e.to_string()), seconds: start.elapsed().as_secs_f64(), correctors: 0 },
                    None,
                ),
            }
        })
        .collect();
    let mut rows: Vec<ErrorRow> = Vec::new();
    let mut solutions = Vec::new();
    for (&n, (r, u)) in cfg.coarse_n.iter().zip(per_level) {
        let mut row = ErrorRow {
            coarse_n: n,
            series,
            errors: r.errors,
            order_l2: None,
            order_h1: None,
            seconds: cfg.timing.then_some(r.seconds),
            correctors: r.correctors,
        };
        if let Some(prev) = rows.last() {
            row.order_l2 = order(prev, &row, |e| e.l2);
            row.order_h1 = order(prev, &row, |e| e.h1);
        }
        rows.push(row);
        solutions.push(u);
    }
    let (f_norm_l2, f_norm_h1) = rhs_norms(cfg)?;
    let vertices = build_uniform_mesh(cfg.fine_n)?.vertices().to_vec();
    Ok(SolveOutput { report: ErrorReport { rows, f_norm_l2, f_norm_h1 }, vertices, solutions })
}

/// `(H, l)` sweep with the plain coarse FEM baseline alongside every LOD row.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ErrorReport> {
    let mut series = vec![Series::Fem];
    series.extend(lod_series(cfg));
    sweep(cfg, &series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub coarse_n: usize,
    /// Coarse interior dof of the measured corrector.
    pub node: usize,
    /// `(R, tail)` with `R` in absolute units.
    pub tails: Vec<(f64, f64)>,
    /// Fit of `ln tail` against `R / H` with `H = 1 / coarse_n`.
    pub fit: Option<DecayFit>,
}

impl DecayReport {
    /// `tail(R_i) / tail(R_{i-1})`; `None` for the first radius and after a zero tail.
    pub fn ratios(&self) -> Vec<Option<f64>> {
        let mut out = vec![None];
        for w in self.tails.windows(2) {
            out.push((w[0].1 > 0.0).then(|| w[1].1 / w[0].1));
        }
        out.truncate(self.tails.len());
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{DECAY_HEADER}")?;
        for (&(r, t), q) in self.tails.iter().zip(self.ratios()) {
            writeln!(out, "{},{},{}", fmt_num(Some(r)), fmt_num(Some(t)), fmt_num(q))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Tails of the global corrector at one node of the first coarse level, over
/// radii `2H, 3H, ...` up to the domain diameter (or `decay_max_multiple · H`).
pub fn run_decay(cfg: &ExperimentConfig, node: NodeSelector) -> Result<DecayReport> {
    cfg.validate()?;
    let coarse_n = cfg.coarse_n[0];
    let level = Level::new(cfg, coarse_n)?;
    let h = &level.hierarchy;
    let node = match node {
        NodeSelector::Center => nearest_coarse_node(h, [0.5, 0.5]),
        NodeSelector::Index(i) if i < h.coarse().num_interior() => i,
        NodeSelector::Index(i) => {
            return Err(LodError::config(
                "decay_node",
                format!("index {i} out of range ({} coarse interior nodes)", h.coarse().num_interior()),
            ))
        }
    };
    let spacing = 1.0 / coarse_n as f64;
    let max_k = match cfg.decay_max_multiple {
        0 => (std::f64::consts::SQRT_2 * coarse_n as f64).floor() as usize,
        k => k,
    };
    if max_k < 3 {
        return Err(LodError::config("decay_max_multiple", format!("{max_k} leaves fewer than two radii")));
    }
    let radii: Vec<f64> = (2..=max_k).map(|k| k as f64 * spacing).collect();

    let ctx = LodContext::new(h, &level.coefficient, cfg.tol)?;
    let phi = crate::lod::solve_global_corrector(&ctx, node)?;
    let tails = measure_corrector_decay(h, node, &phi, &radii)?;
    let scaled: Vec<(f64, f64)> = tails.iter().map(|&(r, t)| (r / spacing, t)).collect();
    Ok(DecayReport { coarse_n, node, tails, fit: fit_log_decay(&scaled) })
}

/// Coefficient raster on the fine mesh: `centroid_x centroid_y value`.
pub fn run_coeff_export<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    cfg.validate()?;
    let fine = build_uniform_mesh(cfg.fine_n)?;
    make_field(cfg.coefficient, &fine)?.write_raster(&fine, out)
}
