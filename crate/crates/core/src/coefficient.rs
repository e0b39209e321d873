//! Piecewise-constant scalar diffusion fields on the fine mesh.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LodError, Result};
use crate::mesh::TriMesh;

/// Generator that produced a field, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientKind {
    Constant { value: f64 },
    /// `(a0 + cos(2π x/ε)) (a0 + sin(2π y/ε))` at element centroids.
    Periodic { epsilon: f64, amplitude: f64 },
    /// `cell × cell` blocks with log-uniform values in `[1, contrast]`.
    Checkerboard { cell: usize, contrast: f64, seed: u64 },
}

/// One diffusivity per fine element, with its exact bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    values: Vec<f64>,
    alpha: f64,
    beta: f64,
    kind: CoefficientKind,
}

impl CoefficientField {
    fn from_values(values: Vec<f64>, kind: CoefficientKind) -> Result<Self> {
        let alpha = values.iter().copied().fold(f64::INFINITY, f64::min);
        let beta = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(alpha > 0.0) || !beta.is_finite() {
            return Err(LodError::InvalidCoefficient(format!("values must be positive and finite (min {alpha})")));
        }
        Ok(CoefficientField { values, alpha, beta, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn contrast(&self) -> f64 {
        self.beta / self.alpha
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Recomputes the bounds and checks them against the stored ones.
    pub fn validate(&self) -> Result<()> {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo != self.alpha || hi != self.beta || !(lo > 0.0) {
            return Err(LodError::InvalidCoefficient(format!(
                "stored bounds [{}, {}] disagree with values [{lo}, {hi}]",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Raster dump: `centroid_x centroid_y value` per fine element.
    pub fn write_raster<W: Write>(&self, mesh: &TriMesh, mut out: W) -> Result<()> {
        if mesh.num_triangles() != self.values.len() {
            return Err(LodError::Alignment(format!(
                "field has {} values, mesh has {} elements",
                self.values.len(),
                mesh.num_triangles()
            )));
        }
        for (e, v) in self.values.iter().enumerate() {
            let c = mesh.centroid(e);
            writeln!(out, "{:.12e} {:.12e} {:.12e}", c[0], c[1], v)?;
        }
        Ok(())
    }
}

/// Builds the field described by `kind` on `fine`.
pub fn make_field(kind: CoefficientKind, fine: &TriMesh) -> Result<CoefficientField> {
    match kind {
        CoefficientKind::Constant { value } => make_constant(value, fine),
        CoefficientKind::Periodic { epsilon, amplitude } => make_periodic(epsilon, amplitude, fine),
        CoefficientKind::Checkerboard { cell, contrast, seed } => make_checkerboard(cell, contrast, seed, fine),
    }
}

pub fn make_constant(c: f64, fine: &TriMesh) -> Result<CoefficientField> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(LodError::InvalidCoefficient(format!("constant {c} must be positive")));
    }
    CoefficientField::from_values(vec![c; fine.num_triangles()], CoefficientKind::Constant { value: c })
}

pub fn make_periodic(epsilon: f64, amplitude: f64, fine: &TriMesh) -> Result<CoefficientField> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(LodError::InvalidCoefficient(format!("period {epsilon} outside (0, 1]")));
    }
    if !(amplitude > 1.0) {
        return Err(LodError::Coercivity(amplitude));
    }
    let values = (0..fine.num_triangles())
        .map(|e| {
            let [x, y] = fine.centroid(e);
            periodic_value(epsilon, amplitude, x, y)
        })
        .collect();
    CoefficientField::from_values(values, CoefficientKind::Periodic { epsilon, amplitude })
}

pub(crate) fn periodic_value(epsilon: f64, amplitude: f64, x: f64, y: f64) -> f64 {
    (amplitude + (2.0 * PI * x / epsilon).cos()) * (amplitude + (2.0 * PI * y / epsilon).sin())
}

/// Value of block `index` for `seed`: ChaCha8 keyed by the seed, one stream
/// per block, so values do not depend on evaluation order.
fn block_value(seed: u64, index: u64, contrast: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let u: f64 = rng.random();
    contrast.powf(u)
}

pub fn make_checkerboard(cell: usize, contrast: f64, seed: u64, fine: &TriMesh) -> Result<CoefficientField> {
    if !(contrast >= 1.0) || !contrast.is_finite() {
        return Err(LodError::InvalidContrast(contrast));
    }
    let n = fine
        .resolution()
        .ok_or_else(|| LodError::Alignment("checkerboard needs a structured fine mesh".into()))?;
    if cell == 0 || n % cell != 0 {
        return Err(LodError::Alignment(format!(
            "fine resolution {n} is not a multiple of the block count {cell}"
        )));
    }
    let values = (0..fine.num_triangles())
        .map(|e| {
            let [x, y] = fine.centroid(e);
            let bx = ((x * cell as f64).floor() as usize).min(cell - 1);
            let by = ((y * cell as f64).floor() as usize).min(cell - 1);
            block_value(seed, (by * cell + bx) as u64, contrast)
        })
        .collect();
    CoefficientField::from_values(values, CoefficientKind::Checkerboard { cell, contrast, seed })
}
