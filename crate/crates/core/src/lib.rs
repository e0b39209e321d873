//! Localized orthogonal decomposition (LOD) for `-div(A grad u) = f` on the
//! unit square with homogeneous Dirichlet data and rough coefficients `A`.
//!
//! The building blocks, bottom-up:
//!
//! * [`mesh`]: a coarse uniform triangulation nested in a red-refined fine one.
//! * [`coefficient`]: piecewise-constant diffusion fields on the fine mesh.
//! * [`linalg`]: CSR storage, SPD and equality-constrained solves.
//! * [`fem`]: P1 assembly, reference solves and error norms.
//! * [`interpolation`]: the H¹-weighted quasi-interpolation whose kernel
//!   defines the fine-scale space.
//! * [`lod`]: global and patch-localized correctors, the multiscale basis,
//!   Galerkin / Petrov–Galerkin solves and corrector decay measurements.
//! * [`harness`]: config-driven experiments writing reproducible CSV.

pub mod coefficient;
pub mod error;
pub mod fem;
pub mod harness;
pub mod interpolation;
pub mod linalg;
pub mod lod;
pub mod mesh;

pub use error::{LodError, Result};
