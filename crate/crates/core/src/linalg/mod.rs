//! Sparse storage and the two solver kernels used throughout: SPD solves and
//! equality-constrained (saddle-point) solves.

mod cholesky;
mod saddle;
mod sparse;

pub use cholesky::{spd_solve, EnvelopeCholesky, SpdSolver};
pub use saddle::{saddle_solve, SaddleSolver, SaddleSystem};
pub use sparse::{dot, norm2, SparseMatrix};

/// Default relative residual tolerance for all solves.
pub const DEFAULT_TOL: f64 = 1e-10;
