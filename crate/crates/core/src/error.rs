use thiserror::Error;

/// Errors raised anywhere in the discretization, solver or experiment layers.
#[derive(Debug, Error)]
pub enum LodError {
    #[error("invalid resolution {0}: need at least 2 cells per side")]
    InvalidResolution(usize),
    #[error("invalid refinement level {0}: need at least 1")]
    InvalidLevel(usize),
    #[error("invalid patch order {0}: need at least 1")]
    InvalidOrder(usize),
    #[error("{what} index {index} out of range (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
    #[error("coefficient loses coercivity: amplitude {0} must exceed 1")]
    Coercivity(f64),
    #[error("invalid contrast {0}: need contrast >= 1")]
    InvalidContrast(f64),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("solver failed: relative residual {residual:.3e} above tolerance {tol:.3e}")]
    SolverFailure { residual: f64, tol: f64 },
    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("corrector solve for coarse node {node} failed: {source}")]
    Corrector {
        node: usize,
        #[source]
        source: Box<LodError>,
    },
    #[error("patch around coarse element {0} has no interior fine dofs")]
    DegeneratePatch(usize),
    #[error("assembly integrity: {0}")]
    AssemblyIntegrity(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LodError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        LodError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of a linear or multiscale solve (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            LodError::SolverFailure { .. }
                | LodError::NotPositiveDefinite { .. }
                | LodError::Corrector { .. }
                | LodError::AssemblyIntegrity(_)
                | LodError::DegeneratePatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, LodError>;
