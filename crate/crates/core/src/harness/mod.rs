//! Config-driven experiments: single solves, `(H, l)` convergence sweeps,
//! corrector decay studies and coefficient rasters.
//!
//! Every CSV is byte-reproducible: rows come out in config order whatever
//! the thread count, floats use 12 significant digits, and wall times are
//! only written when `timing = true`.

mod config;
mod experiments;

pub use config::{ExperimentConfig, Mode, NodeSelector, Preset, Rhs};
pub use experiments::{
    run_coeff_export, run_convergence, run_decay, run_solve, DecayReport, ErrorReport, ErrorRow, Series,
    SolveOutput, CONVERGENCE_HEADER, DECAY_HEADER,
};
