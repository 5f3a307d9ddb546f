//! Pipeline, experiment matrix and synthetic data for the `demers` tool.

pub mod matrix;
pub mod pipeline;
pub mod synth;
pub mod variant;

pub use matrix::{run_matrix, MatrixSpec};
pub use pipeline::{execute, run, RunConfig, RunOutcome, RunStatus, Tunables};
pub use variant::Variant;
