//! Experiment harness around the `seqweak` simulator core: configuration
//! files, θ-sweep orchestration in three fidelity modes (analytic, exact,
//! sampled), detector frame files, and result emission for plotting.

pub mod emit;
pub mod frames;
pub mod harness;
pub mod specfile;

use thiserror::Error;

/// Errors from the harness layer: core simulation failures plus file-format
/// and configuration problems.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("simulation: {0}")]
    Core(#[from] seqweak::Error),
    #[error("sampled mode requires a detector configuration")]
    MissingDetector,
    #[error("theta grid must not be empty")]
    EmptyGrid,
    #[error(
        "analytic references and moment inversion require linearly polarized \
         pre- and post-selection states (complex amplitudes supplied)"
    )]
    NonlinearStates,
    #[error(
        "every sweep point is degenerate: the post-selection is orthogonal to the pre-selection"
    )]
    AllRowsDegenerate,
    #[error("result is empty; nothing to emit")]
    EmptyResult,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("experiment spec: {0}")]
    SpecParse(String),
    #[error("frame file: {0}")]
    FrameParse(String),
    #[error("result table: {0}")]
    TableParse(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
