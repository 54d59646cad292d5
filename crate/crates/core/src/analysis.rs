//! Analysis chain: visibility, CHSH, tomography, Monte Carlo uncertainties.

mod chsh;
mod fringe;
mod report;
mod tomography;

pub use chsh::*;
pub use fringe::*;
pub use report::*;
pub use tomography::*;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("visibility undefined: both extrema are zero")]
    VisibilityUndefined,
    #[error("invalid fringe scan: {0}")]
    BadScan(String),
    #[error("correlation undefined: zero total counts")]
    ZeroTotalCounts,
    #[error("CHSH record invalid: {0}")]
    BadChshRecord(String),
    #[error("tomography record invalid: {0}")]
    BadTomographyRecord(String),
    #[error("tomography optimizer did not converge after {iterations} iterations (best objective {objective:.6e})")]
    NonConvergence {
        iterations: usize,
        objective: f64,
        /// Best state found before hitting the iteration cap.
        best: Box<TomographyResult>,
    },
    #[error(transparent)]
    State(#[from] crate::statecore::StateError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error(transparent)]
    Source(#[from] crate::sourcesim::SourceError),
}
