use thiserror::Error;

use crate::sdp::SdpSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("singular response estimation: {0}")]
    SingularEstimation(String),

    #[error("infeasible hypothesis: {0}")]
    InfeasibleHypothesis(String),

    #[error("all hypotheses have zero likelihood")]
    Underflow,

    #[error("SDP solver hit the iteration cap ({iterations}) with relative gap {gap:.3e}")]
    SdpConvergence {
        iterations: usize,
        gap: f64,
        best: Box<SdpSolution>,
    },

    #[error("exhaustive search over {0} candidates refused (limit 1e6)")]
    SearchTooLarge(u128),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
