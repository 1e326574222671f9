use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument {0} lies on the branch cut")]
    BranchCut(String),
    #[error("singular point: {0}")]
    Singularity(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error("degenerate spectrum: {0}")]
    Multiplicity(String),
    #[error("too close to a threshold: {0}")]
    Threshold(String),
    #[error("evaluation at a pole: {0}")]
    Pole(String),
    #[error("cancellation floor reached: {0}")]
    Cancellation(String),
    #[error("outside the perturbative regime: {0}")]
    Regime(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("accuracy target not met: {0}")]
    Accuracy(String),
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("non-unique root: {0}")]
    Uniqueness(String),
}

pub type Result<T> = std::result::Result<T, Error>;
