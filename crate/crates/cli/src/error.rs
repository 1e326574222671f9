use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] softguide::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{failed} of {total} sweep points failed; first: {first}")]
    PartialSweep { failed: usize, total: usize, first: Box<CliError> },
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const CONFIG: u8 = 3;
    pub const REGIME: u8 = 4;
    pub const SOLVER: u8 = 5;
    pub const ACCURACY: u8 = 6;
    /// Threshold, branch-cut and domain violations.
    pub const DOMAIN: u8 = 7;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use softguide::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => exit::IO,
            CliError::PartialSweep { first, .. } => first.exit_code(),
            CliError::Core(e) => match e {
                E::Config(_) | E::Geometry(_) => exit::CONFIG,
                E::Regime(_) => exit::REGIME,
                E::Solver(_) | E::Uniqueness(_) | E::Multiplicity(_) | E::Pole(_) => exit::SOLVER,
                E::Accuracy(_) | E::Cancellation(_) | E::Assembly(_) => exit::ACCURACY,
                E::Threshold(_) | E::BranchCut(_) | E::Singularity(_) | E::Domain(_) => exit::DOMAIN,
            },
        }
    }
}
