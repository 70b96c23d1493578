use pvarsde::drivers::DriverError;
use pvarsde::path::PathError;
use pvarsde::sde::SdeError;
use pvarsde::skorokhod::SkorokhodError;
use pvarsde::young::YoungError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Skorokhod(#[from] SkorokhodError),
    #[error(transparent)]
    Young(#[from] YoungError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} checks violated")]
    VerificationFailed { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed { .. } => 1,
            CliError::Sde(
                SdeError::NoConvergence { .. } | SdeError::CoefficientEvaluationFailure { .. } | SdeError::PartitionOverflow { .. },
            ) => 3,
            _ => 2,
        }
    }

    /// Short machine-readable code for the `error=<code>` stderr line.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Config(_) => "Config",
            CliError::Io(_) => "Io",
            CliError::VerificationFailed { .. } => "VerificationFailed",
            CliError::Path(e) => match e {
                PathError::InvalidP(_) => "InvalidP",
                PathError::Csv(_) => "MalformedCsv",
                _ => "InvalidPath",
            },
            CliError::Driver(e) => match e {
                DriverError::InvalidHurst(_) => "InvalidHurst",
                DriverError::UnknownKind(_) => "UnknownPreset",
                DriverError::EmbeddingFailure => "EmbeddingFailure",
                _ => "InvalidDriver",
            },
            CliError::Sde(e) => match e {
                SdeError::NoConvergence { .. } => "NoConvergence",
                SdeError::CoefficientEvaluationFailure { .. } => "CoefficientEvaluationFailure",
                SdeError::PartitionOverflow { .. } => "PartitionOverflow",
                SdeError::InadmissibleStart { .. } => "InadmissibleStart",
                SdeError::UnknownPreset(_) => "UnknownPreset",
                _ => "InvalidProblem",
            },
            CliError::Skorokhod(_) => "InvalidProblem",
            CliError::Young(_) => "InvalidExponents",
        }
    }
}
