use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vacuum filtration undefined: vacuum probability {0} is numerically one")]
    FiltrationUndefined(f64),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("moment <a^+{0} a^{1}> is missing from the table")]
    MissingMoment(usize, usize),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("truncation failed: {0}")]
    TruncationFailure(String),

    #[error("series did not converge within {0} terms")]
    ConvergenceFailure(usize),

    #[error("no reading of the normal-ordered quadrature expansion matches the oracle")]
    NoValidReading,

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("malformed state dump: {0}")]
    MalformedDump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Status code used in sweep output cells and as the CLI exit code.
    pub fn status_code(&self) -> u8 {
        match self {
            Error::InvalidParameter(_)
            | Error::FiltrationUndefined(_)
            | Error::InvalidOrder(_)
            | Error::MissingMoment(..)
            | Error::NotNormalized(_)
            | Error::UnknownFigure(_)
            | Error::MalformedDump(_) => 2,
            Error::TruncationFailure(_) | Error::ConvergenceFailure(_) | Error::NoValidReading => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }
}
