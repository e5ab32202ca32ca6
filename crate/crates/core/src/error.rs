use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid verdict code {code} ({context})")]
    InvalidVerdict { code: i64, context: String },

    #[error("line {line}: {message}")]
    Format { line: u64, message: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("cycle {0} is not evaluable (needs at least one failing and one passing test)")]
    NotEvaluable(u64),

    #[error("no pending tests left on the score board")]
    Exhausted,

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("data integrity: {0}")]
    DataIntegrity(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("APFD is undefined for a trace without faults")]
    UndefinedMetric,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by the content of an input file, as opposed to
    /// configuration or internal contract problems.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidVerdict { .. }
                | Error::Format { .. }
                | Error::Malformed(_)
                | Error::DataIntegrity(_)
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}
