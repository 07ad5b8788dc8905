use thiserror::Error;

/// Crate-wide error type.
///
/// Variants map onto the process exit codes used by the CLI: malformed
/// input files and bad flag combinations exit with 2, degenerate label
/// vectors with 3, everything else with 1.
#[derive(Debug, Error)]
pub enum Error {
    /// A transaction or label file failed to parse. `line` is 1-based.
    #[error("malformed input{}: {reason}", fmt_line(.line))]
    MalformedInput { line: Option<usize>, reason: String },

    /// A permutation-matrix file failed validation. `line` is 1-based.
    #[error("malformed permutation matrix{}: {reason}", fmt_line(.line))]
    MalformedMatrix { line: Option<usize>, reason: String },

    /// Labels with an empty minor class: no association test is defined.
    #[error("degenerate labels: {reason}")]
    DegenerateLabels { reason: String },

    /// The testability ladder was stepped past the smallest attainable
    /// threshold. Callers translate this into "no nonzero threshold
    /// controls the FWER" rather than surfacing it to users.
    #[error("testability threshold ladder exhausted")]
    Exhausted,

    /// A brute-force oracle was asked for an instance it cannot certify.
    #[error("oracle limits exceeded: {reason}")]
    LimitsExceeded { reason: String },

    /// Mutually exclusive or out-of-range configuration.
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

impl Error {
    pub fn malformed(line: usize, reason: impl Into<String>) -> Self {
        Error::MalformedInput { line: Some(line), reason: reason.into() }
    }

    /// Exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MalformedInput { .. } | Error::MalformedMatrix { .. } | Error::InvalidConfig { .. } => 2,
            Error::DegenerateLabels { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
