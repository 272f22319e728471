use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Each variant maps onto one CLI exit code (see [`GermError::exit_code`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GermError {
    /// Shapes that do not fit together: variable counts, arities, index ranges.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("not a germ at 0: component {component} has nonzero constant term")]
    NotAGerm { component: usize },

    /// An invariant whose definition presupposes a nonzero germ.
    #[error("{0}")]
    Undefined(String),

    #[error("generator count {count} exceeds cap {cap} at step {step}")]
    Resource {
        step: usize,
        count: usize,
        cap: usize,
    },

    #[error("numeric non-convergence: {0}")]
    NonConvergence(String),

    #[error("incomplete Puiseux branch: {0}")]
    IncompleteBranch(String),
}

impl GermError {
    pub fn structural(msg: impl Into<String>) -> Self {
        GermError::Structural(msg.into())
    }

    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        GermError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            GermError::Structural(_) | GermError::Parse { .. } => 2,
            GermError::NotAGerm { .. } => 3,
            GermError::Undefined(_) => 4,
            GermError::Resource { .. } => 5,
            GermError::NonConvergence(_) | GermError::IncompleteBranch(_) => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, GermError>;
