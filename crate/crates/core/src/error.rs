use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violates a documented precondition.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// A config or sequence record failed to parse.
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// Finite-width pulses collide (non-overlap condition).
    #[error("pulses overlap: period {period} must exceed pulse width / smallest interval = {required}")]
    Overlap { period: f64, required: f64 },

    /// An iterative method stopped before meeting its tolerance.
    #[error("{method} did not converge: {detail}")]
    NotConverged { method: &'static str, detail: String },

    /// State norm drifted away from one.
    #[error("norm drift {drift:.3e} exceeds {limit:.1e} at Jt = {time:.4}")]
    NormDrift { drift: f64, limit: f64, time: f64 },

    /// A computed state or density violates a physical invariant.
    #[error("unphysical result: {0}")]
    Unphysical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than numerics or IO.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid { .. } | Error::Parse { .. } | Error::Overlap { .. }
        )
    }

    /// Attaches the name of the failing experiment field to a validation error.
    pub fn in_field(self, field: &str) -> Self {
        match self {
            Error::Invalid { field: inner, reason } => Error::Invalid {
                field: format!("{field}.{inner}"),
                reason,
            },
            other => other,
        }
    }
}
