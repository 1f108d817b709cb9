use alloc::boxed::Box;
use alloc::string::String;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by state construction, channel evolution and the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A state recipe is inconsistent (missing or superfluous parameters, degenerate state).
    #[error("invalid state recipe: {0}")]
    InvalidRecipe(String),
    /// The operation only supports a restricted state form.
    #[error("unsupported state form: {0}")]
    UnsupportedForm(String),
    /// A solver could not reach its target.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// The truncated density operator lost more trace than the configured tolerance.
    #[error("truncation insufficient: trace deficit {deficit:.3e} exceeds {epsilon:.3e} (f_max = {f_max})")]
    TruncationInsufficient {
        /// `1 - trace` of the truncated operator.
        deficit: f64,
        /// Allowed deficit.
        epsilon: f64,
        /// Photon-number cutoff in use.
        f_max: usize,
    },
    /// Input density operator is not Hermitian within tolerance.
    #[error("density operator is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    /// A density operator has an eigenvalue below the positivity tolerance.
    #[error("density operator has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    /// A covariance matrix violates the uncertainty principle or is not symmetric.
    #[error("unphysical covariance matrix: {0}")]
    UnphysicalCovariance(String),
    /// An error raised while evaluating a labelled work item.
    #[error("{context}: {source}")]
    Context {
        /// Where the failure happened, e.g. `pss_s at 12.5 dB`.
        context: String,
        /// The underlying error.
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerics (truncation, positivity, solver
    /// convergence) as opposed to invalid user input.
    pub fn is_numerical(&self) -> bool {
        if let Error::Context { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::TruncationInsufficient { .. }
                | Error::NotHermitian(_)
                | Error::NotPositive(_)
                | Error::NoSolution(_)
        )
    }

    /// Wraps `self` with a description of the work item that failed.
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
