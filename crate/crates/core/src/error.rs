use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdgeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Non-finite kernel value met while assembling a Nyström matrix.
    #[error("non-finite kernel entry at nodes ({i}, {j}): x_i = {xi}, x_j = {xj}")]
    NonFiniteEntry { i: usize, j: usize, xi: f64, xj: f64 },

    /// The backward ODE integration of the integro-differential system blew up.
    #[error("integration became unstable at t = {t}")]
    Instability { t: f64 },
}

pub type Result<T> = std::result::Result<T, EdgeError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(EdgeError::InvalidArgument(msg.into()))
}
