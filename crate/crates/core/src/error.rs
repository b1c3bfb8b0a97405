//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix dimension exceeds the configured side cap or shapes are
    /// inconsistent at the size level.
    #[error("size error: {0}")]
    Size(String),

    /// Invalid argument (out-of-range index, malformed distribution, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// A caller-side contract was violated (e.g. non-Hermitian input where a
    /// Hermitian matrix is required).
    #[error("contract error: {0}")]
    Contract(String),

    /// An iterative solver failed to reach its certificate tolerance.
    #[error("convergence error: {msg} (best gap {best_gap:.3e})")]
    Convergence { msg: String, best_gap: f64 },

    /// A derived object failed its own validity check (e.g. a channel that is
    /// not trace preserving).
    #[error("construction error: {0}")]
    Construction(String),

    /// An operator family does not span the required space.
    #[error("rank error: {0}")]
    Rank(String),

    /// The input state is not entangled where an NPT state is required.
    #[error("not entangled: {0}")]
    NotEntangled(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
