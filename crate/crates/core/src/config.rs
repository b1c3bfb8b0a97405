//! Central tolerance configuration.
//!
//! Every tolerance-aware predicate in the crate reads its thresholds from a
//! [`Tolerances`] record so that tests and the CLI reference a single source
//! of truth.

use serde::{Deserialize, Serialize};

/// Maximum side length of any matrix produced by a Kronecker product.
pub const SIDE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-abs deviation of `h - h†` below which a matrix counts as Hermitian.
    pub tol_herm: f64,
    /// Eigenvalue floor: PSD means min eigenvalue >= -tol_psd.
    pub tol_psd: f64,
    /// Generic equality tolerance (trace one, POVM completeness, ...).
    pub tol_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_herm: 1e-10,
            tol_psd: 1e-9,
            tol_eq: 1e-9,
        }
    }
}

impl Tolerances {
    /// Uniform override used by the CLI's `SQG_TOL_OVERRIDE` escape hatch.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            tol_herm: tol,
            tol_psd: tol,
            tol_eq: tol,
        }
    }
}
