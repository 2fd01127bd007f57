//! Test operators of the monotonicity method and their semidefiniteness.

mod state;

pub use state::{
    ComponentRecord, DetectedComponent, Priors, PsdRecord, ReconstructionState, Sign, TPair,
};

use crate::error::Result;
use crate::forward::NdMatrix;

/// Smallest eigenvalue of `(A + Aᵀ) / 2`.
pub fn min_eig(a: &NdMatrix) -> Result<f64> {
    a.min_eig()
}

/// `min_eig(A) ≥ −eps`.
pub fn is_psd(a: &NdMatrix, eps: f64) -> Result<bool> {
    a.is_psd(eps)
}
