//! Finite-element forward problem and the discrete ND operator.

mod basis;
mod fem;
mod field;
mod nd;

pub use basis::{build_basis, BoundaryBasis};
pub use fem::{ForwardModel, FrechetCache, Potential, Potentials};
pub use field::ConductivityField;
pub use nd::NdMatrix;
