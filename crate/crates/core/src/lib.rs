//! Reconstruction of piecewise constant layered conductivities from local
//! Neumann-to-Dirichlet data by monotonicity tests and layer peeling.

pub mod error;
pub mod forward;
pub mod geometry;
pub mod io;
pub mod monotonicity;
pub mod phantoms;
pub mod pipeline;
pub mod reconstruct;

pub use error::{Error, Result};
