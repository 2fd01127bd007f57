//! Disk meshes with marked boundary arcs, pixel grids and set morphology.

mod fitted;
mod mesh;
mod pixels;

pub use fitted::build_fitted_disk_mesh;
pub use mesh::{build_disk_mesh, build_disk_mesh_rings, mark_gamma, BoundaryEdge, GammaArc, Mesh};
pub use pixels::{pixelize, PixelGrid, PixelSet};
