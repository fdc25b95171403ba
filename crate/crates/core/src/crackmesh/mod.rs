//! Conforming triangulations of a box minus a compact scene, with crack
//! edges carrying independent DOFs on each side.

mod mesh;
mod snap;
mod triangulation;

pub use mesh::{
    build_cracked_mesh, build_cracked_mesh_with, build_triangulation, crack_side_dofs, mesh_on,
    mesh_quality, BoundaryEdge, BoundaryKind, CrackEdge, CrackMesh, MeshOptions, MeshQuality,
};
pub use triangulation::{barycentric, Locator, Triangulation};

use crate::geomkit::GeomError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("polylines {first} and {second} are {separation} apart, too close for the mesh")]
    SceneTooFine { first: usize, second: usize, separation: f64 },
    #[error("could not snap polyline {polyline} to mesh edges")]
    SnapFailed { polyline: usize },
    #[error("edge {0} is not a crack edge")]
    NotACrackEdge(usize),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
