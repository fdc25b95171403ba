//! Piecewise-linear finite elements on cracked meshes: p-Laplacian Neumann
//! problems, truncated Helmholtz scattering, traces and best-constant
//! estimates.

mod constants;
pub mod fem;
mod field;
mod neumann;
mod norms;
mod scattering;

pub use constants::{estimate_best_constant, BestConstant, ConstantMode, EstimateOptions, SobolevExponents};
pub use field::{FeField, FieldKind, FieldValues, ScalarSource, SourceData};
pub use neumann::{solve_neumann, NeumannOptions, NeumannSolution};
pub use norms::{norm, trace_plus, BoundaryPart, NormKind, Region, TraceKind, TraceSegment};
pub use scattering::{
    scattering_mesh, scene_radius, solve_scattering, CoeffRegion, CoefficientField, ScatterConfig, ScatterSolution,
    Sym2,
};

use crate::crackmesh::MeshError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("exponent {0} outside the admissible range")]
    BadExponent(f64),
    #[error("no convergence, residual {residual:e}")]
    NoConvergence { residual: f64, field: Box<FeField> },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("truncation radius {s_trunc} must exceed {needed}")]
    BadTruncation { s_trunc: f64, needed: f64 },
    #[error("invalid coefficient field: {0}")]
    BadCoefficient(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("non-finite values")]
    NonFinite,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
