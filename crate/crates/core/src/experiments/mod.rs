//! Desk-scale convergence experiments: Mosco stability of Neumann problems,
//! the Neumann sieve, Sobolev-constant uniformity and scattering stability.

mod compare;
pub mod fixtures;
mod mosco;
mod rate;
mod registry;
mod report;
mod scatter;
mod sieve;
mod sobolev;

pub use compare::{field_difference, FieldDiff};
pub use mosco::{run_mosco, run_mosco_with_fields, ClassGate, MoscoConfig, MoscoOutcome};
pub use rate::{fit_rate, RateFit};
pub use registry::{Experiment, ExperimentRegistry};
pub use report::{config_hash, ExperimentReport, NamedVerdict, Provenance, Step};
pub use scatter::{
    run_scattering_stability, run_uniform_bounds, BoundsMember, ScatterStabilityConfig, UniformBoundsConfig,
};
pub use sieve::{calibrate_critical, run_sieve, run_sieve_with_fields, sieve_scene, GapRule, SieveConfig, SieveOutcome};
pub use sobolev::{run_sobolev_uniformity, run_sobolev_with_fields, FamilyMember, SobolevConfig, SobolevOutcome, CUSP_BETAS, PLUS_ANGLES};

use crate::classlab::{ClassError, Status};
use crate::crackmesh::MeshError;
use crate::geomkit::GeomError;
use crate::pdecore::PdeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("scene {scene} does not pass {check}: {status:?}")]
    ClassCheckFailed { scene: usize, check: String, status: Status },
    #[error("meshing failed: {0}")]
    MeshFailure(#[from] MeshError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("rate fit needs positive data")]
    NonPositiveData,
    #[error("rate fit needs at least 3 pairs, got {0}")]
    TooFewPoints(usize),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}
