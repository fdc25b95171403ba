//! Class predicates on crack scenes: MR arcs, FR pieces, gluing moduli,
//! exterior connectedness and the cone condition. Checks are three-valued;
//! PASS comes from a sufficient test, FAIL from a necessary one.

mod curves;
mod decomposition;
mod exterior;
mod gagliardo;
mod gluing;
mod lemmas;
mod mr;
mod params;
mod registry;
mod verdict;

use crate::geomkit::{GeomError, Point};

pub use decomposition::{
    arc_points, compute_boundary_points, piece_arcs, piece_bdry, piece_sing, validate_decomposition, Arc, ArcRef,
    Decomposition, FrPiece,
};
pub use exterior::check_exterior_connectedness;
pub use gagliardo::{check_g_class, g_to_fr_decompose, gagliardo_decompose, GToFr};
pub use gluing::{check_gluing, Anchor, GluingReport};
pub use lemmas::{component_bound, far_point_from_singular, lemma_sbar};
pub use mr::{check_fr, check_mr, FrCheck};
pub use params::{ClassParams, ConeSpec, Modulus};
pub use registry::{CheckInput, CheckRegistry, ClassCheck, ClassReport};
pub use verdict::{Status, Verdict, Witness};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassError {
    #[error("piece has {arcs} arcs, more than M0 = {m0}")]
    TooManyArcs { arcs: usize, m0: u32 },
    #[error("decomposition has no pieces")]
    NoOtherPieces,
    #[error("point is not on the crack set")]
    NotOnSet,
    #[error("no point far from the singular set: best {best}, needed {sbar}")]
    SearchFailed { best: f64, sbar: f64 },
    #[error("no exterior ball of radius {t}")]
    NoExteriorBalls { t: f64 },
    #[error("cone condition fails near {witness:?}")]
    ConeConditionFails { witness: Point },
    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
