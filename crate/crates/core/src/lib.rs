//! Crack-domain class predicates, finite-element solvers on slit domains and
//! stability experiments for Neumann and scattering problems in the plane.

pub mod classlab;
pub mod crackmesh;
pub mod experiments;
pub mod geomkit;
pub mod pdecore;

pub use geomkit::{CompactScene, Point};
