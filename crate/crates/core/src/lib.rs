//! Geometry of multi-qubit pure states through the momentum map of the
//! local-unitary action.
//!
//! The library maps pure states to the spectra of their one-qubit reduced
//! density matrices, decides membership and face location in the Kirwan
//! polytope cut out by the polygonal inequalities, classifies three-qubit
//! SLOCC classes via the Cayley hyperdeterminant, measures orbit dimensions
//! and sphericality certificates numerically, runs the gradient flow on the
//! norm square of the momentum map, and samples fibers of the spectral map to
//! probe when a state is determined up to local unitaries by its local
//! spectra.
//!
//! All numerics are generic over the real scalar type (see [`scalar::Real`]);
//! concrete `f64` aliases are re-exported at the crate root.

pub mod error;
pub mod fibers;
pub mod linalg;
pub mod orbits;
pub mod polytope;
pub mod qstate;
pub mod scalar;
pub mod slocc;

pub use error::Error;
pub use scalar::Real;

/// `f64` pure state.
pub type PureState64 = qstate::PureState<f64>;
/// `f32` pure state.
pub type PureState32 = qstate::PureState<f32>;
/// `f64` local-spectra vector.
pub type LocalSpectra64 = qstate::LocalSpectra<f64>;
/// `f64` polytope membership report.
pub type PolytopeReport64 = polytope::PolytopeReport<f64>;
/// `f64` flow trace.
pub type FlowTrace64 = slocc::FlowTrace<f64>;
/// `f64` orbit report.
pub type OrbitReport64 = orbits::OrbitReport<f64>;
/// `f64` local-unitary invariant tuple.
pub type InvariantTuple64 = fibers::InvariantTuple<f64>;
/// `f64` fiber cloud report.
pub type CloudReport64 = fibers::CloudReport<f64>;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
