//! Tight-binding lattice dynamics under stochastic resetting and projective
//! measurement.

pub mod analytic;
pub mod error;
pub mod lattice;
pub mod montecarlo;
pub mod quad;
pub mod resolvent;
pub mod special;
pub mod superop;

pub use error::{Error, Result};
pub use lattice::{build_propagator, evolve, DensityMatrix, LatticeSpec, Propagator, PropagatorCache, C64};
pub use superop::{apply_intervention, build_intervention_matrix, InterventionKind, LiouvilleIndex, SuperMatrix};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
