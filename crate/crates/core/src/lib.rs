//! Constructive toolkit for lowering the mean dimension of systems with the
//! marker property.
//!
//! The crate works on a concrete test system, the shift on `([0,1]^D)^Z`
//! times an irrational rotation, and builds every stage of the factor
//! construction on finite, certified windows:
//!
//! * [`dynsys`]: points, the shift/rotation action, product and Bowen metrics.
//! * [`marker`]: the marker function and its separation/syndeticity constants.
//! * [`tiling`]: slices of the Voronoi diagram of the marker sites.
//! * [`signal`]: the maps `h`, `Phi`, `g`, `I_g` and the factor map `pi`.
//! * [`widim`]: cover-multiplicity solvers for epsilon-width dimension.
//! * [`fibre`]: maps into cubes with small-width fibres and their verification.
//! * [`experiment`]: configuration, end-to-end pipeline and reports.

pub mod dynsys;
pub mod error;
pub mod experiment;
pub mod export;
pub mod fibre;
pub mod marker;
pub mod signal;
pub mod tiling;
pub mod widim;

mod hash;

pub use error::{Error, Result};
