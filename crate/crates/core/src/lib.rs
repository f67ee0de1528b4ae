//! Magnetic atom-chip wire guides: Biot–Savart fields of arbitrary wire
//! layouts, guide and trap characterization, time-orbiting potentials and
//! classical Monte-Carlo transport of atom ensembles.
//!
//! All interfaces between modules exchange SI quantities. Conversion to and
//! from laboratory units (gauss, micrometre, milliampere, microkelvin) only
//! happens in [`model::units`] and in the scenario/report layers.

pub mod analysis;
pub mod chipgeom;
pub mod error;
pub mod guideprops;
pub mod magnetics;
pub mod mcsim;
pub mod model;
pub mod scenario;
pub mod topdynamics;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use model::constants::PhysicalConstants;
pub use model::species::AtomState;

/// Three-component vector in SI units.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 matrix; for field Jacobians `J[(i, j)] = ∂B_i/∂x_j`.
pub type Mat3 = nalgebra::Matrix3<f64>;
