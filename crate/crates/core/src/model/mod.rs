//! Physical constants, atomic species data and unit conventions.

pub mod constants;
pub mod species;
pub mod units;
