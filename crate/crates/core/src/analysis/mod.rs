//! Reduction of trajectory snapshots to observables: arclength density
//! profiles, tangential velocity distributions, their modes, and lifetime
//! fits of survival curves.

mod lifetime;
mod modes;
mod profile;
mod projection;

pub use lifetime::{fit_lifetime, loss_fraction, survival_series, LifetimeFit, DEFAULT_WINDOW_START, FIT_HEADER};
pub use modes::{bimodality, Bimodality, Mode};
pub use profile::{density_profile, smooth, velocity_profile, Bins, Normalization, Profile1D, PROFILE_HEADER};
pub use projection::{project_arclength, segment_parameter, PathProjector, Projection};

/// Default off-guide tube radius in units of the guide height.
pub const TUBE_RADIUS_HEIGHTS: f64 = 5.0;
