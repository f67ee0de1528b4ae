//! Magnetic field and field Jacobian of wire layouts plus a uniform bias.
//!
//! Wires are line currents along their centerlines; an opt-in flat-strip
//! mode spreads each wire over parallel filaments across its width.

mod fieldmap;
mod kernel;
mod model;
mod tree;
mod waveform;

pub use fieldmap::{field_map_csv, grid_points, FIELD_MAP_HEADER};
pub use kernel::{segment_field, segment_field_and_jacobian};
pub use model::{FieldModel, FieldSample, DEFAULT_GUARD, DEFAULT_STRIP_FILAMENTS};
pub use tree::FarField;
pub use waveform::{BiasWaveform, CurrentWaveform, PiecewiseLinear, WaveformKind};
