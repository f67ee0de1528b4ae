//! Wire layouts: generic polylines, the spiral two-wire guide connected at
//! its inner end, straight pairs, U-shaped trap wires, side-guide wires and
//! the loading arrangement.
//!
//! Wires are stored as centreline polylines. The cross-section is metadata;
//! the field solver may use it to split a wire into parallel sub-filaments.

mod io;
mod layouts;
mod path;
mod spiral;
mod types;
mod validate;

pub use io::{read_geometry, write_geometry};
pub use layouts::{
    build_loading_layout, build_side_guide, build_straight_pair, build_top_pair, build_u_trap,
    UTrapSpec,
};
pub use path::{Frame, GuidePath};
pub use spiral::{build_spiral_pair, spiral_arclength, spiral_pitch, LeadSpec, SpiralSpec};
pub use types::{CrossSection, WireCircuit, WireLayout, WireSegment};
pub use validate::{segment_distance, validate_layout, Finding, ValidationReport};

/// Chip surface normal. Wire planes are `z = const`.
pub fn chip_normal() -> crate::Vec3 {
    crate::Vec3::z()
}
