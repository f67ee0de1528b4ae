//! Field zeros, guide sections (height, gradient, frequencies, depth),
//! three-dimensional trap depth and bias scans, plus closed forms for
//! infinite-wire guides.

mod analytic;
mod depth3d;
mod scan;
mod section;
mod solve;

pub use analytic::{side_guide_analytic, two_wire_analytic, two_wire_threshold};
pub use depth3d::{trap_depth_3d, TrapDepth};
pub use scan::{guide_scan, ScanOptions, ScanRow, ScanTable, SCAN_HEADER};
pub use section::{section_at, GuideSection, SectionOptions};
pub use solve::{find_field_zero, minimize_field_norm, Minimum, ZERO_TOLERANCE};
