//! Time-orbiting-potential two-wire guide: closed-form parameters, the
//! numerically time-averaged potential and the adiabaticity conditions.

mod averaged;
mod closed;

pub use averaged::{
    averaged_potential, averaged_potential_with, zero_orbit, AveragedPotential, QuadratureOptions, ZeroOrbit,
};
pub use closed::{
    adiabaticity_check, top_closed_form, top_r0, top_report_row, AdiabaticityReport, AdiabaticityThresholds,
    TopConfig, TopParams, HEIGHT_MISMATCH_WARNING, TOP_REPORT_HEADER,
};
