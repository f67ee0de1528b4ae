use crate::{Error, PhysicalConstants, Result};
use std::f64::consts::PI;

/// Radius and gradient of the side guide formed by an infinite wire
/// carrying `current` in a perpendicular bias `bias`.
pub fn side_guide_analytic(current: f64, bias: f64, c: &PhysicalConstants) -> Result<(f64, f64)> {
    if !(current > 0.0 && bias > 0.0) {
        return Err(Error::Model("side guide needs I > 0 and B > 0".into()));
    }
    let r0 = c.mu0 * current / (2.0 * PI * bias);
    let g = 2.0 * PI * bias * bias / (c.mu0 * current);
    Ok((r0, g))
}

/// Largest vertical bias for which two infinite counter-propagating wires
/// at ±d form a zero above the wire plane.
pub fn two_wire_threshold(current: f64, d: f64, c: &PhysicalConstants) -> f64 {
    c.mu0 * current / (PI * d)
}

/// Height and gradient of the two-wire guide (infinite wires at ±d,
/// counter-propagating current, vertical bias).
pub fn two_wire_analytic(current: f64, d: f64, bias: f64, c: &PhysicalConstants) -> Result<(f64, f64)> {
    if !(current > 0.0 && d > 0.0 && bias > 0.0) {
        return Err(Error::Model("two-wire guide needs I, d, B > 0".into()));
    }
    let threshold = two_wire_threshold(current, d, c);
    if bias > threshold {
        return Err(Error::GuideDoesNotForm {
            threshold: Some(threshold),
        });
    }
    let h2 = (c.mu0 * current * d / (PI * bias) - d * d).max(0.0);
    let h = h2.sqrt();
    Ok((h, 2.0 * h * bias / (d * d + h2)))
}
