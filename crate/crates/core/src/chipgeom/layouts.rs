use super::path::GuidePath;
use super::types::{CrossSection, WireCircuit, WireLayout};
use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};

fn straight_path(length: f64, y: f64, z: f64) -> Result<GuidePath> {
    let n = 10;
    GuidePath::new(
        (0..=n)
            .map(|i| Vec3::new(length * (i as f64 / n as f64 - 0.5), y, z))
            .collect(),
    )
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Geometry(format!("{what} must be positive, got {v}")))
    }
}

/// Two parallel arms along x at y = ±d, joined at x = +length/2.
pub fn build_straight_pair(length: f64, d: f64, z: f64) -> Result<(WireCircuit, GuidePath)> {
    check_positive("length", length)?;
    check_positive("half separation", d)?;
    let h = 0.5 * length;
    let pts = [
        Vec3::new(-h, d, z),
        Vec3::new(h, d, z),
        Vec3::new(h, -d, z),
        Vec3::new(-h, -d, z),
    ];
    let circuit = WireCircuit::from_points("pair", &pts, CrossSection::GUIDE, "pair")?;
    Ok((circuit, straight_path(length, 0.0, z)?))
}

/// Single straight wire along x through the origin of the chip plane.
pub fn build_side_guide(length: f64, z: f64) -> Result<(WireCircuit, GuidePath)> {
    check_positive("length", length)?;
    let h = 0.5 * length;
    let circuit = WireCircuit::from_points(
        "single",
        &[Vec3::new(-h, 0.0, z), Vec3::new(h, 0.0, z)],
        CrossSection::GUIDE,
        "single",
    )?;
    Ok((circuit, straight_path(length, 0.0, z)?))
}

/// Two separately driven straight wires at y = ±d with opposite current
/// directions, for time-orbiting modulation.
pub fn build_top_pair(length: f64, d: f64, z: f64) -> Result<(WireLayout, GuidePath)> {
    check_positive("length", length)?;
    check_positive("half separation", d)?;
    let h = 0.5 * length;
    let a = WireCircuit::from_points(
        "wire_a",
        &[Vec3::new(-h, d, z), Vec3::new(h, d, z)],
        CrossSection::GUIDE,
        "wire_a",
    )?;
    let b = WireCircuit::from_points(
        "wire_b",
        &[Vec3::new(h, -d, z), Vec3::new(-h, -d, z)],
        CrossSection::GUIDE,
        "wire_b",
    )?;
    Ok((WireLayout::new(vec![a, b]), straight_path(length, 0.0, z)?))
}

/// Side-guide wire plus a counter-propagating pair, for the transfer from a
/// single-wire guide into the two-wire guide. The single wire sits at
/// y = `single_offset`.
pub fn build_loading_layout(length: f64, d: f64, single_offset: f64, z: f64) -> Result<(WireLayout, GuidePath)> {
    let (pair, path) = build_straight_pair(length, d, z)?;
    if (single_offset.abs() - d).abs() < CrossSection::GUIDE.width {
        return Err(Error::Geometry("single wire overlaps a pair wire".into()));
    }
    let h = 0.5 * length;
    let single = WireCircuit::from_points(
        "single",
        &[Vec3::new(-h, single_offset, z), Vec3::new(h, single_offset, z)],
        CrossSection::GUIDE,
        "single",
    )?;
    Ok((WireLayout::new(vec![single, pair]), path))
}

/// Two U-shaped wires facing away from each other. Their central sections
/// form a counter-propagating pair of length `central_length` at y = ±d; the
/// perpendicular leads at both ends close the potential longitudinally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTrapSpec {
    pub central_length: f64,
    pub half_separation: f64,
    pub lead_length: f64,
    pub plane_z: f64,
}

impl Default for UTrapSpec {
    fn default() -> Self {
        UTrapSpec {
            central_length: 2e-3,
            half_separation: 150e-6,
            lead_length: 3e-3,
            plane_z: 0.0,
        }
    }
}

pub fn build_u_trap(spec: &UTrapSpec) -> Result<(WireLayout, GuidePath)> {
    check_positive("central length", spec.central_length)?;
    check_positive("half separation", spec.half_separation)?;
    check_positive("lead length", spec.lead_length)?;
    let (h, d, l, z) = (
        0.5 * spec.central_length,
        spec.half_separation,
        spec.lead_length,
        spec.plane_z,
    );
    let a = WireCircuit::from_points(
        "u_a",
        &[
            Vec3::new(-h, d + l, z),
            Vec3::new(-h, d, z),
            Vec3::new(h, d, z),
            Vec3::new(h, d + l, z),
        ],
        CrossSection::U_WIRE,
        "u",
    )?;
    let b = WireCircuit::from_points(
        "u_b",
        &[
            Vec3::new(h, -d - l, z),
            Vec3::new(h, -d, z),
            Vec3::new(-h, -d, z),
            Vec3::new(-h, -d - l, z),
        ],
        CrossSection::U_WIRE,
        "u",
    )?;
    Ok((WireLayout::new(vec![a, b]), straight_path(spec.central_length, 0.0, z)?))
}
