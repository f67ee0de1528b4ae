//! Archimedean spiral two-wire guide, r(θ) = a + bθ.
//!
//! The centreline runs from the outer end (s = 0) inward to the inner end.
//! The circuit goes pad → outer end of the +d arm → inward along the +d arm
//! → semicircular connecting arc around the inner end → outward along the −d
//! arm → pad, so a single bound current flows in opposite directions in the
//! two arms.

use super::path::GuidePath;
use super::types::{CrossSection, WireCircuit};
use super::validate::validate_layout;
use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Straight leads from the outer arm ends to the bonding pads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadSpec {
    /// Lead length from arm end to pad (m).
    pub length: f64,
    /// Angle between each lead and the backward guide tangent (rad); the two
    /// leads open symmetrically to either side. Zero continues the pair
    /// straight backwards.
    pub splay: f64,
}

impl Default for LeadSpec {
    fn default() -> Self {
        LeadSpec {
            length: 5e-3,
            splay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiralSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Length of the spiral part of the centreline (m).
    pub path_length: f64,
    /// Half centre-to-centre wire separation d (m).
    pub half_separation: f64,
    pub plane_z: f64,
    pub points_per_turn: usize,
    /// Optional straight guide section before the spiral's outer end (m).
    pub straight_entry: f64,
    pub leads: Option<LeadSpec>,
    pub cross_section: CrossSection,
    pub waveform_ref: String,
}

impl Default for SpiralSpec {
    fn default() -> Self {
        SpiralSpec {
            inner_radius: 200e-6,
            outer_radius: 3e-3,
            path_length: 25e-3,
            half_separation: 57.5e-6,
            plane_z: 0.0,
            points_per_turn: 512,
            straight_entry: 0.0,
            leads: Some(LeadSpec::default()),
            cross_section: CrossSection::GUIDE,
            waveform_ref: "guide".into(),
        }
    }
}

impl SpiralSpec {
    fn validate(&self) -> Result<()> {
        let ok = self.inner_radius > 0.0
            && self.outer_radius > self.inner_radius
            && self.half_separation > 0.0
            && self.half_separation < self.inner_radius
            && self.points_per_turn >= 32
            && self.straight_entry >= 0.0
            && self.path_length > self.outer_radius - self.inner_radius;
        if !ok {
            return Err(Error::Geometry(format!(
                "invalid spiral spec: need 0 < inner < outer, 0 < d < inner, resolution >= 32, \
                 length > outer - inner (got {self:?})"
            )));
        }
        if let Some(l) = &self.leads {
            if !(l.length > 0.0) || !(0.0..PI).contains(&l.splay) {
                return Err(Error::Geometry("invalid lead spec".into()));
            }
        }
        Ok(())
    }
}

/// Closed-form arclength of r = a + bθ between radii `a` and `r_out`.
pub fn spiral_arclength(a: f64, r_out: f64, b: f64) -> f64 {
    let g = |r: f64| {
        let q = (r * r + b * b).sqrt();
        r * q + b * b * (r + q).ln()
    };
    (g(r_out) - g(a)) / (2.0 * b)
}

/// Pitch b (m/rad) such that the spiral from `a` to `r_out` has length `length`.
pub fn spiral_pitch(a: f64, r_out: f64, length: f64) -> Result<f64> {
    if !(length > r_out - a) {
        return Err(Error::Geometry("spiral length shorter than radial extent".into()));
    }
    // arclength is strictly decreasing in b
    let (mut lo, mut hi) = (1e-12 * r_out, 1e3 * r_out);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if spiral_arclength(a, r_out, mid) > length {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn build_spiral_pair(spec: &SpiralSpec) -> Result<(WireCircuit, GuidePath)> {
    spec.validate()?;
    let a = spec.inner_radius;
    let d = spec.half_separation;
    let b = spiral_pitch(a, spec.outer_radius, spec.path_length)?;
    if TAU * b <= 2.0 * d + spec.cross_section.width {
        return Err(Error::Geometry(format!(
            "offset arms self-intersect: turn spacing {:.3e} m <= 2d + wire width",
            TAU * b
        )));
    }
    let theta_max = (spec.outer_radius - a) / b;

    // centreline samples with their unit tangents (direction of travel = -θ)
    let sample = |theta: f64| {
        let r = a + b * theta;
        let (s, c) = theta.sin_cos();
        let p = Vec3::new(r * c, r * s, spec.plane_z);
        let dp = Vec3::new(b * c - r * s, b * s + r * c, 0.0);
        (p, -dp.normalize())
    };
    let coarse = TAU / spec.points_per_turn as f64;
    let mut thetas = vec![theta_max];
    let mut theta = theta_max;
    while theta > 0.0 {
        let r = a + b * theta;
        let fine = 0.5 * d / ((r * r + b * b).sqrt() + 2.0 * d);
        theta -= coarse.min(fine);
        thetas.push(theta.max(0.0));
    }
    // avoid a sliver segment at the inner end
    let n = thetas.len();
    if n > 2 && thetas[n - 2] - thetas[n - 1] < 0.25 * (thetas[n - 3] - thetas[n - 2]) {
        thetas.remove(n - 2);
    }
    let mut center: Vec<(Vec3, Vec3)> = thetas.iter().map(|&t| sample(t)).collect();

    if spec.straight_entry > 0.0 {
        let (p0, t0) = center[0];
        let k = ((spec.straight_entry / (0.5 * d)).ceil() as usize).clamp(1, 64);
        let entry: Vec<(Vec3, Vec3)> = (0..k)
            .map(|i| {
                let u = spec.straight_entry * (1.0 - i as f64 / k as f64);
                (p0 - u * t0, t0)
            })
            .collect();
        center.splice(0..0, entry);
    }

    let up = super::chip_normal();
    let normal = |t: &Vec3| up.cross(t).normalize();
    let arm_plus: Vec<Vec3> = center.iter().map(|(p, t)| p + d * normal(t)).collect();
    let arm_minus: Vec<Vec3> = center.iter().map(|(p, t)| p - d * normal(t)).collect();

    let (p_end, t_end) = *center.last().unwrap();
    let n_end = normal(&t_end);
    let arc_segments = 16;
    let arc: Vec<Vec3> = (1..arc_segments)
        .map(|k| {
            let phi = FRAC_PI_2 - PI * k as f64 / arc_segments as f64;
            p_end + d * (phi.cos() * t_end + phi.sin() * n_end)
        })
        .collect();

    let mut pts = Vec::with_capacity(2 * center.len() + arc_segments + 2);
    let (_, t0) = center[0];
    let n0 = normal(&t0);
    if let Some(lead) = &spec.leads {
        let (s, c) = lead.splay.sin_cos();
        pts.push(arm_plus[0] + lead.length * (-c * t0 + s * n0));
    }
    pts.extend_from_slice(&arm_plus);
    pts.extend(arc);
    pts.extend(arm_minus.iter().rev());
    if let Some(lead) = &spec.leads {
        let (s, c) = lead.splay.sin_cos();
        pts.push(arm_minus[0] + lead.length * (-c * t0 - s * n0));
    }

    let circuit = WireCircuit::from_points("guide", &pts, spec.cross_section, spec.waveform_ref.clone())?;
    let report = validate_layout(&circuit.clone().into());
    if !report.passed() {
        return Err(Error::Geometry(format!("spiral layout invalid: {report}")));
    }
    let path = GuidePath::new(center.into_iter().map(|(p, _)| p).collect())?;
    Ok((circuit, path))
}
