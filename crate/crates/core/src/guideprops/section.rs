use super::solve::minimize_field_norm;
use crate::chipgeom::{Frame, GuidePath};
use crate::magnetics::FieldModel;
use crate::model::species::magnetic_moment;
use crate::{AtomState, Error, Result, Vec3};
use nalgebra::{Matrix2, Matrix3x2, Vector2};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionOptions {
    /// Side of the square depth box in units of the guide height.
    pub box_scale: f64,
    /// Samples per box edge when searching the boundary minimum.
    pub boundary_samples: usize,
    /// Maximum height of the seed search (m).
    pub search_height: f64,
    /// Lateral half-width of the seed search (m).
    pub search_half_width: f64,
    /// Skip the seed search and start at this height above the path.
    pub seed_height: Option<f64>,
    /// Below this |B| at the minimum the section is a quadrupole (T).
    pub quadrupole_threshold: f64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self {
            box_scale: 3.0,
            boundary_samples: 401,
            search_height: 1e-3,
            search_half_width: 0.5e-3,
            seed_height: None,
            quadrupole_threshold: 1e-9,
        }
    }
}

/// Potential in the plane normal to a guide path at one station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuideSection {
    pub s: f64,
    pub position: Vec3,
    #[serde(skip)]
    pub frame: Frame,
    /// |B| at the minimum (T).
    pub b_min: f64,
    /// Height of the minimum above the wire plane (m).
    pub height: f64,
    /// Leading transverse gradient (T/m).
    pub gradient: f64,
    /// Transverse principal directions, strongest first.
    pub principal_axes: [Vec3; 2],
    /// Transverse gradients along the principal directions (T/m).
    pub principal_gradients: [f64; 2],
    /// Transverse angular frequencies; `None` for a quadrupole section.
    pub frequencies: Option<[f64; 2]>,
    /// Lowest |B| on the depth-box boundary (T).
    pub barrier_field: f64,
    pub barrier_point: Vec3,
    pub depth_energy: f64,
    pub depth_temperature: f64,
}

impl GuideSection {
    pub fn is_quadrupole(&self) -> bool {
        self.frequencies.is_none()
    }
}

fn seed_search(model: &FieldModel, origin: &Vec3, axes: &Matrix3x2<f64>, h_min: f64, opts: &SectionOptions, t: f64) -> Vector2<f64> {
    let (extent, width) = (opts.search_height, opts.search_half_width);
    let (nu, nw) = (41, 48);
    let mut best = (f64::INFINITY, Vector2::new(0.0, extent * 0.5));
    let ratio = (extent / (2.0 * h_min)).ln() / (nw - 1) as f64;
    for iw in 0..nw {
        let w = 2.0 * h_min * (ratio * iw as f64).exp();
        for iu in 0..nu {
            let u = width * (2.0 * iu as f64 / (nu - 1) as f64 - 1.0);
            let x = Vector2::new(u, w);
            if let Ok(b) = model.field_at(&(origin + axes * x), t) {
                if b.norm() < best.0 {
                    best = (b.norm(), x);
                }
            }
        }
    }
    best.1
}

/// Characterizes the guide potential in the plane normal to `path` at
/// arclength `s`.
pub fn section_at(
    model: &FieldModel,
    path: &GuidePath,
    s: f64,
    t: f64,
    state: &AtomState,
    opts: &SectionOptions,
) -> Result<GuideSection> {
    if !(0.0..=path.length()).contains(&s) {
        return Err(Error::Model(format!(
            "station {s} m outside path of length {} m",
            path.length()
        )));
    }
    let mu = magnetic_moment(state, model.constants())?;
    let frame = path.frame_at(s);
    let origin = path.point_at(s);
    let axes = Matrix3x2::from_columns(&[frame.normal, frame.up]);
    let h_min = 1.5 * model.guard();
    let start = match opts.seed_height {
        Some(h) => Vector2::new(0.0, h),
        None => seed_search(model, &origin, &axes, h_min, opts, t),
    };
    let m = minimize_field_norm(model, &origin, &axes, start, Some((1, h_min)), t)?;
    if m.at_bound {
        return Err(Error::GuideDoesNotForm { threshold: None });
    }
    let b_min = m.b.norm();
    let height = m.coords[1];

    let block: Matrix2<f64> = axes.transpose() * m.jacobian * axes;
    let svd = block.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (i0, i1) = if svd.singular_values[0] >= svd.singular_values[1] { (0, 1) } else { (1, 0) };
    let sig = [svd.singular_values[i0], svd.singular_values[i1]];
    let dir = |i: usize| axes * v_t.row(i).transpose();
    let frequencies = (b_min > opts.quadrupole_threshold)
        .then(|| sig.map(|g| (mu * g * g / (state.mass * b_min)).sqrt()));

    // depth: lowest |B| on the boundary of a square box around the minimum
    let half = 0.5 * opts.box_scale * height;
    let (u0, w0) = (m.coords[0], height);
    let lo = Vector2::new(u0 - half, (w0 - half).max(h_min));
    let hi = Vector2::new(u0 + half, w0 + half);
    let corners = [lo, Vector2::new(hi.x, lo.y), hi, Vector2::new(lo.x, hi.y)];
    let field = |x: &Vector2<f64>| -> Result<f64> {
        model
            .field_at(&(origin + axes * x), t)
            .map(|b| b.norm())
            .map_err(|_| Error::SectionBoxInConductor)
    };
    let n = opts.boundary_samples.max(3);
    let mut best = (f64::INFINITY, lo, 0usize, 0usize);
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        for k in 0..n {
            let x = a + (b - a) * (k as f64 / (n - 1) as f64);
            let v = field(&x)?;
            if v < best.0 {
                best = (v, x, e, k);
            }
        }
    }
    // golden-section refinement between the neighbouring edge samples
    let (_, _, e, k) = best;
    let (a, b) = (corners[e], corners[(e + 1) % 4]);
    let at = |f: f64| a + (b - a) * f;
    let step = 1.0 / (n - 1) as f64;
    let (mut fa, mut fb) = (((k as f64 - 1.0) * step).max(0.0), ((k as f64 + 1.0) * step).min(1.0));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let c = fb - gr * (fb - fa);
        let d = fa + gr * (fb - fa);
        if field(&at(c))? < field(&at(d))? {
            fb = d;
        } else {
            fa = c;
        }
    }
    let xr = at(0.5 * (fa + fb));
    let vr = field(&xr)?;
    if vr < best.0 {
        best.0 = vr;
        best.1 = xr;
    }
    let depth_energy = mu * (best.0 - b_min).max(0.0);
    Ok(GuideSection {
        s,
        position: m.point,
        frame,
        b_min,
        height,
        gradient: sig[0],
        principal_axes: [dir(i0), dir(i1)],
        principal_gradients: sig,
        frequencies,
        barrier_field: best.0,
        barrier_point: origin + axes * best.1,
        depth_energy,
        depth_temperature: depth_energy / model.constants().k_b,
    })
}
