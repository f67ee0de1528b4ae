use crate::chipgeom::GuidePath;
use crate::{Error, Result, Vec3};
use std::collections::HashMap;

/// Where a point lies relative to the guide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    OnGuide {
        /// Arclength of the nearest centreline point (m).
        s: f64,
        /// Index of the path segment containing that point.
        segment: usize,
        /// Distance from the centreline (m).
        distance: f64,
    },
    OffGuide,
}

impl Projection {
    pub fn arclength(&self) -> Option<f64> {
        match self {
            Projection::OnGuide { s, .. } => Some(*s),
            Projection::OffGuide => None,
        }
    }
}

/// Closest point on segment `a`–`b` to `p` as a parameter in [0, 1].
pub fn segment_parameter(a: &Vec3, b: &Vec3, p: &Vec3) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    if l2 == 0.0 {
        0.0
    } else {
        ((p - a).dot(&ab) / l2).clamp(0.0, 1.0)
    }
}

/// Nearest-point queries against a guide centreline within a tube of
/// fixed radius. Segments are binned on a uniform grid in the chip plane
/// with cell size equal to the tube radius, so a query only tests the
/// segments registered in its own cell.
#[derive(Debug, Clone)]
pub struct PathProjector {
    path: GuidePath,
    radius: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl PathProjector {
    pub fn new(path: &GuidePath, tube_radius: f64) -> Result<Self> {
        if !(tube_radius > 0.0 && tube_radius.is_finite()) {
            return Err(Error::Geometry(format!("tube radius must be positive, got {tube_radius}")));
        }
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let pts = path.points();
        for i in 0..path.segment_count() {
            let (a, b) = (pts[i], pts[i + 1]);
            let lo = a.inf(&b).add_scalar(-tube_radius);
            let hi = a.sup(&b).add_scalar(tube_radius);
            let cell = |v: f64| (v / tube_radius).floor() as i64;
            for cx in cell(lo.x)..=cell(hi.x) {
                for cy in cell(lo.y)..=cell(hi.y) {
                    cells.entry((cx, cy)).or_default().push(i);
                }
            }
        }
        Ok(PathProjector {
            path: path.clone(),
            radius: tube_radius,
            cells,
        })
    }

    pub fn path(&self) -> &GuidePath {
        &self.path
    }

    pub fn tube_radius(&self) -> f64 {
        self.radius
    }

    /// Projects `p` onto the centreline. Among equidistant candidates the
    /// one with the smaller arclength wins.
    pub fn project(&self, p: &Vec3) -> Projection {
        let key = ((p.x / self.radius).floor() as i64, (p.y / self.radius).floor() as i64);
        let Some(candidates) = self.cells.get(&key) else {
            return Projection::OffGuide;
        };
        let pts = self.path.points();
        let arc = self.path.arclengths();
        let mut best: Option<(f64, f64, usize)> = None;
        for &i in candidates {
            let u = segment_parameter(&pts[i], &pts[i + 1], p);
            let q = pts[i].lerp(&pts[i + 1], u);
            let d = (p - q).norm();
            let s = arc[i] + u * (arc[i + 1] - arc[i]);
            let better = match best {
                None => true,
                Some((bd, bs, _)) => d < bd || (d == bd && s < bs),
            };
            if better {
                best = Some((d, s, i));
            }
        }
        match best {
            Some((distance, s, segment)) if distance <= self.radius => Projection::OnGuide { s, segment, distance },
            _ => Projection::OffGuide,
        }
    }
}

/// Arclength of the centreline point nearest to `position`, or
/// [`Projection::OffGuide`] beyond `tube_radius`.
pub fn project_arclength(position: &Vec3, path: &GuidePath, tube_radius: f64) -> Result<Projection> {
    Ok(PathProjector::new(path, tube_radius)?.project(position))
}
