use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};

/// Local guide frame: tangent, in-plane normal and chip normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub tangent: Vec3,
    pub normal: Vec3,
    pub up: Vec3,
}

/// Guide centreline with cumulative arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidePath {
    points: Vec<Vec3>,
    arclength: Vec<f64>,
}

impl GuidePath {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Geometry("guide path needs at least two points".into()));
        }
        let mut arclength = Vec::with_capacity(points.len());
        let mut s = 0.0;
        arclength.push(0.0);
        for w in points.windows(2) {
            let ds = (w[1] - w[0]).norm();
            if !(ds > 0.0) {
                return Err(Error::Geometry("guide path arclength must be strictly increasing".into()));
            }
            s += ds;
            arclength.push(s);
        }
        Ok(GuidePath { points, arclength })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn arclengths(&self) -> &[f64] {
        &self.arclength
    }

    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap()
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Index of the segment containing arclength `s` (clamped to the path).
    pub fn segment_index(&self, s: f64) -> usize {
        let n = self.segment_count();
        match self.arclength.binary_search_by(|x| x.total_cmp(&s)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    pub fn point_at(&self, s: f64) -> Vec3 {
        let i = self.segment_index(s);
        let (s0, s1) = (self.arclength[i], self.arclength[i + 1]);
        let u = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        self.points[i].lerp(&self.points[i + 1], u)
    }

    pub fn segment_tangent(&self, i: usize) -> Vec3 {
        (self.points[i + 1] - self.points[i]).normalize()
    }

    pub fn tangent_at(&self, s: f64) -> Vec3 {
        self.segment_tangent(self.segment_index(s))
    }

    /// Frame at `s` with `up` the chip normal (+z) and `normal = up × tangent`.
    pub fn frame_at(&self, s: f64) -> Frame {
        let tangent = self.tangent_at(s);
        let up = super::chip_normal();
        let normal = up.cross(&tangent).normalize();
        // re-orthogonalise `up` for paths that are not exactly planar
        let up = tangent.cross(&normal);
        Frame { tangent, normal, up }
    }
}
