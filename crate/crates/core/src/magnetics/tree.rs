//! Source chains: exact summation over contiguous polylines, with an
//! optional binary tree that replaces distant sub-polylines by their
//! chord plus the dipole moment of the closing loop.

use super::kernel::{distance_squared, unit_dipole, unit_segment};
use crate::{Error, Mat3, Result, Vec3};

/// Far-field acceleration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    /// Opening angle: a node of radius ρ at distance R is approximated
    /// when ρ < θ R.
    pub theta: f64,
    /// Maximum number of segments in a leaf.
    pub leaf_size: usize,
}

impl Default for FarField {
    fn default() -> Self {
        Self {
            theta: 0.2,
            leaf_size: 8,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    lo: usize,
    hi: usize,
    center: Vec3,
    radius: f64,
    dipole: Vec3,
    children: Option<(usize, usize)>,
}

/// Connected polyline carrying `weight` times its circuit current.
#[derive(Debug, Clone)]
pub(crate) struct Chain {
    pub points: Vec<Vec3>,
    pub weight: f64,
    nodes: Vec<Node>,
    theta: f64,
}

impl Chain {
    pub fn new(points: Vec<Vec3>, weight: f64, far_field: Option<FarField>) -> Self {
        let mut chain = Self {
            points,
            weight,
            nodes: Vec::new(),
            theta: 0.0,
        };
        if let Some(ff) = far_field {
            chain.theta = ff.theta;
            let n = chain.points.len() - 1;
            if n > ff.leaf_size {
                chain.build(0, n, ff.leaf_size.max(1));
            }
        }
        chain
    }

    fn build(&mut self, lo: usize, hi: usize, leaf: usize) -> usize {
        let pts = &self.points[lo..=hi];
        let center = pts.iter().sum::<Vec3>() / pts.len() as f64;
        let radius = pts.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
        let mut dipole = Vec3::zeros();
        for k in 0..pts.len() {
            let a = pts[k] - center;
            let b = pts[(k + 1) % pts.len()] - center;
            dipole += a.cross(&b);
        }
        dipole *= 0.5;
        let idx = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            center,
            radius,
            dipole,
            children: None,
        });
        if hi - lo > leaf {
            let mid = (lo + hi) / 2;
            let l = self.build(lo, mid, leaf);
            let r = self.build(mid, hi, leaf);
            self.nodes[idx].children = Some((l, r));
        }
        idx
    }

    /// Adds the field of this chain per unit `µ0 I / 4π` of circuit current.
    pub fn accumulate(&self, p: &Vec3, guard: f64, b: &mut Vec3, mut j: Option<&mut Mat3>) -> Result<()> {
        let mut acc_b = Vec3::zeros();
        let mut acc_j = Mat3::zeros();
        let want_j = j.is_some();
        if self.nodes.is_empty() {
            self.exact(0, self.points.len() - 1, p, guard, &mut acc_b, want_j.then_some(&mut acc_j))?;
        } else {
            let mut stack = [0usize; 128];
            let mut top = 1;
            while top > 0 {
                top -= 1;
                let node = &self.nodes[stack[top]];
                let dist = (p - node.center).norm();
                match node.children {
                    Some(_) if dist * self.theta > node.radius && dist - node.radius > guard => {
                        let mut jm = want_j.then_some(&mut acc_j);
                        let r1 = p - self.points[node.lo];
                        let r2 = p - self.points[node.hi];
                        acc_b += unit_segment(&r1, r1.norm(), &r2, r2.norm(), jm.as_deref_mut());
                        acc_b += unit_dipole(&node.dipole, &(p - node.center), jm);
                    }
                    Some((l, r)) => {
                        stack[top] = r;
                        stack[top + 1] = l;
                        top += 2;
                    }
                    None => {
                        self.exact(node.lo, node.hi, p, guard, &mut acc_b, want_j.then_some(&mut acc_j))?;
                    }
                }
            }
        }
        *b += acc_b * self.weight;
        if let Some(j) = j.as_deref_mut() {
            *j += acc_j * self.weight;
        }
        Ok(())
    }

    fn exact(&self, lo: usize, hi: usize, p: &Vec3, guard: f64, b: &mut Vec3, mut j: Option<&mut Mat3>) -> Result<()> {
        let guard2 = guard * guard;
        let mut r1 = p - self.points[lo];
        let mut n1 = r1.norm();
        for q in &self.points[lo + 1..=hi] {
            let r2 = p - q;
            let n2 = r2.norm();
            // cheap reject before the exact distance test
            let seg_len2 = (r1 - r2).norm_squared();
            if (n1.min(n2)).powi(2) < guard2 + seg_len2 {
                let d2 = distance_squared(&r1, &r2);
                if d2 < guard2 {
                    return Err(Error::InsideConductor {
                        distance: d2.sqrt(),
                        guard,
                    });
                }
            }
            *b += unit_segment(&r1, n1, &r2, n2, j.as_deref_mut());
            r1 = r2;
            n1 = n2;
        }
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }
}
