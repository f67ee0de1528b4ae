use super::projection::{PathProjector, Projection};
use crate::mcsim::Snapshot;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

pub const PROFILE_HEADER: &str = "bin_center,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    Counts,
    /// Counts divided by (total count × bin width), integrating to one.
    Density,
}

/// Equal-width bins over `[lo, hi]`. Values outside the range are counted
/// in the first or last bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Scenario(format!("need at least two bins, got {count}")));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Scenario(format!("bin range [{lo}, {hi}] is empty")));
        }
        Ok(Bins { lo, hi, count })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn index(&self, x: f64) -> usize {
        (((x - self.lo) / self.width()).floor().max(0.0) as usize).min(self.count - 1)
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / self.count as f64)
            .collect()
    }
}

/// Histogram of alive particles over arclength or velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1D {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalization: Normalization,
    /// Alive particles outside the guide tube.
    pub off_guide: usize,
    /// Particles no longer alive.
    pub lost: usize,
    /// Raw values that were binned, in particle order.
    pub values: Vec<f64>,
}

impl Profile1D {
    pub fn from_values(values: Vec<f64>, bins: &Bins, off_guide: usize, lost: usize) -> Self {
        let mut counts = vec![0u64; bins.count];
        for &v in &values {
            counts[bins.index(v)] += 1;
        }
        Profile1D {
            edges: bins.edges(),
            counts,
            normalization: Normalization::Counts,
            off_guide,
            lost,
            values,
        }
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    /// True when no particle was binned.
    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Bin values under the selected normalization.
    pub fn values_normalized(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| match self.normalization {
                Normalization::Counts => c as f64,
                Normalization::Density if total > 0.0 => c as f64 / (total * (w[1] - w[0])),
                Normalization::Density => 0.0,
            })
            .collect()
    }

    /// Normalized values convolved with a Gaussian kernel whose standard
    /// deviation is one bin.
    pub fn smoothed(&self) -> Vec<f64> {
        smooth(&self.values_normalized(), 1.0)
    }

    pub fn mean(&self) -> f64 {
        let n = self.values.len() as f64;
        self.values.iter().sum::<f64>() / n
    }

    /// Central second moment of the binned values.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.values.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(PROFILE_HEADER);
        out.push('\n');
        for (c, v) in self.centers().iter().zip(self.values_normalized()) {
            let _ = writeln!(out, "{c:e},{v:e}");
        }
        out
    }
}

/// Convolution with a Gaussian of standard deviation `sigma` bins,
/// truncated at 4σ and renormalized at the edges.
pub fn smooth(values: &[f64], sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-r..=r).map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp()).collect();
    (0..values.len() as i64)
        .map(|i| {
            let (mut acc, mut w) = (0.0, 0.0);
            for (k, kv) in (-r..=r).zip(&kernel) {
                let j = i + k;
                if j >= 0 && j < values.len() as i64 {
                    acc += kv * values[j as usize];
                    w += kv;
                }
            }
            acc / w
        })
        .collect()
}

fn project_alive(snapshot: &Snapshot, projector: &PathProjector) -> (Vec<(f64, usize, usize)>, usize, usize) {
    let mut on = Vec::new();
    let mut off = 0;
    let mut lost = 0;
    for (k, p) in snapshot.particles.iter().enumerate() {
        if !p.is_alive() {
            lost += 1;
            continue;
        }
        match projector.project(&p.position) {
            Projection::OnGuide { s, segment, .. } => on.push((s, segment, k)),
            Projection::OffGuide => off += 1,
        }
    }
    (on, off, lost)
}

/// Histogram of arclength over alive particles inside the guide tube.
pub fn density_profile(snapshot: &Snapshot, projector: &PathProjector, bins: &Bins) -> Profile1D {
    let (on, off, lost) = project_alive(snapshot, projector);
    Profile1D::from_values(on.into_iter().map(|(s, _, _)| s).collect(), bins, off, lost)
}

/// Histogram of the velocity component along the local path tangent.
pub fn velocity_profile(snapshot: &Snapshot, projector: &PathProjector, bins: &Bins) -> Profile1D {
    let (on, off, lost) = project_alive(snapshot, projector);
    let path = projector.path();
    let values = on
        .into_iter()
        .map(|(_, seg, k)| snapshot.particles[k].velocity.dot(&path.segment_tangent(seg)))
        .collect();
    Profile1D::from_values(values, bins, off, lost)
}
