use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireSegment {
    pub start: Vec3,
    pub end: Vec3,
}

impl WireSegment {
    pub fn new(start: Vec3, end: Vec3) -> Result<Self> {
        let s = WireSegment { start, end };
        if !start.iter().chain(end.iter()).all(|c| c.is_finite()) {
            return Err(Error::Geometry("non-finite segment coordinate".into()));
        }
        if s.length() == 0.0 {
            return Err(Error::Geometry("zero-length segment".into()));
        }
        Ok(s)
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn direction(&self) -> Vec3 {
        (self.end - self.start) / self.length()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    /// Width in the chip plane (m).
    pub width: f64,
    /// Thickness normal to the chip (m).
    pub height: f64,
}

impl CrossSection {
    pub const GUIDE: CrossSection = CrossSection {
        width: 45e-6,
        height: 5e-6,
    };
    pub const U_WIRE: CrossSection = CrossSection {
        width: 200e-6,
        height: 5e-6,
    };
}

impl Default for CrossSection {
    fn default() -> Self {
        Self::GUIDE
    }
}

/// One current path carrying a single bound waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireCircuit {
    pub name: String,
    pub segments: Vec<WireSegment>,
    pub cross_section: CrossSection,
    pub waveform_ref: String,
}

impl WireCircuit {
    /// Builds a connected polyline circuit through `points`.
    pub fn from_points(
        name: impl Into<String>,
        points: &[Vec3],
        cross_section: CrossSection,
        waveform_ref: impl Into<String>,
    ) -> Result<Self> {
        let name = name.into();
        if points.len() < 2 {
            return Err(Error::Geometry(format!("circuit '{name}' needs at least two points")));
        }
        if !(cross_section.width > 0.0 && cross_section.height > 0.0) {
            return Err(Error::Geometry(format!("circuit '{name}': cross-section must be positive")));
        }
        let segments = points
            .windows(2)
            .map(|w| WireSegment::new(w[0], w[1]))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Geometry(format!("circuit '{name}': {e}")))?;
        Ok(WireCircuit {
            name,
            segments,
            cross_section,
            waveform_ref: waveform_ref.into(),
        })
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(WireSegment::length).sum()
    }

    /// Splits the circuit into maximal connected polylines (vertex lists).
    pub fn chains(&self) -> Vec<Vec<Vec3>> {
        let mut chains: Vec<Vec<Vec3>> = Vec::new();
        for seg in &self.segments {
            match chains.last_mut() {
                Some(chain) if *chain.last().unwrap() == seg.start => chain.push(seg.end),
                _ => chains.push(vec![seg.start, seg.end]),
            }
        }
        chains
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WireLayout {
    pub circuits: Vec<WireCircuit>,
}

impl WireLayout {
    pub fn new(circuits: Vec<WireCircuit>) -> Self {
        WireLayout { circuits }
    }

    pub fn circuit(&self, name: &str) -> Option<&WireCircuit> {
        self.circuits.iter().find(|c| c.name == name)
    }

    pub fn segment_count(&self) -> usize {
        self.circuits.iter().map(|c| c.segments.len()).sum()
    }

    /// Axis-aligned bounding box of all wire vertices.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let mut it = self
            .circuits
            .iter()
            .flat_map(|c| c.segments.iter())
            .flat_map(|s| [s.start, s.end]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| (lo.inf(&p), hi.sup(&p))))
    }

    pub fn merge(mut self, other: WireLayout) -> Self {
        self.circuits.extend(other.circuits);
        self
    }
}

impl From<WireCircuit> for WireLayout {
    fn from(c: WireCircuit) -> Self {
        WireLayout { circuits: vec![c] }
    }
}
