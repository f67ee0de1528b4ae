use super::types::WireLayout;
use crate::Vec3;
use std::fmt;

/// Segments closer than this count as touching.
const TOUCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    /// Segment `index` does not start where segment `index - 1` ends.
    Disconnected { circuit: String, index: usize },
    ZeroLength { circuit: String, index: usize },
    Intersection {
        circuit_a: String,
        index_a: usize,
        circuit_b: String,
        index_b: usize,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Disconnected { circuit, index } => {
                write!(f, "circuit '{circuit}': disconnected at index {index}")
            }
            Finding::ZeroLength { circuit, index } => {
                write!(f, "circuit '{circuit}': zero-length segment at index {index}")
            }
            Finding::Intersection {
                circuit_a,
                index_a,
                circuit_b,
                index_b,
            } => write!(
                f,
                "self-intersection between '{circuit_a}'[{index_a}] and '{circuit_b}'[{index_b}]"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Minimum distance between segments [p1, q1] and [p2, q2].
pub fn segment_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t) = if a == 0.0 && e == 0.0 {
        (0.0, 0.0)
    } else if a == 0.0 {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e == 0.0 {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Reports disconnected polylines, zero-length segments and crossings
/// between non-adjacent segments. Passes iff there are no findings.
pub fn validate_layout(layout: &WireLayout) -> ValidationReport {
    let mut findings = Vec::new();
    for c in &layout.circuits {
        for (i, s) in c.segments.iter().enumerate() {
            if s.start == s.end {
                findings.push(Finding::ZeroLength {
                    circuit: c.name.clone(),
                    index: i,
                });
            }
            if i > 0 && c.segments[i - 1].end != s.start {
                findings.push(Finding::Disconnected {
                    circuit: c.name.clone(),
                    index: i,
                });
            }
        }
    }

    // sweep over x-sorted bounding boxes
    struct Item {
        circuit: usize,
        index: usize,
        lo: Vec3,
        hi: Vec3,
    }
    let mut items: Vec<Item> = layout
        .circuits
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| {
            c.segments.iter().enumerate().map(move |(i, s)| Item {
                circuit: ci,
                index: i,
                lo: s.start.inf(&s.end),
                hi: s.start.sup(&s.end),
            })
        })
        .collect();
    items.sort_by(|a, b| a.lo.x.total_cmp(&b.lo.x));
    let seg = |it: &Item| &layout.circuits[it.circuit].segments[it.index];
    let mut crossings = Vec::new();
    for (i, a) in items.iter().enumerate() {
        for b in &items[i + 1..] {
            if b.lo.x > a.hi.x + TOUCH_TOLERANCE {
                break;
            }
            if b.lo.y > a.hi.y + TOUCH_TOLERANCE
                || a.lo.y > b.hi.y + TOUCH_TOLERANCE
                || b.lo.z > a.hi.z + TOUCH_TOLERANCE
                || a.lo.z > b.hi.z + TOUCH_TOLERANCE
            {
                continue;
            }
            let (sa, sb) = (seg(a), seg(b));
            let shares_vertex =
                sa.start == sb.end || sa.end == sb.start || sa.start == sb.start || sa.end == sb.end;
            if a.circuit == b.circuit && (a.index.abs_diff(b.index) <= 1 || shares_vertex) {
                continue;
            }
            if segment_distance(&sa.start, &sa.end, &sb.start, &sb.end) < TOUCH_TOLERANCE {
                let (x, y) = if (a.circuit, a.index) < (b.circuit, b.index) { (a, b) } else { (b, a) };
                crossings.push((x.circuit, x.index, y.circuit, y.index));
            }
        }
    }
    crossings.sort_unstable();
    findings.extend(crossings.into_iter().map(|(ca, ia, cb, ib)| Finding::Intersection {
        circuit_a: layout.circuits[ca].name.clone(),
        index_a: ia,
        circuit_b: layout.circuits[cb].name.clone(),
        index_b: ib,
    }));
    ValidationReport { findings }
}
