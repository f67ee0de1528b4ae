//! Plain-text geometry files: one segment per line,
//! `circuit_name x1 y1 z1 x2 y2 z2` in metres.
//!
//! Lines starting with `#` are comments. A comment of the form
//! `# circuit <name> <width> <height> <waveform_ref>` carries circuit
//! metadata. Coordinates are written in shortest round-trip form, so a
//! write/read cycle is bit-exact.

use super::types::{CrossSection, WireCircuit, WireLayout, WireSegment};
use crate::{Error, Result, Vec3};

pub fn write_geometry(layout: &WireLayout) -> String {
    let mut out = String::new();
    for c in &layout.circuits {
        out.push_str(&format!(
            "# circuit {} {} {} {}\n",
            c.name, c.cross_section.width, c.cross_section.height, c.waveform_ref
        ));
    }
    for c in &layout.circuits {
        for s in &c.segments {
            out.push_str(&format!(
                "{} {} {} {} {} {} {}\n",
                c.name, s.start.x, s.start.y, s.start.z, s.end.x, s.end.y, s.end.z
            ));
        }
    }
    out
}

pub fn read_geometry(text: &str) -> Result<WireLayout> {
    let mut circuits: Vec<WireCircuit> = Vec::new();
    let index_of = |circuits: &mut Vec<WireCircuit>, name: &str| -> usize {
        if let Some(i) = circuits.iter().position(|c| c.name == name) {
            return i;
        }
        circuits.push(WireCircuit {
            name: name.to_string(),
            segments: Vec::new(),
            cross_section: CrossSection::GUIDE,
            waveform_ref: name.to_string(),
        });
        circuits.len() - 1
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Geometry(format!("line {}: {msg}", lineno + 1));
        if let Some(comment) = line.strip_prefix('#') {
            let f: Vec<&str> = comment.split_whitespace().collect();
            if f.first() == Some(&"circuit") {
                if f.len() != 5 {
                    return Err(bad("circuit metadata needs name, width, height, waveform"));
                }
                let width: f64 = f[2].parse().map_err(|_| bad("bad width"))?;
                let height: f64 = f[3].parse().map_err(|_| bad("bad height"))?;
                let i = index_of(&mut circuits, f[1]);
                circuits[i].cross_section = CrossSection { width, height };
                circuits[i].waveform_ref = f[4].to_string();
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 7 {
            return Err(bad("expected 'name x1 y1 z1 x2 y2 z2'"));
        }
        let mut c = [0.0; 6];
        for (k, tok) in f[1..].iter().enumerate() {
            c[k] = tok.parse().map_err(|_| bad("malformed coordinate"))?;
        }
        // segments are validated by `validate_layout`, not rejected here
        let seg = WireSegment {
            start: Vec3::new(c[0], c[1], c[2]),
            end: Vec3::new(c[3], c[4], c[5]),
        };
        if !seg.start.iter().chain(seg.end.iter()).all(|x| x.is_finite()) {
            return Err(bad("non-finite coordinate"));
        }
        let i = index_of(&mut circuits, f[0]);
        circuits[i].segments.push(seg);
    }
    circuits.retain(|c| !c.segments.is_empty());
    if circuits.is_empty() {
        return Err(Error::Geometry("geometry file contains no segments".into()));
    }
    Ok(WireLayout { circuits })
}
