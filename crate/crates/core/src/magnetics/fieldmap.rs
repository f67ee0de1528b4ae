use super::FieldModel;
use crate::Vec3;
use std::fmt::Write;

pub const FIELD_MAP_HEADER: &str = "x,y,z,t,Bx,By,Bz,Bnorm";

/// Regular grid between `lo` and `hi` with `counts` points per axis
/// (a count of 1 uses `lo`), ordered x fastest.
pub fn grid_points(lo: Vec3, hi: Vec3, counts: [usize; 3]) -> Vec<Vec3> {
    let coord = |axis: usize, i: usize| {
        if counts[axis] <= 1 {
            lo[axis]
        } else {
            lo[axis] + (hi[axis] - lo[axis]) * i as f64 / (counts[axis] - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(counts.iter().product());
    for k in 0..counts[2].max(1) {
        for j in 0..counts[1].max(1) {
            for i in 0..counts[0].max(1) {
                out.push(Vec3::new(coord(0, i), coord(1, j), coord(2, k)));
            }
        }
    }
    out
}

/// CSV field samples for every (time, point) pair. Points inside a
/// conductor guard get `nan` field columns.
pub fn field_map_csv(model: &FieldModel, points: &[Vec3], times: &[f64]) -> String {
    let mut out = String::from(FIELD_MAP_HEADER);
    out.push('\n');
    for &t in times {
        for p in points {
            let _ = write!(out, "{:.9e},{:.9e},{:.9e},{:.9e},", p.x, p.y, p.z, t);
            match model.field_at(p, t) {
                Ok(b) => {
                    let _ = writeln!(out, "{:.9e},{:.9e},{:.9e},{:.9e}", b.x, b.y, b.z, b.norm());
                }
                Err(_) => out.push_str("nan,nan,nan,nan\n"),
            }
        }
    }
    out
}
