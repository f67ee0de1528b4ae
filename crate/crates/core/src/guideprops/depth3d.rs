use super::solve::minimize_field_norm;
use crate::magnetics::FieldModel;
use crate::model::species::magnetic_moment;
use crate::{AtomState, Error, Mat3, Result, Vec3};
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

const NEIGHBOURS: [(i64, i64, i64); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];

/// Depth of a three-dimensional trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapDepth {
    pub minimum: Vec3,
    pub b_min: f64,
    /// |B| level at which the trapped region first touches the box boundary (T).
    pub spill_field: f64,
    pub depth_energy: f64,
    pub depth_temperature: f64,
}

/// Escape level of the trap around `center`, by flooding a grid over the
/// box `center ± half_extent` in order of |B|. The flood starts at the
/// local grid minimum reached by descending from the centre cell. Grid cells
/// inside a conductor guard act as walls. The minimum itself is refined
/// by a bounded minimization above `center.z - half_extent.z`.
pub fn trap_depth_3d(
    model: &FieldModel,
    state: &AtomState,
    center: &Vec3,
    half_extent: &Vec3,
    counts: [usize; 3],
    t: f64,
) -> Result<TrapDepth> {
    let mu = magnetic_moment(state, model.constants())?;
    let [nx, ny, nz] = counts.map(|c| c.max(3));
    let lo = center - half_extent;
    let step = Vec3::new(
        2.0 * half_extent.x / (nx - 1) as f64,
        2.0 * half_extent.y / (ny - 1) as f64,
        2.0 * half_extent.z / (nz - 1) as f64,
    );
    let idx = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
    let point = |n: usize| {
        let (i, j, k) = (n % nx, (n / nx) % ny, n / (nx * ny));
        lo + Vec3::new(i as f64 * step.x, j as f64 * step.y, k as f64 * step.z)
    };
    let values: Vec<f64> = (0..nx * ny * nz)
        .into_par_iter()
        .map(|n| model.field_at(&point(n), t).map_or(f64::INFINITY, |b| b.norm()))
        .collect();
    // walk downhill from the cell nearest the box centre
    let mut start = idx(nx / 2, ny / 2, nz / 2);
    loop {
        let (i, j, k) = (start % nx, (start / nx) % ny, start / (nx * ny));
        let mut next = start;
        for (di, dj, dk) in NEIGHBOURS {
            let (a, b, c) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
            if a < 0 || b < 0 || c < 0 || a >= nx as i64 || b >= ny as i64 || c >= nz as i64 {
                continue;
            }
            let m = idx(a as usize, b as usize, c as usize);
            if values[m] < values[next] {
                next = m;
            }
        }
        if next == start {
            break;
        }
        start = next;
    }
    if !values[start].is_finite() {
        return Err(Error::Model("depth box lies entirely inside conductors".into()));
    }
    let mut visited = vec![false; values.len()];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((values[start].to_bits(), start)));
    visited[start] = true;
    let mut level: f64 = 0.0;
    let mut spill = f64::INFINITY;
    while let Some(Reverse((bits, n))) = heap.pop() {
        let v = f64::from_bits(bits);
        if !v.is_finite() {
            break;
        }
        level = level.max(v);
        let (i, j, k) = (n % nx, (n / nx) % ny, n / (nx * ny));
        if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
            spill = level;
            break;
        }
        for (di, dj, dk) in NEIGHBOURS {
            let m = idx(
                (i as i64 + di) as usize,
                (j as i64 + dj) as usize,
                (k as i64 + dk) as usize,
            );
            if !visited[m] {
                visited[m] = true;
                // non-negative floats order like their bit patterns
                heap.push(Reverse((values[m].to_bits(), m)));
            }
        }
    }
    if !spill.is_finite() {
        return Err(Error::Model("trap region never reaches the depth box boundary".into()));
    }
    let m = minimize_field_norm(
        model,
        &lo,
        &Mat3::identity(),
        point(start) - lo,
        Some((2, 0.0)),
        t,
    )?;
    let b_min = m.b.norm().min(values[start]);
    let depth_energy = mu * (spill - b_min).max(0.0);
    Ok(TrapDepth {
        minimum: m.point,
        b_min,
        spill_field: spill,
        depth_energy,
        depth_temperature: depth_energy / model.constants().k_b,
    })
}
