use super::section::{section_at, GuideSection, SectionOptions};
use crate::chipgeom::GuidePath;
use crate::magnetics::{BiasWaveform, FieldModel};
use crate::model::species::magnetic_moment;
use crate::{AtomState, Error, Result, Vec3};
use rayon::prelude::*;
use std::fmt::Write;

pub const SCAN_HEADER: &str = "B_gauss,I_amp,height_um,gradient_G_per_cm,depth_uK,Bmin_gauss";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Bias direction for every row.
    pub direction: Vec3,
    /// Station along the path; defaults to mid-path.
    pub station: Option<f64>,
    pub t: f64,
    pub section: SectionOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            direction: Vec3::z(),
            station: None,
            t: 0.0,
            section: SectionOptions::default(),
        }
    }
}

#[derive(Debug)]
pub struct ScanRow {
    pub bias: f64,
    pub current: f64,
    pub section: Result<GuideSection>,
}

#[derive(Debug)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Effective moment used for the depth column (J/T).
    pub moment: f64,
}

impl ScanTable {
    pub fn successful(&self) -> impl Iterator<Item = (&ScanRow, &GuideSection)> {
        self.rows.iter().filter_map(|r| r.section.as_ref().ok().map(|s| (r, s)))
    }

    /// Height strictly decreasing and gradient strictly increasing with
    /// bias among successful rows, at each current.
    pub fn is_monotone(&self) -> bool {
        let mut rows: Vec<_> = self.successful().collect();
        rows.sort_by(|a, b| a.0.current.total_cmp(&b.0.current).then(a.0.bias.total_cmp(&b.0.bias)));
        rows.windows(2).all(|w| {
            w[0].0.current != w[1].0.current
                || (w[1].1.height < w[0].1.height && w[1].1.gradient > w[0].1.gradient)
        })
    }

    pub fn to_csv(&self, k_b: f64) -> String {
        let mut out = String::from(SCAN_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:.6},{:.6},", r.bias / 1e-4, r.current);
            match &r.section {
                Ok(s) => {
                    let _ = writeln!(
                        out,
                        "{:.6},{:.6},{:.6},{:.9}",
                        s.height * 1e6,
                        s.gradient * 100.0,
                        s.depth_energy / k_b * 1e6,
                        s.b_min / 1e-4
                    );
                }
                Err(_) => out.push_str("nan,nan,nan,nan\n"),
            }
        }
        out
    }
}

/// Characterizes the guide at one station for each bias magnitude.
/// Rows that fail keep their error; the scan continues.
pub fn guide_scan(
    model: &FieldModel,
    path: &GuidePath,
    biases: &[f64],
    state: &AtomState,
    opts: &ScanOptions,
) -> Result<ScanTable> {
    if biases.is_empty() {
        return Err(Error::Model("bias list is empty".into()));
    }
    let moment = magnetic_moment(state, model.constants())?;
    let station = opts.station.unwrap_or(0.5 * path.length());
    let direction = opts.direction.normalize();
    let current = model
        .currents(opts.t)
        .into_iter()
        .fold(0.0, |a: f64, c| if c.abs() > a.abs() { c } else { a });
    let rows = biases
        .par_iter()
        .map(|&b| {
            let m = model.clone().with_bias(BiasWaveform::constant(direction * b));
            ScanRow {
                bias: b,
                current,
                section: section_at(&m, path, station, opts.t, state, &opts.section),
            }
        })
        .collect();
    Ok(ScanTable { rows, moment })
}
