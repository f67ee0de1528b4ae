use crate::mcsim::LossEvent;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

pub const FIT_HEADER: &str = "tau_s,N0,residual,window_lo,window_hi";

/// Default start of the fit window (s).
pub const DEFAULT_WINDOW_START: f64 = 0.3;

/// Single-exponential fit N(t) = N0·exp(−t/τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeFit {
    /// Lifetime τ (s).
    pub tau: f64,
    pub n0: f64,
    /// RMS residual of ln N about the fitted line.
    pub residual: f64,
    /// Fit window actually covered by the data (s).
    pub window: (f64, f64),
    pub points: usize,
}

impl LifetimeFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(FIT_HEADER);
        out.push('\n');
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            self.tau, self.n0, self.residual, self.window.0, self.window.1
        );
        out
    }
}

/// Least-squares line through (t, ln N) for the samples with t inside
/// `window` (inclusive; use `f64::INFINITY` for an open end).
pub fn fit_lifetime(series: &[(f64, f64)], window: (f64, f64)) -> Result<LifetimeFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    if pts.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points in the window, got {}", pts.len())));
    }
    if let Some((t, n)) = pts.iter().find(|(_, n)| !(*n > 0.0)) {
        return Err(Error::Fit(format!("non-positive count {n} at t = {t} s")));
    }
    let n = pts.len() as f64;
    let (mt, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, c)| (a + t / n, b + c.ln() / n));
    let (mut stt, mut sty) = (0.0, 0.0);
    for (t, c) in &pts {
        stt += (t - mt).powi(2);
        sty += (t - mt) * (c.ln() - my);
    }
    if !(stt > 0.0) {
        return Err(Error::Fit("all samples at the same time".into()));
    }
    let slope = sty / stt;
    if !(slope < 0.0) {
        return Err(Error::Fit(format!("no decay in the window (slope {slope:e} 1/s)")));
    }
    let intercept = my - slope * mt;
    let residual = (pts
        .iter()
        .map(|(t, c)| (c.ln() - intercept - slope * t).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(LifetimeFit {
        tau: -1.0 / slope,
        n0: intercept.exp(),
        residual,
        window: (lo, hi),
        points: pts.len(),
    })
}

/// Alive counts at `times` from an initial population and its loss log.
pub fn survival_series(initial: usize, losses: &[LossEvent], times: &[f64]) -> Vec<(f64, f64)> {
    let mut when: Vec<f64> = losses.iter().map(|e| e.t).collect();
    when.sort_by(f64::total_cmp);
    times
        .iter()
        .map(|&t| {
            let gone = when.partition_point(|&x| x <= t);
            (t, (initial - gone) as f64)
        })
        .collect()
}

/// Fraction of the initial population lost by time `t`.
pub fn loss_fraction(initial: usize, losses: &[LossEvent], t: f64) -> f64 {
    losses.iter().filter(|e| e.t <= t).count() as f64 / initial as f64
}
