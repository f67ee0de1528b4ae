//! Circuit current waveforms and the uniform bias schedule.

use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Piecewise-linear function of time, held constant outside its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Model("piecewise-linear function needs at least one knot".into()));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Model("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Model("knot times must be strictly increasing".into()));
        }
        Ok(Self { knots })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            knots: vec![(0.0, value)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn interval(&self, t: f64) -> Option<usize> {
        let k = &self.knots;
        if k.len() < 2 || t <= k[0].0 || t >= k[k.len() - 1].0 {
            return None;
        }
        Some(k.partition_point(|(tk, _)| *tk <= t) - 1)
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        match self.interval(t) {
            Some(i) => {
                let (t0, v0) = k[i];
                let (t1, v1) = k[i + 1];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
            None if t <= k[0].0 => k[0].1,
            None => k[k.len() - 1].1,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.interval(t) {
            Some(i) => {
                let (t0, v0) = self.knots[i];
                let (t1, v1) = self.knots[i + 1];
                (v1 - v0) / (t1 - t0)
            }
            None => 0.0,
        }
    }

    pub fn is_monotone(&self) -> bool {
        let k = &self.knots;
        k.windows(2).all(|w| w[1].1 >= w[0].1) || k.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveformKind {
    Constant { current: f64 },
    Ramp { profile: PiecewiseLinear },
    /// `I(t) = i0 + imod sin(omega t + phase)`
    Sinusoidal { i0: f64, imod: f64, omega: f64, phase: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentWaveform {
    pub name: String,
    pub kind: WaveformKind,
}

impl CurrentWaveform {
    pub fn constant(name: &str, current: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: WaveformKind::Constant { current },
        }
    }

    pub fn ramp(name: &str, knots: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            kind: WaveformKind::Ramp {
                profile: PiecewiseLinear::new(knots)?,
            },
        })
    }

    pub fn sinusoidal(name: &str, i0: f64, imod: f64, omega: f64, phase: f64) -> Result<Self> {
        let w = Self {
            name: name.to_string(),
            kind: WaveformKind::Sinusoidal { i0, imod, omega, phase },
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            WaveformKind::Constant { current } if !current.is_finite() => {
                Err(Error::Model(format!("waveform '{}': non-finite current", self.name)))
            }
            WaveformKind::Sinusoidal { i0, imod, omega, phase } => {
                if !(*omega > 0.0 && omega.is_finite()) {
                    return Err(Error::Model(format!(
                        "waveform '{}': sinusoidal modulation needs omega_mod > 0",
                        self.name
                    )));
                }
                if ![i0, imod, phase].iter().all(|x| x.is_finite()) {
                    return Err(Error::Model(format!("waveform '{}': non-finite parameter", self.name)));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn current(&self, t: f64) -> f64 {
        match &self.kind {
            WaveformKind::Constant { current } => *current,
            WaveformKind::Ramp { profile } => profile.value(t),
            WaveformKind::Sinusoidal { i0, imod, omega, phase } => i0 + imod * (omega * t + phase).sin(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            WaveformKind::Constant { .. } => 0.0,
            WaveformKind::Ramp { profile } => profile.derivative(t),
            WaveformKind::Sinusoidal { imod, omega, phase, .. } => imod * omega * (omega * t + phase).cos(),
        }
    }

    /// Modulation period for sinusoidal waveforms.
    pub fn period(&self) -> Option<f64> {
        match &self.kind {
            WaveformKind::Sinusoidal { omega, .. } => Some(TAU / omega),
            _ => None,
        }
    }
}

/// Uniform bias field `B(t) [cos α(t) ĥ + sin α(t) v̂] + offset`.
///
/// The angle α rotates the field from the horizontal axis ĥ (in the chip
/// plane) towards the vertical axis v̂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasWaveform {
    pub magnitude: PiecewiseLinear,
    pub angle: PiecewiseLinear,
    pub horizontal: Vec3,
    pub vertical: Vec3,
    pub offset: Vec3,
}

impl BiasWaveform {
    pub fn new(
        magnitude: PiecewiseLinear,
        angle: PiecewiseLinear,
        horizontal: Vec3,
        vertical: Vec3,
        offset: Vec3,
    ) -> Result<Self> {
        let (h, v) = (horizontal.norm(), vertical.norm());
        if (h - 1.0).abs() > 1e-12 || (v - 1.0).abs() > 1e-12 || horizontal.dot(&vertical).abs() > 1e-12 {
            return Err(Error::Model("bias axes must be orthonormal".into()));
        }
        if !offset.iter().all(|x| x.is_finite()) {
            return Err(Error::Model("non-finite bias offset".into()));
        }
        Ok(Self {
            magnitude,
            angle,
            horizontal,
            vertical,
            offset,
        })
    }

    /// Time-independent bias equal to `b`.
    pub fn constant(b: Vec3) -> Self {
        Self {
            magnitude: PiecewiseLinear::constant(0.0),
            angle: PiecewiseLinear::constant(0.0),
            horizontal: Vec3::x(),
            vertical: Vec3::z(),
            offset: b,
        }
    }

    pub fn zero() -> Self {
        Self::constant(Vec3::zeros())
    }

    pub fn field(&self, t: f64) -> Vec3 {
        let (s, c) = self.angle.value(t).sin_cos();
        (self.horizontal * c + self.vertical * s) * self.magnitude.value(t) + self.offset
    }

    pub fn derivative(&self, t: f64) -> Vec3 {
        let (s, c) = self.angle.value(t).sin_cos();
        let dir = self.horizontal * c + self.vertical * s;
        let ddir = (self.vertical * c - self.horizontal * s) * self.angle.derivative(t);
        dir * self.magnitude.derivative(t) + ddir * self.magnitude.value(t)
    }

    pub fn is_static(&self) -> bool {
        self.magnitude.knots().len() == 1 && self.angle.knots().len() == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn ramp_interpolates_and_holds() {
        let w = CurrentWaveform::ramp("r", vec![(0.0, 1.0), (1.0, 0.0), (2.0, 0.0)]).unwrap();
        assert_eq!(w.current(-1.0), 1.0);
        assert_eq!(w.current(0.25), 0.75);
        assert_eq!(w.current(1.0), 0.0);
        assert_eq!(w.current(5.0), 0.0);
        assert_eq!(w.derivative(0.5), -1.0);
        assert_eq!(w.derivative(1.5), 0.0);
        assert!(CurrentWaveform::ramp("r", vec![(1.0, 0.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn sinusoid() {
        assert!(CurrentWaveform::sinusoidal("s", 0.1, 0.01, 0.0, 0.0).is_err());
        let w = CurrentWaveform::sinusoidal("s", 0.1, 0.01, 2.0, FRAC_PI_2).unwrap();
        assert!((w.current(0.0) - 0.11).abs() < 1e-15);
        assert!(w.derivative(0.0).abs() < 1e-15);
        assert_eq!(w.period(), Some(std::f64::consts::PI));
    }

    #[test]
    fn bias_rotation_keeps_magnitude() {
        let b = BiasWaveform::new(
            PiecewiseLinear::constant(1e-3),
            PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, FRAC_PI_2)]).unwrap(),
            Vec3::y(),
            Vec3::z(),
            Vec3::zeros(),
        )
        .unwrap();
        for t in [0.0, 0.3, 0.5, 1.0, 2.0] {
            assert!((b.field(t).norm() - 1e-3).abs() < 1e-15);
        }
        assert!((b.field(2.0) - Vec3::new(0.0, 0.0, 1e-3)).norm() < 1e-18);
        let h = 1e-6;
        let fd = (b.field(0.4 + h) - b.field(0.4 - h)) / (2.0 * h);
        assert!((fd - b.derivative(0.4)).norm() < 1e-12);
        assert!(b.angle.is_monotone());
    }
}
