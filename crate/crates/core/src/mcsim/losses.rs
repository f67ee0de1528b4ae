use super::particle::{LossCause, Particle, Status};
use crate::magnetics::FieldSample;
use crate::{Error, Result, Vec3};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Axis-aligned region outside of which a particle counts as escaped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl DomainBox {
    pub fn new(lo: Vec3, hi: Vec3) -> Result<Self> {
        if (0..3).all(|i| lo[i] < hi[i]) {
            Ok(DomainBox { lo, hi })
        } else {
            Err(Error::Scenario(format!("empty domain box {lo:?}..{hi:?}")))
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }
}

/// Loss channels. A channel is disabled by an infinite lifetime, an
/// infinite Majorana threshold with a zero field floor, or no domain box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Background-gas lifetime τ_bg (s).
    pub tau_background: f64,
    /// Largest tolerated ratio of field-direction rotation rate to the
    /// local Larmor frequency.
    pub majorana_threshold: f64,
    /// Particles seeing |B| below this floor (T) are spin-flipped.
    pub b_floor: f64,
    pub domain: Option<DomainBox>,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            tau_background: f64::INFINITY,
            majorana_threshold: 1.0,
            b_floor: 1e-9,
            domain: None,
        }
    }
}

impl LossConfig {
    /// No loss channel active.
    pub fn disabled() -> Self {
        LossConfig {
            tau_background: f64::INFINITY,
            majorana_threshold: f64::INFINITY,
            b_floor: 0.0,
            domain: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_background > 0.0) {
            return Err(Error::Scenario(format!(
                "background lifetime must be positive, got {}",
                self.tau_background
            )));
        }
        let t = self.majorana_threshold;
        if !(t > 0.0 && (t <= 1.0 || t == f64::INFINITY)) {
            return Err(Error::Scenario(format!(
                "Majorana threshold must lie in (0, 1] or be infinite, got {t}"
            )));
        }
        if !(self.b_floor >= 0.0 && self.b_floor.is_finite()) {
            return Err(Error::Scenario(format!("field floor must be >= 0, got {}", self.b_floor)));
        }
        if let Some(d) = &self.domain {
            DomainBox::new(d.lo, d.hi)?;
        }
        Ok(())
    }

    fn majorana_enabled(&self) -> bool {
        self.b_floor > 0.0 || self.majorana_threshold.is_finite()
    }
}

/// What the integrator knows about one completed step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo<'a> {
    /// Field, Jacobian and ∂B/∂t at the start of the step.
    pub field: &'a FieldSample,
    /// Mean velocity over the step (m/s).
    pub velocity: Vec3,
    /// Step length (s).
    pub dt: f64,
    /// Larmor frequency per tesla (rad/(s·T)).
    pub larmor_per_tesla: f64,
}

/// Smallest |B| met during the step and the ratio of field-direction
/// rotation rate to Larmor frequency there. The field along the step is
/// linearized as B(τ) = B₀ + (J·v + ∂B/∂t) τ, which is exact near a
/// quadrupole zero.
pub fn step_adiabaticity(step: &StepInfo) -> (f64, f64) {
    let b0 = step.field.b;
    let w = step.field.jacobian * step.velocity + step.field.db_dt;
    let ww = w.norm_squared();
    let tau = if ww > 0.0 {
        (-b0.dot(&w) / ww).clamp(0.0, step.dt)
    } else {
        0.0
    };
    let b = b0 + w * tau;
    let n = b.norm();
    if n == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let dir = b / n;
    let rotation = (w - dir * dir.dot(&w)).norm() / n;
    (n, rotation / (step.larmor_per_tesla * n))
}

/// Applies the loss channels to a particle that has just completed a step
/// ending at its current position. Returns the resulting status.
pub fn apply_losses<R: Rng>(particle: &Particle, step: &StepInfo, cfg: &LossConfig, rng: &mut R) -> Status {
    debug_assert!(particle.is_alive());
    // one uniform per step keeps the stream aligned whichever channels fire
    let u: f64 = rng.random();
    if let Some(d) = &cfg.domain {
        if !d.contains(&particle.position) {
            return Status::Lost(LossCause::OverBarrier);
        }
    }
    if cfg.majorana_enabled() {
        let (b, ratio) = step_adiabaticity(step);
        if b < cfg.b_floor || ratio > cfg.majorana_threshold {
            return Status::Lost(LossCause::Majorana);
        }
    }
    if cfg.tau_background.is_finite() && u < -(-step.dt / cfg.tau_background).exp_m1() {
        return Status::Lost(LossCause::Background);
    }
    Status::Alive
}
