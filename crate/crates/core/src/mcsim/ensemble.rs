use super::particle::{particle_rng, Particle, StreamPurpose};
use super::potential::Potential;
use crate::guideprops::GuideSection;
use crate::{Error, Result, Vec3};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Boltzmann exponent at which the proposal box is cut off.
const BOX_EXPONENT: f64 = 10.0;
/// Largest box half-extent searched along any axis (m).
const MAX_EXTENT: f64 = 20e-3;
/// Smallest accepted overall rejection efficiency.
const MIN_EFFICIENCY: f64 = 1e-3;
/// Proposals allowed per particle and stage before giving up.
const MAX_PROPOSALS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub count: usize,
    /// Temperature of the two transverse degrees of freedom (K).
    pub t_transverse: f64,
    /// Temperature along the guide (K).
    pub t_longitudinal: f64,
    /// Cloud centre; defaults to the section minimum.
    pub center: Option<Vec3>,
    /// Longitudinal axis; defaults to the guide tangent at the section.
    pub axis: Option<Vec3>,
    /// Axial angular frequency (rad/s) of the trap holding the cloud before
    /// release. Adds ½Mω²u² to the longitudinal potential; needed when the
    /// guide itself does not confine along its axis.
    pub longitudinal_frequency: Option<f64>,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Scenario("ensemble needs at least one particle".into()));
        }
        if !(self.t_transverse > 0.0 && self.t_longitudinal > 0.0) {
            return Err(Error::Scenario("ensemble temperatures must be positive".into()));
        }
        if let Some(w) = self.longitudinal_frequency {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Scenario("longitudinal frequency must be positive".into()));
            }
        }
        if let Some(a) = self.axis {
            if !(a.norm() > 0.0) {
                return Err(Error::Scenario("ensemble axis must be non-zero".into()));
            }
        }
        Ok(())
    }
}

/// Local frame and potential used to draw initial positions.
struct Sampler<'a> {
    potential: &'a Potential,
    t: f64,
    center: Vec3,
    axes: [Vec3; 3],
    kt: [f64; 2],
    spring: f64,
    u0: f64,
}

impl Sampler<'_> {
    fn energy(&self, p: &Vec3) -> Option<f64> {
        self.potential.energy(p, self.t).ok()
    }

    /// On-axis energy relative to the minimum plus the holding trap, in
    /// units of kT∥.
    fn longitudinal_exponent(&self, u: f64) -> Option<f64> {
        let e = self.energy(&(self.center + self.axes[0] * u))?;
        Some(((e - self.u0).max(0.0) + 0.5 * self.spring * u * u) / self.kt[1])
    }

    fn exponent(&self, dir: usize, r: f64) -> Option<f64> {
        if dir == 0 {
            self.longitudinal_exponent(r)
        } else {
            let e = self.energy(&(self.center + self.axes[dir] * r))?;
            Some((e - self.u0).max(0.0) / self.kt[0])
        }
    }

    /// Distance along ±axis `dir` at which the Boltzmann exponent reaches
    /// the cut-off. The search stops early at a conductor guard or at the
    /// top of a barrier lower than the cut-off, so the box then covers the
    /// trapping region only.
    fn extent(&self, dir: usize, sign: f64) -> Result<f64> {
        let f = |r: f64| self.exponent(dir, sign * r);
        let mut before = 0.0;
        let (mut lo, mut lo_x) = (0.0, 0.0);
        let mut hi = 1e-7;
        loop {
            match f(hi) {
                Some(x) if x >= BOX_EXPONENT => break,
                None => break,
                Some(x) if lo_x > 0.5 && x < lo_x => return Ok(self.barrier(dir, sign, before, hi)),
                Some(x) => {
                    before = lo;
                    lo = hi;
                    lo_x = x;
                    hi *= 2.0;
                    if hi > MAX_EXTENT {
                        return Err(Error::Sampling(0.0));
                    }
                }
            }
        }
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            match f(mid) {
                Some(x) if x < BOX_EXPONENT => lo = mid,
                _ => hi = mid,
            }
        }
        Ok(hi)
    }

    /// Position of the highest exponent on `[a, b]` along ±axis `dir`.
    fn barrier(&self, dir: usize, sign: f64, mut a: f64, mut b: f64) -> f64 {
        let f = |r: f64| self.exponent(dir, sign * r).unwrap_or(f64::INFINITY);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    /// Lowest energy found on lines through the centre along the axes.
    fn scan_minimum(&self, extents: &[[f64; 2]; 3]) -> f64 {
        let mut best = self.u0;
        for (dir, [neg, pos]) in extents.iter().enumerate() {
            for k in 0..=128 {
                let r = -neg + (neg + pos) * k as f64 / 128.0;
                if let Some(e) = self.energy(&(self.center + self.axes[dir] * r)) {
                    best = best.min(e);
                }
            }
        }
        best
    }

    fn extents(&self) -> Result<[[f64; 2]; 3]> {
        let mut out = [[0.0; 2]; 3];
        for (dir, e) in out.iter_mut().enumerate() {
            *e = [self.extent(dir, -1.0)?, self.extent(dir, 1.0)?];
        }
        Ok(out)
    }
}

/// Draws `spec.count` particles: positions from the Boltzmann density of
/// the local potential by rejection sampling, velocities from
/// Maxwell–Boltzmann distributions with separate longitudinal and
/// transverse temperatures. Transverse directions follow the principal
/// axes of `section`.
///
/// The longitudinal coordinate u is drawn first with weight
/// exp(−[U(c + u ê) − U₀ + ½Mω²u²]/kT∥), then the transverse offset with
/// weight exp(−[U(x) − U(c + u ê)]/kT⊥).
pub fn sample_ensemble(spec: &EnsembleSpec, section: &GuideSection, potential: &Potential, t: f64) -> Result<Vec<Particle>> {
    spec.validate()?;
    let k_b = potential.model().constants().k_b;
    let mass = potential.mass();
    let center = spec.center.unwrap_or(section.position);
    let axis = spec.axis.unwrap_or(section.frame.tangent).normalize();
    let e1 = section.principal_axes[0] - axis * axis.dot(&section.principal_axes[0]);
    if !(e1.norm() > 1e-6) {
        return Err(Error::Scenario("ensemble axis lies in the section plane".into()));
    }
    let e1 = e1.normalize();
    let e2 = axis.cross(&e1);
    let mut sampler = Sampler {
        potential,
        t,
        center,
        axes: [axis, e1, e2],
        kt: [k_b * spec.t_transverse, k_b * spec.t_longitudinal],
        spring: spec.longitudinal_frequency.map_or(0.0, |w| mass * w * w),
        u0: potential.energy(&center, t)?,
    };
    let mut extents = sampler.extents()?;
    let refined = sampler.scan_minimum(&extents);
    if refined < sampler.u0 {
        sampler.u0 = refined;
        extents = sampler.extents()?;
    }

    let sigma_v = [
        (sampler.kt[1] / mass).sqrt(),
        (sampler.kt[0] / mass).sqrt(),
        (sampler.kt[0] / mass).sqrt(),
    ];
    let draw = |id: u64| -> Result<(Particle, usize, usize)> {
        let mut rng = particle_rng(spec.seed, id, StreamPurpose::Sampling);
        let span = |rng: &mut rand_chacha::ChaCha8Rng, e: [f64; 2]| -e[0] + (e[0] + e[1]) * rng.random::<f64>();
        let mut proposals = 0;
        let u = loop {
            proposals += 1;
            if proposals > MAX_PROPOSALS {
                return Err(Error::Sampling(1.0 / MAX_PROPOSALS as f64));
            }
            let u = span(&mut rng, extents[0]);
            let accept: f64 = rng.random();
            if let Some(x) = sampler.longitudinal_exponent(u) {
                if accept < (-x).exp() {
                    break u;
                }
            }
        };
        let on_axis = center + axis * u;
        let ua = sampler.energy(&on_axis).unwrap_or(sampler.u0);
        let mut transverse = 0;
        let position = loop {
            transverse += 1;
            if transverse > MAX_PROPOSALS {
                return Err(Error::Sampling(1.0 / MAX_PROPOSALS as f64));
            }
            let p = on_axis + e1 * span(&mut rng, extents[1]) + e2 * span(&mut rng, extents[2]);
            let accept: f64 = rng.random();
            if let Some(e) = sampler.energy(&p) {
                if accept < (-(e - ua).max(0.0) / sampler.kt[0]).exp() {
                    break p;
                }
            }
        };
        let mut velocity = Vec3::zeros();
        for (a, s) in sampler.axes.iter().zip(sigma_v) {
            let n: f64 = rng.sample(StandardNormal);
            velocity += a * (n * s);
        }
        Ok((Particle::new(id, position, velocity), proposals, transverse))
    };
    let drawn: Vec<(Particle, usize, usize)> =
        (0..spec.count as u64).into_par_iter().map(draw).collect::<Result<_>>()?;
    let n = drawn.len() as f64;
    let longitudinal: usize = drawn.iter().map(|d| d.1).sum();
    let transverse: usize = drawn.iter().map(|d| d.2).sum();
    let efficiency = (n / longitudinal as f64) * (n / transverse as f64);
    if efficiency < MIN_EFFICIENCY {
        return Err(Error::Sampling(efficiency));
    }
    Ok(drawn.into_iter().map(|d| d.0).collect())
}
