use super::ensemble::{sample_ensemble, EnsembleSpec};
use super::losses::{apply_losses, LossConfig, StepInfo};
use super::particle::{particle_rng, LossCause, LossEvent, Particle, Snapshot, Status, StreamPurpose};
use super::potential::{Evaluation, Potential, PotentialMode};
use crate::chipgeom::GuidePath;
use crate::guideprops::{section_at, GuideSection, SectionOptions};
use crate::magnetics::FieldModel;
use crate::{AtomState, Error, Result, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Time-step rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// dt = η/ω_max with ω_max the fastest transverse frequency of the
    /// loaded section (or its quadrupole equivalent) and, for explicitly
    /// modulated fields, the modulation frequency.
    Adaptive { eta: f64 },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Adaptive { eta: 0.05 }
    }
}

/// Fastest transverse oscillation frequency (rad/s) of atoms at
/// temperature `temperature` in `section`. A cloud hotter than µ·Bmin
/// sees the linear part of the potential, where the frequency is
/// √(µ g / (M w)) with the thermal radius w = k_B T/(µ g); the smaller of
/// this and the harmonic frequency applies.
pub fn characteristic_frequency(section: &GuideSection, moment: f64, mass: f64, k_b: f64, temperature: f64) -> f64 {
    let w = k_b * temperature / (moment * section.gradient);
    let linear = (moment * section.gradient / (mass * w)).sqrt();
    match section.frequencies {
        Some([a, b]) => a.max(b).min(linear),
        None => linear,
    }
}

/// Everything needed for one trajectory simulation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: FieldModel,
    pub path: GuidePath,
    /// Arclength of the section where the ensemble is loaded (m).
    pub station: f64,
    pub state: AtomState,
    pub ensemble: EnsembleSpec,
    pub dt: DtPolicy,
    /// Duration (s).
    pub total_time: f64,
    /// Snapshot times within [0, total_time] (s).
    pub snapshot_times: Vec<f64>,
    pub losses: LossConfig,
    pub mode: PotentialMode,
    pub gravity: bool,
    /// Largest velocity change per step (m/s) before a particle is
    /// declared numerically unstable.
    pub max_velocity_kick: f64,
    /// Durations above this emit a warning (s).
    pub duration_warning: Option<f64>,
    pub section: SectionOptions,
}

impl Scenario {
    /// Scenario with default controls: adaptive dt (η = 0.05), default
    /// loss channels, instantaneous potential, gravity off.
    pub fn new(model: FieldModel, path: GuidePath, station: f64, state: AtomState, ensemble: EnsembleSpec, total_time: f64) -> Self {
        Scenario {
            model,
            path,
            station,
            state,
            ensemble,
            dt: DtPolicy::default(),
            total_time,
            snapshot_times: vec![0.0, total_time],
            losses: LossConfig::default(),
            mode: PotentialMode::Instantaneous,
            gravity: false,
            max_velocity_kick: 1.0,
            duration_warning: None,
            section: SectionOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::Scenario(format!("total time must be positive, got {}", self.total_time)));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(0.0..=self.total_time).contains(*t)) {
            return Err(Error::Scenario(format!("snapshot time {t} s outside [0, {}] s", self.total_time)));
        }
        let dt_ok = match self.dt {
            DtPolicy::Fixed { dt } => dt > 0.0 && dt.is_finite(),
            DtPolicy::Adaptive { eta } => eta > 0.0 && eta.is_finite(),
        };
        if !dt_ok {
            return Err(Error::Scenario("time step policy must be positive".into()));
        }
        if !(self.max_velocity_kick > 0.0) {
            return Err(Error::Scenario("velocity kick cap must be positive".into()));
        }
        self.ensemble.validate()?;
        self.losses.validate()?;
        self.state.validate()
    }

    pub fn potential(&self) -> Result<Potential> {
        let gravity = self
            .gravity
            .then(|| -crate::chipgeom::chip_normal() * self.model.constants().g_n);
        Potential::new(self.model.clone(), &self.state, self.mode, gravity)
    }

    /// Guide section at the loading station at t = 0.
    pub fn loading_section(&self) -> Result<GuideSection> {
        section_at(&self.model, &self.path, self.station, 0.0, &self.state, &self.section)
    }

    /// Time step implied by the policy for this scenario.
    pub fn time_step(&self, section: &GuideSection, potential: &Potential) -> f64 {
        match self.dt {
            DtPolicy::Fixed { dt } => dt,
            DtPolicy::Adaptive { eta } => {
                let c = self.model.constants();
                let mut w = characteristic_frequency(
                    section,
                    potential.moment(),
                    potential.mass(),
                    c.k_b,
                    self.ensemble.t_transverse,
                );
                if self.mode == PotentialMode::Instantaneous {
                    if let Some(period) = self.model.modulation_period() {
                        w = w.max(TAU / period);
                    }
                }
                eta / w
            }
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        match self.duration_warning {
            Some(limit) if self.total_time > limit => vec![format!(
                "duration {:.0} ms exceeds the {:.0} ms ohmic-heating limit of the wires",
                self.total_time * 1e3,
                limit * 1e3
            )],
            _ => Vec::new(),
        }
    }
}

/// Step and loss settings for [`propagate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    /// Largest step (s); intervals between checkpoints are split evenly.
    pub dt: f64,
    pub losses: LossConfig,
    /// Run seed selecting the loss random streams.
    pub seed: u64,
    pub max_velocity_kick: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub snapshots: Vec<Snapshot>,
    /// Loss events ordered by particle id.
    pub losses: Vec<LossEvent>,
    /// Largest relative energy deviation |E − E₀|/|E₀| of each particle
    /// while alive.
    pub energy_drift: Vec<f64>,
    /// Ensemble at the final time.
    pub final_particles: Vec<Particle>,
    pub dt: f64,
    pub warnings: Vec<String>,
}

impl SimulationResult {
    pub fn initial_count(&self) -> usize {
        self.final_particles.len()
    }

    /// Median of the per-particle energy drift.
    pub fn median_energy_drift(&self) -> f64 {
        median(&self.energy_drift)
    }

    /// Alive count at time `t` reconstructed from the loss log.
    pub fn alive_at(&self, t: f64) -> usize {
        self.initial_count() - self.losses.iter().filter(|e| e.t <= t).count()
    }

    pub fn lost_by(&self, cause: LossCause, until: f64) -> usize {
        self.losses.iter().filter(|e| e.cause == cause && e.t <= until).count()
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct Trajectory {
    states: Vec<Particle>,
    loss: Option<LossEvent>,
    drift: f64,
}

fn kinetic(mass: f64, v: &Vec3) -> f64 {
    0.5 * mass * v.norm_squared()
}

fn run_particle(potential: &Potential, start: &Particle, t0: f64, checkpoints: &[f64], opts: &PropagationOptions) -> Trajectory {
    let mass = potential.mass();
    let larmor_per_tesla = potential.larmor(1.0);
    let mut rng = particle_rng(opts.seed, start.id, StreamPurpose::Losses);
    let mut p = *start;
    let mut states = Vec::with_capacity(checkpoints.len());
    let mut loss = None;
    let mut drift: f64 = 0.0;
    let mut t = t0;
    let mut current: Option<Evaluation> = None;
    let mut e0 = f64::NAN;
    if p.is_alive() {
        match potential.evaluate(&p.position, t) {
            Ok(ev) => {
                e0 = kinetic(mass, &p.velocity) + ev.energy;
                current = Some(ev);
            }
            Err(_) => {
                p.mark_lost(LossCause::OutOfDomain);
                loss = Some(LossEvent { id: p.id, t, cause: LossCause::OutOfDomain });
            }
        }
    }
    for &target in checkpoints {
        let span = target - t;
        if span > 0.0 && p.is_alive() {
            let n = ((span / opts.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for k in 0..n {
                let ev = current.as_ref().expect("alive particles carry an evaluation");
                let t_end = if k + 1 == n { target } else { t + (k + 1) as f64 * h };
                let v_half = p.velocity + ev.acceleration * (0.5 * h);
                let x1 = p.position + v_half * h;
                let cause = match potential.evaluate(&x1, t_end) {
                    Err(_) => Some(LossCause::OutOfDomain),
                    Ok(next) => {
                        let kick = (ev.acceleration + next.acceleration) * (0.5 * h);
                        if kick.norm() > opts.max_velocity_kick || !x1.iter().all(|c| c.is_finite()) {
                            log::debug!("particle {} unstable at t = {t_end:e} s: |dv| = {:e} m/s", p.id, kick.norm());
                            Some(LossCause::OutOfDomain)
                        } else {
                            let step = StepInfo {
                                field: &ev.field,
                                velocity: v_half,
                                dt: h,
                                larmor_per_tesla,
                            };
                            p.position = x1;
                            p.velocity = v_half + next.acceleration * (0.5 * h);
                            let status = apply_losses(&p, &step, &opts.losses, &mut rng);
                            let e = kinetic(mass, &p.velocity) + next.energy;
                            current = Some(next);
                            match status {
                                Status::Alive => {
                                    drift = drift.max(((e - e0) / e0).abs());
                                    None
                                }
                                Status::Lost(c) => Some(c),
                            }
                        }
                    }
                };
                if let Some(c) = cause {
                    p.position = x1;
                    p.mark_lost(c);
                    loss = Some(LossEvent { id: p.id, t: t_end, cause: c });
                    break;
                }
            }
        }
        t = target;
        states.push(p);
    }
    Trajectory { states, loss, drift }
}

/// Integrates `particles` with velocity Verlet from `t0`, recording the
/// ensemble at each of `times` (sorted, ≥ t0). Particles evolve
/// independently; the result does not depend on the worker count.
pub fn propagate(potential: &Potential, particles: &[Particle], t0: f64, times: &[f64], opts: &PropagationOptions) -> Result<SimulationResult> {
    if !(opts.dt > 0.0) {
        return Err(Error::Scenario("time step must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::Scenario("snapshot times must be sorted and not precede the start".into()));
    }
    opts.losses.validate()?;
    let runs: Vec<Trajectory> = particles
        .par_iter()
        .map(|p| run_particle(potential, p, t0, times, opts))
        .collect();
    let snapshots = times
        .iter()
        .enumerate()
        .map(|(i, &t)| Snapshot {
            t,
            particles: runs.iter().map(|r| r.states[i]).collect(),
        })
        .collect::<Vec<_>>();
    let mut losses: Vec<LossEvent> = runs.iter().filter_map(|r| r.loss).collect();
    losses.sort_by_key(|e| e.id);
    let final_particles = snapshots.last().map_or_else(|| particles.to_vec(), |s| s.particles.clone());
    Ok(SimulationResult {
        snapshots,
        losses,
        energy_drift: runs.iter().map(|r| r.drift).collect(),
        final_particles,
        dt: opts.dt,
        warnings: Vec::new(),
    })
}

/// Samples the ensemble of `scenario` and integrates it to the final time.
/// The returned snapshots are those requested, in ascending time order.
pub fn integrate(scenario: &Scenario) -> Result<SimulationResult> {
    scenario.validate()?;
    let warnings = scenario.warnings();
    for w in &warnings {
        log::warn!("{w}");
    }
    let potential = scenario.potential()?;
    let section = scenario.loading_section()?;
    let particles = sample_ensemble(&scenario.ensemble, &section, &potential, 0.0)?;
    let dt = scenario.time_step(&section, &potential);
    let mut result = run_with(scenario, &potential, &particles, dt)?;
    result.warnings = warnings;
    Ok(result)
}

/// Integrates a given initial ensemble under the controls of `scenario`.
pub fn run_with(scenario: &Scenario, potential: &Potential, particles: &[Particle], dt: f64) -> Result<SimulationResult> {
    let mut requested = scenario.snapshot_times.clone();
    requested.sort_by(f64::total_cmp);
    requested.dedup();
    let mut checkpoints = requested.clone();
    if checkpoints.last() != Some(&scenario.total_time) {
        checkpoints.push(scenario.total_time);
    }
    let opts = PropagationOptions {
        dt,
        losses: scenario.losses,
        seed: scenario.ensemble.seed,
        max_velocity_kick: scenario.max_velocity_kick,
    };
    let mut result = propagate(potential, particles, 0.0, &checkpoints, &opts)?;
    result.snapshots.truncate(requested.len());
    Ok(result)
}
