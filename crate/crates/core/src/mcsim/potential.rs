use crate::magnetics::{FieldModel, FieldSample};
use crate::model::species::magnetic_moment;
use crate::topdynamics::AveragedPotential;
use crate::{AtomState, Error, Result, Vec3};
use serde::{Deserialize, Serialize};

/// Floor applied to |B| when forming ∇|B| = JᵀB/|B|, so the force stays
/// finite at a quadrupole zero.
pub const FORCE_FIELD_FLOOR: f64 = 1e-9;

/// How the trapping potential seen by the atoms is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialMode {
    /// U = µ_eff |B(x, t)| with the instantaneous field.
    #[default]
    Instantaneous,
    /// U = µ_eff ⟨|B(x, t)|⟩ averaged over one modulation period with a
    /// fixed number of quadrature samples.
    TopAveraged { samples: usize },
}

/// Force, energy and instantaneous field at one point and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Acceleration (m/s²).
    pub acceleration: Vec3,
    /// Potential energy (J).
    pub energy: f64,
    /// Instantaneous field, Jacobian and explicit time derivative.
    pub field: FieldSample,
}

/// Potential energy landscape for one atomic state, shared read-only by
/// all particles.
#[derive(Debug, Clone)]
pub struct Potential {
    model: FieldModel,
    mode: PotentialMode,
    moment: f64,
    mass: f64,
    larmor_per_tesla: f64,
    gravity: Option<Vec3>,
    averaged: Option<AveragedPotential>,
}

impl Potential {
    /// `gravity`, when given, is the free-fall acceleration vector (m/s²).
    pub fn new(model: FieldModel, state: &AtomState, mode: PotentialMode, gravity: Option<Vec3>) -> Result<Self> {
        let c = *model.constants();
        let moment = magnetic_moment(state, &c)?;
        let averaged = match mode {
            PotentialMode::Instantaneous => None,
            PotentialMode::TopAveraged { samples } => {
                if samples < 2 {
                    return Err(Error::Model("time averaging needs at least two samples".into()));
                }
                Some(AveragedPotential::new(model.clone(), state, samples, 0.0)?)
            }
        };
        Ok(Potential {
            mode,
            moment,
            mass: state.mass,
            larmor_per_tesla: state.gf.abs() * c.mu_b / c.hbar,
            gravity,
            averaged,
            model,
        })
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn mode(&self) -> PotentialMode {
        self.mode
    }

    /// µ_eff (J/T).
    pub fn moment(&self) -> f64 {
        self.moment
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Local Larmor frequency (rad/s) for field magnitude `b` (T).
    pub fn larmor(&self, b: f64) -> f64 {
        self.larmor_per_tesla * b
    }

    fn gravity_energy(&self, p: &Vec3) -> f64 {
        self.gravity.map_or(0.0, |g| -self.mass * g.dot(p))
    }

    /// Potential energy (J) at `p` and time `t`.
    pub fn energy(&self, p: &Vec3, t: f64) -> Result<f64> {
        let magnetic = match &self.averaged {
            None => self.moment * self.model.field_norm(p, t)?,
            Some(avg) => avg.value(p)?,
        };
        Ok(magnetic + self.gravity_energy(p))
    }

    pub fn evaluate(&self, p: &Vec3, t: f64) -> Result<Evaluation> {
        let (energy, grad, field) = match &self.averaged {
            None => {
                let field = self.model.sample(p, t)?;
                let n = field.b.norm();
                let grad = field.jacobian.transpose() * field.b * (self.moment / n.max(FORCE_FIELD_FLOOR));
                (self.moment * n, grad, field)
            }
            Some(avg) => {
                let units = self.model.unit_fields(p, true)?;
                let (u, grad) = avg.value_and_gradient_from_units(&units);
                (u, grad, self.model.sample_from_units(&units, t))
            }
        };
        let mut acceleration = -grad / self.mass;
        if let Some(g) = self.gravity {
            acceleration += g;
        }
        Ok(Evaluation {
            acceleration,
            energy: energy + self.gravity_energy(p),
            field,
        })
    }
}
