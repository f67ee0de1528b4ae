use crate::guideprops::find_field_zero;
use crate::magnetics::FieldModel;
use crate::model::species::magnetic_moment;
use crate::{AtomState, Error, Mat3, Result, Vec3};
use nalgebra::{Matrix2, Matrix3x2, Vector2};

/// Settings of the adaptive periodic quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub initial_samples: usize,
    pub max_samples: usize,
    /// Accept when doubling the sample count changes the result by at
    /// most this relative amount.
    pub tolerance: f64,
    /// Time origin of the sampling grid (s).
    pub t0: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            initial_samples: 64,
            max_samples: 1 << 18,
            tolerance: 1e-6,
            t0: 0.0,
        }
    }
}

/// Time average of the trapping potential over one modulation period,
/// evaluated with a fixed periodic trapezoid rule.
#[derive(Debug, Clone)]
pub struct AveragedPotential {
    model: FieldModel,
    mu: f64,
    currents: Vec<Vec<f64>>,
    bias: Vec<Vec3>,
}

impl AveragedPotential {
    pub fn new(model: FieldModel, state: &AtomState, samples: usize, t0: f64) -> Result<Self> {
        let period = model
            .modulation_period()
            .ok_or_else(|| Error::Model("time averaging needs a common modulation period".into()))?;
        let mu = magnetic_moment(state, model.constants())?;
        let n = samples.max(2);
        let times: Vec<f64> = (0..n).map(|k| t0 + period * k as f64 / n as f64).collect();
        Ok(Self {
            currents: times.iter().map(|&t| model.currents(t)).collect(),
            bias: times.iter().map(|&t| model.bias().field(t)).collect(),
            model,
            mu,
        })
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn moment(&self) -> f64 {
        self.mu
    }

    pub fn samples(&self) -> usize {
        self.currents.len()
    }

    /// Time-averaged |B| (T).
    pub fn mean_field(&self, p: &Vec3) -> Result<f64> {
        let units = self.model.unit_fields(p, false)?;
        let mut sum = 0.0;
        for (currents, bias) in self.currents.iter().zip(&self.bias) {
            let mut b = *bias;
            for (i, (u, _)) in currents.iter().zip(&units) {
                b += u * *i;
            }
            sum += b.norm();
        }
        Ok(sum / self.currents.len() as f64)
    }

    /// ⟨U⟩ (J).
    pub fn value(&self, p: &Vec3) -> Result<f64> {
        Ok(self.mu * self.mean_field(p)?)
    }

    /// ⟨U⟩ (J) and its gradient (J/m).
    pub fn value_and_gradient(&self, p: &Vec3) -> Result<(f64, Vec3)> {
        Ok(self.value_and_gradient_from_units(&self.model.unit_fields(p, true)?))
    }

    /// ⟨U⟩ and its gradient from per-circuit unit fields and Jacobians
    /// already evaluated at the point of interest.
    pub fn value_and_gradient_from_units(&self, units: &[(Vec3, Mat3)]) -> (f64, Vec3) {
        let mut sum = 0.0;
        let mut grad = Vec3::zeros();
        for (currents, bias) in self.currents.iter().zip(&self.bias) {
            let mut b = *bias;
            let mut j = Mat3::zeros();
            for (i, (u, ju)) in currents.iter().zip(units) {
                b += u * *i;
                j += ju * *i;
            }
            let n = b.norm();
            sum += n;
            grad += j.transpose() * b / n.max(1e-15);
        }
        let inv = self.mu / self.currents.len() as f64;
        (sum * inv, grad * inv)
    }

    /// Minimizes ⟨U⟩ in the plane through `seed` spanned by `axes`, with
    /// Newton steps on a finite-difference Hessian. `scale` is the length
    /// scale of the potential (e.g. the zero-orbit radius).
    pub fn minimum_in_plane(&self, seed: &Vec3, axes: &Matrix3x2<f64>, scale: f64) -> Result<Vec3> {
        let grad2 = |p: &Vec3| -> Result<Vector2<f64>> { Ok(axes.transpose() * self.value_and_gradient(p)?.1) };
        let mut p = *seed;
        let h = 1e-3 * scale;
        for _ in 0..60 {
            let g = grad2(&p)?;
            let mut hess = Matrix2::zeros();
            for k in 0..2 {
                let e = axes.column(k) * h;
                let col = (grad2(&(p + e))? - grad2(&(p - e))?) / (2.0 * h);
                hess.set_column(k, &col);
            }
            hess = (hess + hess.transpose()) * 0.5;
            let step = match hess.cholesky() {
                Some(c) => -c.solve(&g),
                None => -g / (hess.norm() + 1e-300) * scale,
            };
            let step = if step.norm() > scale { step * (scale / step.norm()) } else { step };
            p += axes * step;
            if step.norm() < 1e-12 * scale {
                return Ok(p);
            }
        }
        Ok(p)
    }

    /// Second derivative of ⟨U⟩ along unit vector `axis` by the five-point
    /// stencil with step `h`.
    pub fn curvature(&self, p: &Vec3, axis: &Vec3, h: f64) -> Result<f64> {
        let u = |k: f64| self.value(&(p + axis * (k * h)));
        Ok((-u(2.0)? + 16.0 * u(1.0)? - 30.0 * u(0.0)? + 16.0 * u(-1.0)? - u(-2.0)?) / (12.0 * h * h))
    }
}

/// ⟨U⟩ at `p` by periodic trapezoid quadrature, doubling the sample count
/// from 64 until the result changes by at most 1e-6 relative.
pub fn averaged_potential(model: &FieldModel, state: &AtomState, p: &Vec3) -> Result<f64> {
    averaged_potential_with(model, state, p, &QuadratureOptions::default())
}

pub fn averaged_potential_with(model: &FieldModel, state: &AtomState, p: &Vec3, opts: &QuadratureOptions) -> Result<f64> {
    let period = model
        .modulation_period()
        .ok_or_else(|| Error::Model("time averaging needs a common modulation period".into()))?;
    let mu = magnetic_moment(state, model.constants())?;
    let units = model.unit_fields(p, false)?;
    let field = |t: f64| {
        let mut b = model.bias().field(t);
        for (i, (u, _)) in model.currents(t).iter().zip(&units) {
            b += u * *i;
        }
        b.norm()
    };
    let mut n = opts.initial_samples.max(2);
    let mut sum: f64 = (0..n).map(|k| field(opts.t0 + period * k as f64 / n as f64)).sum();
    let mut mean = sum / n as f64;
    let mut change = f64::INFINITY;
    while 2 * n <= opts.max_samples {
        // the doubled grid reuses the existing samples
        let extra: f64 = (0..n).map(|k| field(opts.t0 + period * (k as f64 + 0.5) / n as f64)).sum();
        sum += extra;
        n *= 2;
        let next = sum / n as f64;
        change = (next - mean).abs() / next.abs().max(f64::MIN_POSITIVE);
        mean = next;
        if change <= opts.tolerance {
            return Ok(mu * mean);
        }
    }
    Err(Error::Quadrature(change))
}

/// Path of the instantaneous field zero over one modulation period.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOrbit {
    pub points: Vec<Vec3>,
    pub centroid: Vec3,
    /// Mean distance of the orbit from the reference point (m).
    pub mean_radius: f64,
    /// Eccentricity of the best-fit ellipse (0 for a circle).
    pub eccentricity: f64,
}

/// Traces the instantaneous field zero at `samples` times over one period,
/// starting the search at `seed`. Radii are measured from `reference`.
pub fn zero_orbit(model: &FieldModel, seed: &Vec3, reference: &Vec3, samples: usize) -> Result<ZeroOrbit> {
    let period = model
        .modulation_period()
        .ok_or_else(|| Error::Model("zero orbit needs a modulated model".into()))?;
    let mut points = Vec::with_capacity(samples);
    let mut guess = *seed;
    for k in 0..samples {
        let z = find_field_zero(model, &guess, period * k as f64 / samples as f64)?;
        points.push(z);
        guess = z;
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vec3>() / n;
    let mean_radius = points.iter().map(|p| (p - reference).norm()).sum::<f64>() / n;
    let cov = points
        .iter()
        .map(|p| (p - centroid) * (p - centroid).transpose())
        .fold(Mat3::zeros(), |a, b| a + b)
        / n;
    let mut ev: Vec<f64> = cov.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let eccentricity = if ev[0] > 0.0 { (1.0 - ev[1] / ev[0]).max(0.0).sqrt() } else { 0.0 };
    Ok(ZeroOrbit {
        points,
        centroid,
        mean_radius,
        eccentricity,
    })
}
