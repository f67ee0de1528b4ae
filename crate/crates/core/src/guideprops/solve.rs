//! Root finding and least-squares minimization of the field vector.

use crate::magnetics::FieldModel;
use crate::{Error, Mat3, Result, Vec3};
use nalgebra::{SMatrix, SVector};


/// Convergence target for field zeros (T).
pub const ZERO_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100;
/// Directions whose singular value falls below this fraction of the
/// largest are treated as running along a zero line.
const LINE_RCOND: f64 = 1e-3;
const MAX_MARCH_STEP: f64 = 1e-3;

struct Tracker<'a> {
    model: &'a FieldModel,
    t: f64,
    best: (Vec3, f64),
    iterations: usize,
}

impl Tracker<'_> {
    fn eval(&mut self, p: &Vec3) -> Result<(Vec3, Mat3)> {
        let (b, j) = self.model.field_and_jacobian(p, self.t)?;
        if b.norm() < self.best.1 {
            self.best = (*p, b.norm());
        }
        Ok((b, j))
    }

    fn fail(&self) -> Error {
        Error::NoConvergence {
            best: self.best.0,
            residual: self.best.1,
            iterations: self.iterations,
        }
    }

    /// Newton iterations restricted to the strong singular directions,
    /// with backtracking on |B|. Returns the final point, field and
    /// Jacobian.
    fn strong_newton(&mut self, p: Vec3, max_iter: usize, count: bool) -> Result<(Vec3, Vec3, Mat3)> {
        let (mut p, (mut b, mut j)) = (p, self.eval(&p)?);
        for _ in 0..max_iter {
            if b.norm() < ZERO_TOLERANCE {
                break;
            }
            if count {
                self.iterations += 1;
                if self.iterations > MAX_ITERATIONS {
                    return Err(self.fail());
                }
            }
            let svd = j.svd(true, true);
            let smax = svd.singular_values.max();
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let mut step = Vec3::zeros();
            let mut strong = 0.0f64;
            for k in 0..3 {
                let sk = svd.singular_values[k];
                if sk > LINE_RCOND * smax {
                    let c = u.column(k).dot(&b);
                    strong = strong.max(c.abs());
                    step -= vt.row(k).transpose() * (c / sk);
                }
            }
            if strong < 1e-3 * ZERO_TOLERANCE {
                break;
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let q = p + step * alpha;
                if let Ok((bq, jq)) = self.eval(&q) {
                    if bq.norm() < b.norm() {
                        (p, b, j) = (q, bq, jq);
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok((p, b, j))
    }

    /// Weakest right singular vector, oriented along `reference`.
    fn line_direction(j: &Mat3, reference: Option<Vec3>) -> (Vec3, f64) {
        let svd = j.svd(false, true);
        let k = svd.singular_values.imin();
        let mut v: Vec3 = svd.v_t.unwrap().row(k).transpose();
        if reference.is_some_and(|r| v.dot(&r) < 0.0) {
            v = -v;
        }
        let smax = svd.singular_values.max();
        (v, svd.singular_values[k] / smax)
    }
}

/// Locates a point where the field vanishes, starting from `seed`.
///
/// Damped Newton steps first drive the strongly varying field components
/// to zero. If a weakly varying component remains (the seed sits on a
/// nearly degenerate zero line, as in long or gently curved guides), the
/// solver marches along that line and brackets the point where the weak
/// component changes sign.
pub fn find_field_zero(model: &FieldModel, seed: &Vec3, t: f64) -> Result<Vec3> {
    let mut tr = Tracker {
        model,
        t,
        best: (*seed, f64::INFINITY),
        iterations: 0,
    };
    let (mut p, mut b, mut j) = tr.strong_newton(*seed, MAX_ITERATIONS, true)?;
    if b.norm() < ZERO_TOLERANCE {
        return Ok(p);
    }
    // |B|² minimization when the strong Newton stage stalls off the line
    let mut lambda = 1e-3;
    while tr.iterations < MAX_ITERATIONS {
        let (v, rel) = Tracker::line_direction(&j, None);
        let strong_residual = (b - v * v.dot(&b)).norm();
        if rel < LINE_RCOND && strong_residual < 1e-2 * b.norm().max(ZERO_TOLERANCE) {
            break;
        }
        tr.iterations += 1;
        let jtj = j.transpose() * j;
        let g = j.transpose() * b;
        let scale = jtj.trace() / 3.0;
        let mut moved = false;
        while lambda < 1e12 {
            let m = jtj + Mat3::identity() * (lambda * scale);
            let step = m.cholesky().map(|c| -c.solve(&g)).unwrap_or_else(Vec3::zeros);
            if let Ok((bq, jq)) = tr.eval(&(p + step)) {
                if bq.norm() < b.norm() {
                    (p, b, j) = (p + step, bq, jq);
                    lambda = (lambda / 3.0).max(1e-12);
                    moved = true;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if b.norm() < ZERO_TOLERANCE {
            return Ok(p);
        }
        if !moved {
            return Err(tr.fail());
        }
    }

    // march along the zero line on the weak component f = B·v
    let (mut v, _) = Tracker::line_direction(&j, None);
    let mut f = b.dot(&v);
    let mut max_step = MAX_MARCH_STEP;
    let mut bracket: Option<((Vec3, f64), (Vec3, f64))> = None;
    let mut side = 0i32;
    while tr.iterations < MAX_ITERATIONS {
        tr.iterations += 1;
        let candidate = match bracket {
            None => {
                let slope = v.dot(&(j * v));
                let mut dl = if slope != 0.0 { -f / slope } else { max_step };
                if !dl.is_finite() || dl.abs() > max_step {
                    dl = max_step.copysign(if slope != 0.0 { -f * slope } else { 1.0 });
                }
                p + v * dl
            }
            Some(((pa, fa), (pb, fb))) => {
                // Illinois-weighted regula falsi between bracketing line points
                let x = fa / (fa - fb);
                pa + (pb - pa) * x
            }
        };
        let (q, bq, jq) = match tr.strong_newton(candidate, 30, false) {
            Ok(r) => r,
            Err(_) => {
                max_step *= 0.5;
                continue;
            }
        };
        if bq.norm() < ZERO_TOLERANCE {
            return Ok(q);
        }
        let (vq, _) = Tracker::line_direction(&jq, Some(v));
        let fq = bq.dot(&vq);
        match bracket {
            None => {
                if fq.signum() != f.signum() {
                    bracket = Some(((p, f), (q, fq)));
                } else if fq.abs() >= f.abs() {
                    max_step *= 0.5;
                    if max_step < 1e-12 {
                        return Err(tr.fail());
                    }
                    continue;
                }
            }
            Some(((pa, fa), (pb, fb))) => {
                bracket = Some(if fq.signum() == fa.signum() {
                    if side == -1 {
                        side = 0;
                        ((q, fq), (pb, fb * 0.5))
                    } else {
                        side = -1;
                        ((q, fq), (pb, fb))
                    }
                } else if side == 1 {
                    side = 0;
                    ((pa, fa * 0.5), (q, fq))
                } else {
                    side = 1;
                    ((pa, fa), (q, fq))
                });
            }
        }
        (p, j, v, f) = (q, jq, vq, fq);
    }
    Err(tr.fail())
}

/// Outcome of a bounded minimization of |B|.
#[derive(Debug, Clone, Copy)]
pub struct Minimum<const K: usize> {
    pub coords: SVector<f64, K>,
    pub point: Vec3,
    pub b: Vec3,
    pub jacobian: Mat3,
    /// The lower bound on the constrained coordinate is active.
    pub at_bound: bool,
}

/// Minimizes |B(origin + axes·x)|² over `x` with Levenberg–Marquardt,
/// keeping `x[bound.0] ≥ bound.1`.
pub fn minimize_field_norm<const K: usize>(
    model: &FieldModel,
    origin: &Vec3,
    axes: &SMatrix<f64, 3, K>,
    start: SVector<f64, K>,
    bound: Option<(usize, f64)>,
    t: f64,
) -> Result<Minimum<K>> {
    let clamp = |mut x: SVector<f64, K>| {
        if let Some((i, lo)) = bound {
            x[i] = x[i].max(lo);
        }
        x
    };
    let mut x = clamp(start);
    let mut p = origin + axes * x;
    let (mut b, mut j) = model.field_and_jacobian(&p, t)?;
    let mut f = b.norm_squared();
    let mut lambda = 1e-4;
    let length_scale = x.norm().max(1e-6);
    for _ in 0..400 {
        if b.norm() < 1e-13 {
            break;
        }
        let jr = j * axes;
        let h = jr.transpose() * jr;
        let g = jr.transpose() * b;
        let diag = SMatrix::<f64, K, K>::from_diagonal(&h.diagonal());
        let mut improved = false;
        let mut converged = false;
        while lambda < 1e14 {
            let m = h + diag * lambda + SMatrix::<f64, K, K>::identity() * (1e-30 * h.trace());
            let Some(chol) = m.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let xn = clamp(x - chol.solve(&g));
            let dx = (xn - x).norm();
            let pn = origin + axes * xn;
            if let Ok((bn, jn)) = model.field_and_jacobian(&pn, t) {
                let fn_ = bn.norm_squared();
                if fn_ < f {
                    converged = dx < 1e-14 * length_scale.max(1.0) || dx < 1e-15;
                    (x, p, b, j, f) = (xn, pn, bn, jn, fn_);
                    lambda = (lambda / 5.0).max(1e-15);
                    improved = true;
                    break;
                }
                if dx < 1e-15 {
                    converged = true;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved || converged {
            break;
        }
    }
    let at_bound = bound.is_some_and(|(i, lo)| x[i] <= lo * (1.0 + 1e-9) + 1e-15);
    Ok(Minimum {
        coords: x,
        point: p,
        b,
        jacobian: j,
        at_bound,
    })
}
