//! Finite straight-segment Biot–Savart kernel and point-dipole field,
//! both with analytic spatial Jacobians.

use crate::chipgeom::WireSegment;
use crate::{Error, Mat3, PhysicalConstants, Result, Vec3};

/// Geometric part of the segment field for unit `µ0 I / 4π`, given the
/// vectors `r1 = p - a`, `r2 = p - b` from the segment ends to the field
/// point and their norms.
#[inline]
pub(crate) fn unit_segment(r1: &Vec3, n1: f64, r2: &Vec3, n2: f64, jac: Option<&mut Mat3>) -> Vec3 {
    let c = r1.cross(r2);
    let p = n1 * n2;
    let dot = r1.dot(r2);
    // n1 n2 + r1·r2 loses all digits next to the segment; |c|² = P² - dot²
    let q = if dot < 0.0 { c.norm_squared() / (p - dot) } else { p + dot };
    let d = p * q;
    let num = n1 + n2;
    let f = num / d;
    if let Some(j) = jac {
        let u1 = r1 / n1;
        let u2 = r2 / n2;
        let grad_num = u1 + u2;
        let grad_p = u1 * n2 + u2 * n1;
        let grad_q = grad_p + r1 + r2;
        let grad_d = grad_p * q + grad_q * p;
        let grad_f = grad_num / d - grad_d * (num / (d * d));
        let l = r1 - r2;
        *j += c * grad_f.transpose() + skew(&l) * f;
    }
    c * f
}

/// Matrix of `v × (·)`.
#[inline]
pub(crate) fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Squared distance from the field point to the segment, from the same
/// end vectors used by the kernel.
#[inline]
pub(crate) fn distance_squared(r1: &Vec3, r2: &Vec3) -> f64 {
    let l = r1 - r2;
    let ll = l.norm_squared();
    let t = (r1.dot(&l) / ll).clamp(0.0, 1.0);
    (r1 - l * t).norm_squared()
}

/// Field of a point dipole of moment `m` (A·m²) at offset `r` from the
/// dipole, divided by `µ0 / 4π`.
#[inline]
pub(crate) fn unit_dipole(m: &Vec3, r: &Vec3, jac: Option<&mut Mat3>) -> Vec3 {
    let r2 = r.norm_squared();
    let rn = r2.sqrt();
    let inv3 = 1.0 / (r2 * rn);
    let mr = m.dot(r);
    if let Some(j) = jac {
        let s = 3.0 * inv3 / r2;
        *j += (r * m.transpose() + m * r.transpose() + Mat3::identity() * mr
            - r * r.transpose() * (5.0 * mr / r2))
            * s;
    }
    (r * (3.0 * mr / r2) - m) * inv3
}

/// Field (T) of a straight segment carrying current `current` from
/// `segment.start` to `segment.end`.
pub fn segment_field(
    segment: &WireSegment,
    current: f64,
    point: &Vec3,
    guard: f64,
    constants: &PhysicalConstants,
) -> Result<Vec3> {
    segment_field_and_jacobian(segment, current, point, guard, constants).map(|(b, _)| b)
}

/// Field (T) and Jacobian (T/m) of a single segment.
pub fn segment_field_and_jacobian(
    segment: &WireSegment,
    current: f64,
    point: &Vec3,
    guard: f64,
    constants: &PhysicalConstants,
) -> Result<(Vec3, Mat3)> {
    let r1 = point - segment.start;
    let r2 = point - segment.end;
    let dist2 = distance_squared(&r1, &r2);
    if dist2 < guard * guard {
        return Err(Error::InsideConductor {
            distance: dist2.sqrt(),
            guard,
        });
    }
    let k = constants.mu0_over_4pi() * current;
    let mut j = Mat3::zeros();
    let b = unit_segment(&r1, r1.norm(), &r2, r2.norm(), Some(&mut j));
    Ok((b * k, j * k))
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: PhysicalConstants = PhysicalConstants::CODATA2018;

    fn fd_jacobian(f: impl Fn(&Vec3) -> Vec3, p: &Vec3, h: f64) -> Mat3 {
        let mut j = Mat3::zeros();
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            j.set_column(k, &((f(&(p + e)) - f(&(p - e))) / (2.0 * h)));
        }
        j
    }

    #[test]
    fn perpendicular_bisector_oracle() {
        let seg = WireSegment::new(Vec3::new(-0.5, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)).unwrap();
        let r = 1e-3;
        let b = segment_field(&seg, 1.0, &Vec3::new(0.0, 0.0, r), 2e-6, &C).unwrap();
        // (µ0 I / 4π r)(sin θ2 - sin θ1)
        let sin = 0.5 / (0.25f64 + r * r).sqrt();
        let expected = C.mu0_over_4pi() / r * 2.0 * sin;
        assert!((b.norm() - expected).abs() / expected < 1e-12);
        assert!((b.norm() - 1.9999e-4).abs() < 2e-8);
        // current along +x, point above: field along -y
        assert!(b.y < 0.0 && b.x.abs() < 1e-20 && b.z.abs() < 1e-20);
        let neg = segment_field(&seg, -1.0, &Vec3::new(0.0, 0.0, r), 2e-6, &C).unwrap();
        assert_eq!(neg, -b);
    }

    #[test]
    fn collinear_point_has_no_field() {
        let seg = WireSegment::new(Vec3::zeros(), Vec3::new(1e-3, 0.0, 0.0)).unwrap();
        let b = segment_field(&seg, 1.0, &Vec3::new(3e-3, 0.0, 0.0), 2e-6, &C).unwrap();
        assert_eq!(b.norm(), 0.0);
    }

    #[test]
    fn guard_violation() {
        let seg = WireSegment::new(Vec3::zeros(), Vec3::new(1e-3, 0.0, 0.0)).unwrap();
        let err = segment_field(&seg, 1.0, &Vec3::new(5e-4, 1e-6, 0.0), 2e-6, &C).unwrap_err();
        assert!(matches!(err, Error::InsideConductor { .. }));
    }

    #[test]
    fn jacobian_matches_differences() {
        let seg = WireSegment::new(Vec3::new(-1e-4, 2e-5, 0.0), Vec3::new(3e-4, -1e-5, 1e-5)).unwrap();
        for p in [
            Vec3::new(0.0, 0.0, 5e-5),
            Vec3::new(5e-4, 1e-4, -2e-5),
            Vec3::new(-3e-4, -2e-4, 1e-4),
        ] {
            let (_, j) = segment_field_and_jacobian(&seg, 1.0, &p, 1e-6, &C).unwrap();
            let fd = fd_jacobian(|q| segment_field(&seg, 1.0, q, 1e-6, &C).unwrap(), &p, 1e-8);
            assert!((j - fd).norm() / j.norm() < 1e-6, "{j} vs {fd}");
            assert!(j.trace().abs() < 1e-10 * j.norm());
        }
    }

    #[test]
    fn dipole_jacobian_matches_differences() {
        let m = Vec3::new(0.3, -1.0, 0.7);
        let p = Vec3::new(1.0, 0.4, -0.8);
        let mut j = Mat3::zeros();
        unit_dipole(&m, &p, Some(&mut j));
        let fd = fd_jacobian(|q| unit_dipole(&m, q, None), &p, 1e-6);
        assert!((j - fd).norm() / j.norm() < 1e-8);
        assert!(j.trace().abs() < 1e-12 * j.norm());
    }
}
