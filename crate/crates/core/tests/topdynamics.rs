use atomfiber::guideprops::find_field_zero;
use atomfiber::magnetics::{CurrentWaveform, FieldModel};
use atomfiber::topdynamics::*;
use atomfiber::{Error, PhysicalConstants, Vec3};
use nalgebra::Matrix3x2;
use proptest::prelude::*;
use std::f64::consts::TAU;

const C: PhysicalConstants = PhysicalConstants::CODATA2018;

fn static_zero(model: &FieldModel, cfg: &TopConfig) -> Vec3 {
    let st = model
        .clone()
        .with_waveform(CurrentWaveform::constant("wire_a", cfg.i0))
        .unwrap()
        .with_waveform(CurrentWaveform::constant("wire_b", cfg.i0))
        .unwrap();
    find_field_zero(&st, &Vec3::new(0.0, 0.0, 1.05 * cfg.d), 0.0).unwrap()
}

/// Brute-force time average with direct field evaluations.
fn direct_average(model: &FieldModel, p: &Vec3, n: usize) -> f64 {
    let period = model.modulation_period().unwrap();
    (0..n)
        .map(|k| model.field_norm(p, period * k as f64 / n as f64).unwrap())
        .sum::<f64>()
        / n as f64
        * C.mu_b
}

#[test]
fn rb87_closed_forms() {
    let cfg = TopConfig::rb87_example();
    let p = top_closed_form(&cfg, &C).unwrap();
    assert!((p.omega_larmor / TAU - 500e3).abs() / 500e3 < 0.05);
    assert!((p.omega_trap / TAU - 5e3).abs() / 5e3 < 0.10);
    assert!((p.r0 - 1.4e-6).abs() / 1.4e-6 < 0.05);
    assert!(p.height_matches);
    assert!((p.h - cfg.d).abs() / cfg.d < 1e-6);
}

#[test]
fn static_quadrupole_limit() {
    let cfg = TopConfig {
        imod: 0.0,
        ..TopConfig::rb87_example()
    };
    assert_eq!(top_r0(&cfg), 0.0);
    let err = top_closed_form(&cfg, &C).unwrap_err();
    assert!(matches!(err, Error::StaticQuadrupoleLimit));
    assert!(err.to_string().contains("static quadrupole limit"));
}

#[test]
fn bias_scaling() {
    let rb = TopConfig::rb87_example();
    let base = TopConfig {
        bias: rb.bias / 8.0,
        ..rb
    };
    let quad = TopConfig {
        bias: 4.0 * base.bias,
        ..base.clone()
    };
    let (a, b) = (top_closed_form(&base, &C).unwrap(), top_closed_form(&quad, &C).unwrap());
    assert!((b.omega_larmor / a.omega_larmor - 4.0).abs() < 1e-12);
    assert!((b.omega_trap / a.omega_trap - 8.0).abs() < 1e-12);
    assert_eq!(a.r0, b.r0);
}

#[test]
fn zero_orbit_is_a_circle_of_radius_r0() {
    let cfg = TopConfig::rb87_example();
    let p = top_closed_form(&cfg, &C).unwrap();
    let (model, _) = cfg.field_model(0.2).unwrap();
    let z0 = static_zero(&model, &cfg);
    let orbit = zero_orbit(&model, &(z0 + Vec3::new(0.0, 0.0, p.r0)), &z0, 64).unwrap();
    assert!((orbit.mean_radius - p.r0).abs() / p.r0 < 0.05);
    assert!(orbit.eccentricity < 0.3, "{}", orbit.eccentricity);
    // every orbit point is an instantaneous zero
    let period = model.modulation_period().unwrap();
    for (k, q) in orbit.points.iter().enumerate() {
        assert!(model.field_norm(q, period * k as f64 / 64.0).unwrap() < 1e-9);
    }
    // time averaging lifts the zero on the orbit
    let u = averaged_potential(&model, &cfg.state, &orbit.points[5]).unwrap();
    assert!(u > 0.0);
}

#[test]
fn curvature_matches_closed_form_trap_frequency() {
    let cfg = TopConfig::rb87_example();
    let p = top_closed_form(&cfg, &C).unwrap();
    let (model, _) = cfg.field_model(0.2).unwrap();
    let z0 = static_zero(&model, &cfg);
    let ap = AveragedPotential::new(model, &cfg.state, 512, 0.0).unwrap();
    let axes = Matrix3x2::from_columns(&[Vec3::y(), Vec3::z()]);
    let m = ap.minimum_in_plane(&z0, &axes, p.r0).unwrap();
    assert!(ap.value(&m).unwrap() > 0.0);
    for axis in [Vec3::y(), Vec3::z()] {
        let k = ap.curvature(&m, &axis, p.r0 / 20.0).unwrap();
        let w = (k / cfg.state.mass).sqrt();
        assert!((w - p.omega_trap).abs() / p.omega_trap < 0.05, "{w} vs {}", p.omega_trap);
    }
}

#[test]
fn averaged_minimum_matches_brute_force() {
    let cfg = TopConfig::rb87_example();
    let p = top_closed_form(&cfg, &C).unwrap();
    let (model, _) = cfg.field_model(0.2).unwrap();
    let z0 = static_zero(&model, &cfg);
    let ap = AveragedPotential::new(model.clone(), &cfg.state, 256, 0.0).unwrap();
    let axes = Matrix3x2::from_columns(&[Vec3::y(), Vec3::z()]);
    let m = ap.minimum_in_plane(&z0, &axes, p.r0).unwrap();
    assert!(m.y.abs() < 1e-12);
    // oracle: golden-section search along the symmetry axis on a direct average
    let f = |z: f64| direct_average(&model, &Vec3::new(0.0, 0.0, z), 1024);
    let (mut a, mut b) = (z0.z - p.r0, z0.z + p.r0);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (c, d) = (b - gr * (b - a), a + gr * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let oracle = 0.5 * (a + b);
    assert!((m.z - oracle).abs() < 1e-3 * p.r0, "{} vs {}", m.z, oracle);
}

#[test]
fn quadrature_is_phase_independent_and_checked() {
    let cfg = TopConfig::rb87_example();
    let (model, _) = cfg.field_model(0.2).unwrap();
    let q = Vec3::new(0.3e-6, 0.0, 20.5e-6);
    let a = averaged_potential(&model, &cfg.state, &q).unwrap();
    let shifted = QuadratureOptions {
        t0: 3.3e-6,
        ..QuadratureOptions::default()
    };
    let b = averaged_potential_with(&model, &cfg.state, &q, &shifted).unwrap();
    assert!((a - b).abs() / a < 1e-9);
    let period = model.modulation_period().unwrap();
    let c = averaged_potential_with(
        &model,
        &cfg.state,
        &q,
        &QuadratureOptions {
            t0: period,
            ..QuadratureOptions::default()
        },
    )
    .unwrap();
    assert!((a - c).abs() / a < 1e-12);
    let strict = QuadratureOptions {
        max_samples: 128,
        tolerance: 1e-16,
        ..QuadratureOptions::default()
    };
    assert!(matches!(
        averaged_potential_with(&model, &cfg.state, &q, &strict),
        Err(Error::Quadrature(_))
    ));
}

#[test]
fn adiabaticity_examples() {
    let cfg = TopConfig::rb87_example();
    let rounded = TopParams {
        omega_larmor: TAU * 500e3,
        omega_trap: TAU * 5e3,
        r0: 1.4e-6,
        h: cfg.d,
        height_matches: true,
    };
    let th = AdiabaticityThresholds::default();
    let r = adiabaticity_check(&cfg, &rounded, &th);
    assert!((r.r1 - 0.1).abs() < 1e-12 && (r.r2 - 0.1).abs() < 1e-12);
    assert!(r.pass);
    let at_larmor = TopConfig {
        omega_mod: rounded.omega_larmor,
        ..cfg.clone()
    };
    let r = adiabaticity_check(&at_larmor, &rounded, &th);
    assert!(!r.pass && (r.r1 - 1.0).abs() < 1e-12);
    let at_trap = TopConfig {
        omega_mod: rounded.omega_trap,
        ..cfg.clone()
    };
    let r = adiabaticity_check(&at_trap, &rounded, &th);
    assert!(!r.pass && (r.r2 - 1.0).abs() < 1e-12);
}

#[test]
fn report_row() {
    let cfg = TopConfig::rb87_example();
    let p = top_closed_form(&cfg, &C).unwrap();
    let a = adiabaticity_check(&cfg, &p, &AdiabaticityThresholds::default());
    let row = top_report_row(&cfg, &p, &a);
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols.len(), TOP_REPORT_HEADER.split(',').count());
    assert_eq!(cols[0].parse::<f64>().unwrap(), 20.0);
    assert_eq!(cols[8], "false");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn averaged_minimum_is_positive(imod_ma in 1.0f64..30.0) {
        let cfg = TopConfig { imod: imod_ma * 1e-3, ..TopConfig::rb87_example() };
        let (model, _) = cfg.field_model(0.2).unwrap();
        let r0 = top_r0(&cfg);
        let z0 = static_zero(&model, &cfg);
        let ap = AveragedPotential::new(model, &cfg.state, 128, 0.0).unwrap();
        let axes = Matrix3x2::from_columns(&[Vec3::y(), Vec3::z()]);
        let m = ap.minimum_in_plane(&z0, &axes, r0).unwrap();
        prop_assert!(ap.value(&m).unwrap() > 0.0);
    }

    #[test]
    fn averaged_potential_is_periodic_in_phase_origin(frac in 0.0f64..1.0) {
        let cfg = TopConfig::rb87_example();
        let (model, _) = cfg.field_model(0.2).unwrap();
        let period = model.modulation_period().unwrap();
        let q = Vec3::new(0.1e-6, 0.2e-6, 20.3e-6);
        let a = averaged_potential(&model, &cfg.state, &q).unwrap();
        let b = averaged_potential_with(&model, &cfg.state, &q, &QuadratureOptions { t0: frac * period, ..QuadratureOptions::default() }).unwrap();
        prop_assert!((a - b).abs() / a < 1e-9);
    }
}
