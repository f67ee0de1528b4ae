use crate::chipgeom::{build_top_pair, GuidePath};
use crate::guideprops::two_wire_analytic;
use crate::magnetics::{BiasWaveform, CurrentWaveform, FieldModel};
use crate::{AtomState, Error, PhysicalConstants, Result, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

/// Relative mismatch between guide height and half-separation beyond
/// which the closed forms are flagged as approximate.
pub const HEIGHT_MISMATCH_WARNING: f64 = 0.05;

/// Two-wire guide with sinusoidally modulated currents
/// `I_k(t) = I0 + Imod sin(ω t + φ_k)` and a vertical bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopConfig {
    /// Half-separation of the wires (m).
    pub d: f64,
    pub i0: f64,
    pub imod: f64,
    /// Vertical bias (T).
    pub bias: f64,
    /// Modulation angular frequency (rad/s).
    pub omega_mod: f64,
    /// Phase of the second wire relative to the first (rad).
    pub delta_phi: f64,
    pub state: AtomState,
}

impl TopConfig {
    /// ⁸⁷Rb example: d = 20 µm, I0 = 100 mA, Imod = 10 mA, B = 10 G.
    pub fn rb87_example() -> Self {
        Self {
            d: 20e-6,
            i0: 0.1,
            imod: 0.01,
            bias: 1e-3,
            omega_mod: TAU * 50e3,
            delta_phi: FRAC_PI_2,
            state: AtomState::rb87(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.state.validate()?;
        if !(self.d > 0.0 && self.bias > 0.0) {
            return Err(Error::Model("TOP guide needs d > 0 and B > 0".into()));
        }
        if !(self.imod >= 0.0 && self.i0 > self.imod) {
            return Err(Error::Model("TOP guide needs I0 > Imod >= 0".into()));
        }
        if !(self.omega_mod > 0.0) {
            return Err(Error::Model("TOP guide needs omega_mod > 0".into()));
        }
        Ok(())
    }

    /// Field model of two straight wires of `length` carrying the
    /// modulated currents, with the vertical bias.
    pub fn field_model(&self, length: f64) -> Result<(FieldModel, GuidePath)> {
        self.validate()?;
        let (layout, path) = build_top_pair(length, self.d, 0.0)?;
        let model = FieldModel::new(
            layout,
            [
                CurrentWaveform::sinusoidal("wire_a", self.i0, self.imod, self.omega_mod, 0.0)?,
                CurrentWaveform::sinusoidal("wire_b", self.i0, self.imod, self.omega_mod, self.delta_phi)?,
            ],
            BiasWaveform::constant(Vec3::new(0.0, 0.0, self.bias)),
        )?;
        Ok((model, path))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopParams {
    pub omega_larmor: f64,
    pub omega_trap: f64,
    /// Radius of the circle of vanishing field (m).
    pub r0: f64,
    /// Height of the static guide (m).
    pub h: f64,
    /// Whether h = d holds within the warning tolerance.
    pub height_matches: bool,
}

/// Radius of the orbit of the instantaneous field zero, `d Imod / (√2 I0)`.
pub fn top_r0(cfg: &TopConfig) -> f64 {
    cfg.d * cfg.imod / (SQRT_2 * cfg.i0)
}

/// Larmor frequency, trap frequency and zero-orbit radius from the closed
/// forms valid for h = d.
pub fn top_closed_form(cfg: &TopConfig, c: &PhysicalConstants) -> Result<TopParams> {
    cfg.validate()?;
    if cfg.imod == 0.0 {
        return Err(Error::StaticQuadrupoleLimit);
    }
    let (h, _) = two_wire_analytic(cfg.i0, cfg.d, cfg.bias, c)?;
    let height_matches = (h - cfg.d).abs() <= HEIGHT_MISMATCH_WARNING * cfg.d;
    if !height_matches {
        log::warn!(
            "guide height {:.3e} m differs from d = {:.3e} m by more than {}%; TOP closed forms are approximate",
            h,
            cfg.d,
            HEIGHT_MISMATCH_WARNING * 100.0
        );
    }
    let gf = cfg.state.gf;
    let omega_larmor = gf * c.mu_b * cfg.bias * cfg.imod / (SQRT_2 * c.hbar * cfg.i0);
    let omega_trap = (2.0 * PI / c.mu0)
        * (cfg.state.gf_mf() * c.mu_b / (SQRT_2 * cfg.state.mass) * cfg.bias.powi(3) / (cfg.i0 * cfg.imod)).sqrt();
    Ok(TopParams {
        omega_larmor,
        omega_trap,
        r0: top_r0(cfg),
        h,
        height_matches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityThresholds {
    pub max_mod_over_larmor: f64,
    pub max_trap_over_mod: f64,
}

impl Default for AdiabaticityThresholds {
    fn default() -> Self {
        Self {
            max_mod_over_larmor: 0.1,
            max_trap_over_mod: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticityReport {
    /// ω_mod / ω_Lar
    pub r1: f64,
    /// ω_trap / ω_mod
    pub r2: f64,
    pub pass: bool,
}

/// Checks that the modulation is slow compared with Larmor precession and
/// fast compared with the trap oscillation.
pub fn adiabaticity_check(cfg: &TopConfig, params: &TopParams, th: &AdiabaticityThresholds) -> AdiabaticityReport {
    let r1 = cfg.omega_mod / params.omega_larmor;
    let r2 = params.omega_trap / cfg.omega_mod;
    let le = |x: f64, lim: f64| x <= lim * (1.0 + 1e-12);
    AdiabaticityReport {
        r1,
        r2,
        pass: le(r1, th.max_mod_over_larmor) && le(r2, th.max_trap_over_mod),
    }
}

pub const TOP_REPORT_HEADER: &str = "d_um,I0_mA,Imod_mA,B_G,f_lar_kHz,f_trap_kHz,r0_um,h_um,adiabaticity_pass";

/// CSV row matching [`TOP_REPORT_HEADER`].
pub fn top_report_row(cfg: &TopConfig, p: &TopParams, a: &AdiabaticityReport) -> String {
    format!(
        "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
        cfg.d * 1e6,
        cfg.i0 * 1e3,
        cfg.imod * 1e3,
        cfg.bias * 1e4,
        p.omega_larmor / TAU / 1e3,
        p.omega_trap / TAU / 1e3,
        p.r0 * 1e6,
        p.h * 1e6,
        a.pass
    )
}
