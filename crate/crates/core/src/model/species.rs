//! Atomic species and hyperfine state data.
//!
//! Sign convention: the product gF·mF must be positive for a weak-field
//! seeker. The shipped defaults use |gF| = 1/2 for the F = 2 manifolds of
//! ⁷Li and ⁸⁷Rb, so the |F=2, mF=2⟩ state carries exactly one Bohr magneton.

use super::constants::{PhysicalConstants, ATOMIC_MASS_UNIT};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomState {
    pub species: String,
    /// Atomic mass (kg).
    pub mass: f64,
    /// Hyperfine quantum number F.
    pub f: i32,
    /// Magnetic quantum number mF.
    pub mf: i32,
    /// Landé factor gF (signed).
    pub gf: f64,
}

impl AtomState {
    pub fn new(species: impl Into<String>, mass: f64, f: i32, mf: i32, gf: f64) -> Result<Self> {
        let s = AtomState {
            species: species.into(),
            mass,
            f,
            mf,
            gf,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::InvalidState(format!("mass must be positive, got {}", self.mass)));
        }
        if self.f < 0 || self.mf.abs() > self.f {
            return Err(Error::InvalidState(format!(
                "|mF| <= F violated (F={}, mF={})",
                self.f, self.mf
            )));
        }
        if !self.gf.is_finite() {
            return Err(Error::InvalidState("gF must be finite".into()));
        }
        Ok(())
    }

    /// gF·mF
    pub fn gf_mf(&self) -> f64 {
        self.gf * self.mf as f64
    }

    /// ⁷Li in |F=2, mF=2⟩.
    pub fn li7() -> Self {
        AtomState {
            species: "Li7".into(),
            mass: 7.016_003_437 * ATOMIC_MASS_UNIT,
            f: 2,
            mf: 2,
            gf: 0.5,
        }
    }

    /// ⁸⁷Rb in |F=2, mF=2⟩.
    pub fn rb87() -> Self {
        AtomState {
            species: "Rb87".into(),
            mass: 86.909_180_531 * ATOMIC_MASS_UNIT,
            f: 2,
            mf: 2,
            gf: 0.5,
        }
    }

    /// Looks up a species in the built-in table by name (case-insensitive),
    /// returning its |F=2, mF=2⟩ state.
    pub fn from_table(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "li7" | "7li" | "lithium-7" => Some(Self::li7()),
            "rb87" | "87rb" | "rubidium-87" => Some(Self::rb87()),
            _ => None,
        }
    }
}

/// Effective magnetic moment µ_eff = gF·mF·µB, so that U = µ_eff·|B| for an
/// adiabatically following weak-field seeker.
pub fn magnetic_moment(state: &AtomState, constants: &PhysicalConstants) -> Result<f64> {
    state.validate()?;
    let gm = state.gf_mf();
    if gm <= 0.0 {
        return Err(Error::NotWeakFieldSeeking(gm));
    }
    Ok(gm * constants.mu_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn li7_and_rb87_carry_one_bohr_magneton() {
        let c = PhysicalConstants::default();
        for s in [AtomState::li7(), AtomState::rb87()] {
            let mu = magnetic_moment(&s, &c).unwrap();
            assert_eq!(mu, c.mu_b);
            assert!((mu - 9.274e-24).abs() < 1e-27);
        }
    }

    #[test]
    fn zero_moment_rejected() {
        let s = AtomState {
            mf: 0,
            ..AtomState::li7()
        };
        assert!(matches!(
            magnetic_moment(&s, &PhysicalConstants::default()),
            Err(Error::NotWeakFieldSeeking(_))
        ));
    }

    #[test]
    fn strong_field_seeker_rejected() {
        let s = AtomState {
            mf: -1,
            ..AtomState::li7()
        };
        assert!(magnetic_moment(&s, &PhysicalConstants::default()).is_err());
    }

    #[test]
    fn invalid_states() {
        assert!(AtomState::new("x", -1.0, 2, 2, 0.5).is_err());
        assert!(AtomState::new("x", 1e-26, 1, 2, 0.5).is_err());
        assert!(AtomState::new("x", 1e-26, 2, 1, 0.5).is_ok());
    }

    #[test]
    fn moment_linear_in_mf() {
        let c = PhysicalConstants::default();
        let base = AtomState {
            f: 3,
            ..AtomState::li7()
        };
        let m1 = magnetic_moment(&AtomState { mf: 1, ..base.clone() }, &c).unwrap();
        for mf in 1..=3 {
            let m = magnetic_moment(&AtomState { mf, ..base.clone() }, &c).unwrap();
            assert!((m - mf as f64 * m1).abs() <= 1e-15 * m);
        }
    }

    #[test]
    fn table_lookup() {
        assert_eq!(AtomState::from_table("RB87").unwrap().species, "Rb87");
        assert!(AtomState::from_table("Cs133").is_none());
    }
}
