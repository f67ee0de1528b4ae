/// CODATA 2018 values of the constants the simulator needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Vacuum permeability (T·m/A).
    pub mu0: f64,
    /// Bohr magneton (J/T).
    pub mu_b: f64,
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Standard gravity (m/s²), only used when gravity is switched on.
    pub g_n: f64,
}

pub const CODATA2018: PhysicalConstants = PhysicalConstants {
    mu0: 1.256_637_062_12e-6,
    mu_b: 9.274_010_078_3e-24,
    hbar: 1.054_571_817e-34,
    k_b: 1.380_649e-23,
    g_n: 9.806_65,
};

/// Atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA2018
    }
}

impl PhysicalConstants {
    pub const CODATA2018: PhysicalConstants = CODATA2018;

    /// µ0/4π, the Biot–Savart prefactor.
    pub fn mu0_over_4pi(&self) -> f64 {
        self.mu0 / (4.0 * std::f64::consts::PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_positive() {
        let c = PhysicalConstants::default();
        for v in [c.mu0, c.mu_b, c.hbar, c.k_b, c.g_n] {
            assert!(v > 0.0);
        }
        // µ0 is within 1e-9 of the pre-2019 exact 4π·1e-7.
        assert!((c.mu0 / (4.0e-7 * std::f64::consts::PI) - 1.0).abs() < 1e-9);
    }
}
