//! Physical constants in SI or natural units.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    #[default]
    Natural,
    Si,
}

/// The constants that enter every formula: reduced Planck constant,
/// vacuum permeability and permittivity, and the speed of light.
///
/// `eps0` is derived from `mu0` and `c` so that `c² μ0 ε0 = 1` holds to
/// rounding in both systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub hbar: f64,
    pub mu0: f64,
    pub eps0: f64,
    pub c: f64,
    pub unit_system: UnitSystem,
}

impl Constants {
    pub fn natural() -> Self {
        Self { hbar: 1.0, mu0: 1.0, eps0: 1.0, c: 1.0, unit_system: UnitSystem::Natural }
    }

    /// CODATA 2018 values.
    pub fn si() -> Self {
        let c = 299_792_458.0;
        let mu0 = 1.256_637_062_12e-6;
        Self {
            hbar: 1.054_571_817e-34,
            mu0,
            eps0: 1.0 / (mu0 * c * c),
            c,
            unit_system: UnitSystem::Si,
        }
    }

    pub fn new(system: UnitSystem) -> Self {
        match system {
            UnitSystem::Natural => Self::natural(),
            UnitSystem::Si => Self::si(),
        }
    }

    /// `μ0 / 4π`, the Biot–Savart prefactor.
    pub fn mu0_over_4pi(&self) -> f64 {
        self.mu0 / (4.0 * std::f64::consts::PI)
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::natural()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn light_speed_identity_holds() {
        for k in [Constants::natural(), Constants::si()] {
            let product = k.c * k.c * k.mu0 * k.eps0;
            assert!((product - 1.0).abs() < 1e-12, "{product}");
            assert!(k.hbar > 0.0 && k.mu0 > 0.0 && k.eps0 > 0.0 && k.c > 0.0);
        }
    }
}
