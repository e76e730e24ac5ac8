use crate::error::{require, Result};

/// Reduced Planck constant and particle mass. Everything defaults to
/// natural units ħ = m = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        require(hbar > 0.0 && hbar.is_finite(), || {
            format!("hbar must be positive, got {hbar}")
        })?;
        require(mass > 0.0 && mass.is_finite(), || {
            format!("mass must be positive, got {mass}")
        })?;
        Ok(Self { hbar, mass })
    }

    /// ħ²/2m, the coefficient of the kinetic term.
    pub fn kinetic_coefficient(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// Wavenumber of a free particle with kinetic energy `energy` (≥ 0).
    pub fn wavenumber(&self, energy: f64) -> f64 {
        (2.0 * self.mass * energy).sqrt() / self.hbar
    }

    /// Kinetic energy ħ²k²/2m.
    pub fn energy(&self, wavenumber: f64) -> f64 {
        self.kinetic_coefficient() * wavenumber * wavenumber
    }
}
