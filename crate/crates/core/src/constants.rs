//! Physical constants (SI, CODATA 2018) and the two material densities used
//! by the experiment presets.
//!
//! All other modules take a [`PhysicalConstants`] argument instead of reading
//! globals, so rescaled-unit runs (ħ = m = 1 style) can inject their own set.

use serde::{Deserialize, Serialize};

/// Density of lead, kg/m³ (11.34 g/cm³).
pub const DENSITY_LEAD: f64 = 11_340.0;

/// Density of tantalum, kg/m³ (16.7 g/cm³).
pub const DENSITY_TANTALUM: f64 = 16_700.0;

/// Fundamental constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Newtonian gravitational constant, m³ kg⁻¹ s⁻²
    pub g: f64,
    /// Reduced Planck constant, J s
    pub hbar: f64,
    /// Speed of light, m s⁻¹
    pub c: f64,
    /// Boltzmann constant, J K⁻¹
    pub k_b: f64,
    /// Average nucleon mass (m_p + m_n)/2, kg
    pub m_nucleon: f64,
    /// Planck length, m
    pub l_planck: f64,
    /// Atomic mass unit, kg
    pub amu: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            g: 6.674_30e-11,
            hbar: 1.054_571_817e-34,
            c: 2.997_924_58e8,
            k_b: 1.380_649e-23,
            m_nucleon: 1.674_927_498e-27,
            l_planck: 1.616_255e-35,
            amu: 1.660_539_066_60e-27,
        }
    }
}

impl PhysicalConstants {
    /// All constants must be strictly positive; returns the offending field name otherwise.
    pub fn validate(&self) -> Result<(), &'static str> {
        let fields = [
            (self.g, "g"),
            (self.hbar, "hbar"),
            (self.c, "c"),
            (self.k_b, "k_b"),
            (self.m_nucleon, "m_nucleon"),
            (self.l_planck, "l_planck"),
            (self.amu, "amu"),
        ];
        for (value, name) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(name);
            }
        }
        Ok(())
    }
}
