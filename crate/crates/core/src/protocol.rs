//! Experiment protocols: the geometry, mass and timing parameters of one
//! cat-state preparation plus the probe arrangement.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::constants::{PhysicalConstants, DENSITY_LEAD};
use crate::error::{CoreError, Result};

/// Named preparation schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolName {
    /// Qubit-coupled superconducting microsphere, L ~ 1 pm.
    #[serde(rename = "romero-isart")]
    RomeroIsart,
    /// Free expansion through a double slit, L = 0.5 µm.
    #[serde(rename = "pino")]
    Pino,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProtocolName::RomeroIsart => "romero-isart",
            ProtocolName::Pino => "pino",
            ProtocolName::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ProtocolName {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "romero-isart" | "romeroisart" | "ri" => Ok(ProtocolName::RomeroIsart),
            "pino" => Ok(ProtocolName::Pino),
            "custom" => Ok(ProtocolName::Custom),
            other => Err(CoreError::UnknownPreset(other.to_string())),
        }
    }
}

/// One invariant violation found by [`ExperimentProtocol::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Minimum surface gap imposed by Casimir forces, m.
pub const MIN_SURFACE_GAP: f64 = 1e-6;

/// All parameters of one cat-state + probe arrangement, in SI units.
///
/// Immutable after construction; share freely across workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentProtocol {
    pub name: ProtocolName,
    /// Microsphere mass M, kg
    pub sphere_mass: f64,
    /// Microsphere radius R, m
    pub sphere_radius: f64,
    /// Microsphere density ρ, kg m⁻³
    pub sphere_density: f64,
    /// Cat-state separation L between the two well minima, m
    pub cat_separation_l: f64,
    /// Probe (resonator) effective mass m, kg. Used both as the gravitating
    /// mass and as the pointer inertia.
    pub probe_mass: f64,
    /// Sphere-surface-to-probe gap a, m (Casimir bound: a >= 1 µm)
    pub surface_gap_a: f64,
    /// Tunneling rate ν between the well minima, s⁻¹ (angular)
    pub tunneling_rate_nu: f64,
    /// Probe temporal resolution τ, s
    pub probe_resolution_tau: f64,
    /// Coherence time of the preparation scheme, s
    pub coherence_time: f64,
    /// Slit width for diffraction-based preparation, m (None when the scheme
    /// has no slit stage)
    pub slit_width: Option<f64>,
    /// Nucleon count of the pointer assembly rigidly attached to the probe
    pub probe_pointer_nucleons: f64,
    /// Assumed separation of the probe's correlated pointer states, m.
    /// The default is "orthogonal" (> σ_GRW); the raw kinematic deflection is
    /// available separately as a diagnostic.
    pub pointer_separation: f64,
}

impl ExperimentProtocol {
    /// Build the named preset with its quoted parameters.
    pub fn preset(name: ProtocolName) -> Result<Self> {
        match name {
            ProtocolName::RomeroIsart => Ok(Self::romero_isart()),
            ProtocolName::Pino => Ok(Self::pino()),
            ProtocolName::Custom => Err(CoreError::UnknownPreset("custom".into())),
        }
    }

    /// Lead microsphere, R = 2 µm, qubit-assisted superposition of L = 1 pm.
    pub fn romero_isart() -> Self {
        let radius: f64 = 2e-6;
        let density = DENSITY_LEAD;
        let mass = density * 4.0 / 3.0 * PI * radius.powi(3); // 0.38 ng
        Self {
            name: ProtocolName::RomeroIsart,
            sphere_mass: mass,
            sphere_radius: radius,
            sphere_density: density,
            cat_separation_l: 1e-12,
            probe_mass: 4.0e-12,
            surface_gap_a: 1e-6,
            tunneling_rate_nu: 10.0,
            probe_resolution_tau: 0.02,
            coherence_time: 0.1,
            slit_width: None,
            probe_pointer_nucleons: 1e20,
            pointer_separation: 1e-6,
        }
    }

    /// Free-expansion scheme: R = 1 µm sphere of 1e14 amu diffracted through a
    /// double slit (width 10.61 nm, separation 0.5 µm). The density is the one
    /// implied by the quoted mass and radius.
    pub fn pino() -> Self {
        let consts = PhysicalConstants::default();
        let radius: f64 = 1e-6;
        let mass = 1e14 * consts.amu;
        let density = mass / (4.0 / 3.0 * PI * radius.powi(3));
        Self {
            name: ProtocolName::Pino,
            sphere_mass: mass,
            sphere_radius: radius,
            sphere_density: density,
            cat_separation_l: 5e-7,
            probe_mass: 4.0e-12,
            surface_gap_a: 1e-6,
            tunneling_rate_nu: 10.0,
            probe_resolution_tau: 0.02,
            coherence_time: 0.5,
            slit_width: Some(1.061e-8),
            probe_pointer_nucleons: 1e20,
            pointer_separation: 1e-6,
        }
    }

    /// Probe-to-minimum distance D = R + a.
    pub fn probe_distance(&self) -> f64 {
        self.sphere_radius + self.surface_gap_a
    }

    /// Transverse probe offset y with D = sqrt(y² + L²/4) = R + a.
    pub fn probe_y_offset(&self) -> f64 {
        let d = self.probe_distance();
        (d * d - self.cat_separation_l * self.cat_separation_l / 4.0).sqrt()
    }

    /// Nucleon count of the microsphere.
    pub fn sphere_nucleons(&self, consts: &PhysicalConstants) -> f64 {
        self.sphere_mass / consts.m_nucleon
    }

    /// Check every protocol invariant; an empty list means the protocol is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut positive = |value: f64, field: &str| {
            if !(value > 0.0 && value.is_finite()) {
                v.push(Violation {
                    field: field.to_string(),
                    message: format!("must be strictly positive, got {value:e}"),
                });
            }
        };
        positive(self.sphere_mass, "sphere_mass");
        positive(self.sphere_radius, "sphere_radius");
        positive(self.sphere_density, "sphere_density");
        positive(self.probe_mass, "probe_mass");
        positive(self.probe_resolution_tau, "probe_resolution_tau");
        positive(self.coherence_time, "coherence_time");
        positive(self.probe_pointer_nucleons, "probe_pointer_nucleons");

        if self.cat_separation_l < 0.0 || !self.cat_separation_l.is_finite() {
            v.push(Violation {
                field: "cat_separation_L".into(),
                message: format!("must be >= 0, got {:e}", self.cat_separation_l),
            });
        }
        if self.tunneling_rate_nu < 0.0 || !self.tunneling_rate_nu.is_finite() {
            v.push(Violation {
                field: "tunneling_rate_nu".into(),
                message: format!("must be >= 0, got {:e}", self.tunneling_rate_nu),
            });
        }
        if self.pointer_separation < 0.0 || !self.pointer_separation.is_finite() {
            v.push(Violation {
                field: "pointer_separation".into(),
                message: format!("must be >= 0, got {:e}", self.pointer_separation),
            });
        }
        if !(self.surface_gap_a >= MIN_SURFACE_GAP) {
            v.push(Violation {
                field: "surface_gap_a".into(),
                message: format!(
                    "Casimir bound requires a >= {MIN_SURFACE_GAP:e} m, got {:e} m",
                    self.surface_gap_a
                ),
            });
        }
        if let Some(w) = self.slit_width {
            if !(w > 0.0 && w.is_finite()) {
                v.push(Violation {
                    field: "slit_width".into(),
                    message: format!("must be strictly positive when set, got {w:e}"),
                });
            }
        }
        // mass = density * (4/3) pi R^3 within 1%
        if self.sphere_mass > 0.0 && self.sphere_radius > 0.0 && self.sphere_density > 0.0 {
            let implied = self.sphere_density * 4.0 / 3.0 * PI * self.sphere_radius.powi(3);
            let rel = (self.sphere_mass - implied).abs() / implied;
            if rel > 0.01 {
                v.push(Violation {
                    field: "sphere_mass".into(),
                    message: format!(
                        "inconsistent with density*(4/3)*pi*R^3 = {implied:.4e} kg by {:.2}%",
                        rel * 100.0
                    ),
                });
            }
        }
        v
    }
}
