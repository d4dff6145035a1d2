//! Fundamental parameters of the collapse theories.

use serde::{Deserialize, Serialize};

/// Collapse-model constants. Defaults are the standard quoted values for each
/// theory; all of them can be overridden from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseParams {
    /// GRW per-nucleon collapse rate λ_GRW, s⁻¹
    pub lambda_grw: f64,
    /// GRW hit width σ_GRW, m
    pub sigma_grw: f64,
    /// CSL coupling γ, m³ s⁻¹
    pub gamma_csl: f64,
    /// CSL correlation length r_c, m
    pub r_c: f64,
    /// Tilloy–Diósi CSL coupling γ, m³ s⁻¹
    pub gamma_td_csl: f64,
    /// Tilloy–Diósi CSL detector resolution σ, m
    pub sigma_td_csl: f64,
    /// Tilloy–Diósi DP smearing cut-off σ, m
    pub sigma_td_dp: f64,
    /// Diósi–Penrose length cut-off R₀, m
    pub r0_dp: f64,
    /// Tilloy–Diósi DP correlator prefactor κ (dimensionless)
    pub kappa_td: f64,
}

impl Default for CollapseParams {
    fn default() -> Self {
        Self {
            lambda_grw: 1e-16,
            sigma_grw: 1e-7,
            gamma_csl: 1e-36,
            r_c: 1e-7,
            gamma_td_csl: 1e-24,
            sigma_td_csl: 1e-7,
            sigma_td_dp: 1e-15,
            r0_dp: 1e-15,
            kappa_td: 2.0,
        }
    }
}

impl CollapseParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        let fields = [
            (self.lambda_grw, "lambda_grw"),
            (self.sigma_grw, "sigma_grw"),
            (self.gamma_csl, "gamma_csl"),
            (self.r_c, "r_c"),
            (self.gamma_td_csl, "gamma_td_csl"),
            (self.sigma_td_csl, "sigma_td_csl"),
            (self.sigma_td_dp, "sigma_td_dp"),
            (self.r0_dp, "r0_dp"),
            (self.kappa_td, "kappa_td"),
        ];
        for (value, name) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(name);
            }
        }
        Ok(())
    }
}
