//! Closed-form collapse and decoherence rates, critical widths, damping times
//! and the pointer-orthogonality criterion for every theory in the roster.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::constants::PhysicalConstants;
use crate::error::CoreError;
use crate::params::CollapseParams;
use crate::protocol::ExperimentProtocol;

/// The closed roster of dynamics the simulator can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoryId {
    /// Canonical quantum theory + Newtonian gravity, probe as projective measurement
    #[serde(rename = "CQT_Newton")]
    CqtNewton,
    /// GRW with semiclassical (matter-density) Newtonian gravity
    #[serde(rename = "GRW_mN")]
    GrwMN,
    /// GRW with flash ontology: mass exists only at collapse events
    #[serde(rename = "GRW_fN")]
    GrwFN,
    /// CSL with semiclassical Newtonian gravity
    #[serde(rename = "CSL_mN")]
    CslMN,
    /// Diósi–Penrose (dissipative, cut-off R0) with semiclassical gravity
    #[serde(rename = "DP_mN")]
    DpMN,
    /// Tilloy–Diósi, CSL kernel
    #[serde(rename = "TD_CSL")]
    TdCsl,
    /// Tilloy–Diósi, DP kernel
    #[serde(rename = "TD_DP")]
    TdDp,
    /// Karolyhazy model with semiclassical Newtonian gravity
    #[serde(rename = "K_mN")]
    KMN,
    /// GRW with quantized Newtonian gravity (no primitive ontology)
    #[serde(rename = "GRW0")]
    Grw0,
    /// CSL, quantized gravity
    #[serde(rename = "CSL0")]
    Csl0,
    /// DP, quantized gravity
    #[serde(rename = "DP0")]
    Dp0,
    /// K-model, quantized gravity
    #[serde(rename = "K0")]
    K0,
    /// Nimmrichter–Hornberger stochastic extension: gravitational couplings cancel
    #[serde(rename = "NH")]
    Nh,
    /// Kafri et al.; equivalent to DP
    #[serde(rename = "KafriEtAl")]
    KafriEtAl,
    /// Bera et al.; equivalent to the K-model
    #[serde(rename = "BeraEtAl")]
    BeraEtAl,
    /// Adler's Trace Dynamics; equivalent to the CSL family
    #[serde(rename = "AdlerTD")]
    AdlerTD,
}

pub const ALL_THEORIES: [TheoryId; 16] = [
    TheoryId::CqtNewton,
    TheoryId::GrwMN,
    TheoryId::GrwFN,
    TheoryId::CslMN,
    TheoryId::DpMN,
    TheoryId::TdCsl,
    TheoryId::TdDp,
    TheoryId::KMN,
    TheoryId::Grw0,
    TheoryId::Csl0,
    TheoryId::Dp0,
    TheoryId::K0,
    TheoryId::Nh,
    TheoryId::KafriEtAl,
    TheoryId::BeraEtAl,
    TheoryId::AdlerTD,
];

impl TheoryId {
    /// Canonical text name, as used in configs and output files.
    pub fn name(&self) -> &'static str {
        match self {
            TheoryId::CqtNewton => "CQT_Newton",
            TheoryId::GrwMN => "GRW_mN",
            TheoryId::GrwFN => "GRW_fN",
            TheoryId::CslMN => "CSL_mN",
            TheoryId::DpMN => "DP_mN",
            TheoryId::TdCsl => "TD_CSL",
            TheoryId::TdDp => "TD_DP",
            TheoryId::KMN => "K_mN",
            TheoryId::Grw0 => "GRW0",
            TheoryId::Csl0 => "CSL0",
            TheoryId::Dp0 => "DP0",
            TheoryId::K0 => "K0",
            TheoryId::Nh => "NH",
            TheoryId::KafriEtAl => "KafriEtAl",
            TheoryId::BeraEtAl => "BeraEtAl",
            TheoryId::AdlerTD => "AdlerTD",
        }
    }

    /// Related theories map onto one of the primary dynamics for all
    /// quantitative purposes.
    pub fn alias_target(&self) -> TheoryId {
        match self {
            TheoryId::KafriEtAl => TheoryId::DpMN,
            TheoryId::BeraEtAl => TheoryId::KMN,
            TheoryId::AdlerTD => TheoryId::CslMN,
            other => *other,
        }
    }

    /// Semiclassical matter-density theories (SN self-gravity active).
    pub fn is_semiclassical(&self) -> bool {
        matches!(
            self.alias_target(),
            TheoryId::GrwMN | TheoryId::CslMN | TheoryId::DpMN | TheoryId::KMN
        )
    }

    /// Tilloy–Diósi variants: pair potentials only, no SN self-interaction.
    pub fn is_td(&self) -> bool {
        matches!(self, TheoryId::TdCsl | TheoryId::TdDp)
    }

    /// Quantized-gravity variants where the probe coupling drives collapse.
    pub fn is_zero_family(&self) -> bool {
        matches!(
            self,
            TheoryId::Grw0 | TheoryId::Csl0 | TheoryId::Dp0 | TheoryId::K0
        )
    }

    /// Probe-as-measurement theories: CQT-Newton and the quantized-gravity family.
    pub fn probe_drives_collapse(&self) -> bool {
        *self == TheoryId::CqtNewton || self.is_zero_family()
    }
}

impl fmt::Display for TheoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TheoryId {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, CoreError> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        for t in ALL_THEORIES {
            if t.name().to_ascii_lowercase().replace(['-', '_'], "") == key {
                return Ok(t);
            }
        }
        let valid: Vec<&str> = ALL_THEORIES.iter().map(|t| t.name()).collect();
        Err(CoreError::InvalidArgument(format!(
            "unknown theory `{s}`; valid theories: {}",
            valid.join(", ")
        )))
    }
}

/// Telegraph decay constant of the probe-monitored cat: Γ = ν²τ/2.
pub fn cqt_decay_rate(nu: f64, tau: f64) -> f64 {
    nu * nu * tau / 2.0
}

/// GRW collapse rate of an N-nucleon system: N·λ_GRW.
pub fn grw_rate(n_nucleons: f64, lambda_grw: f64) -> f64 {
    n_nucleons * lambda_grw
}

/// CSL single-nucleon collapse rate: λ_CSL = γ / (8 π^{3/2} r_c³).
pub fn csl_lambda(gamma: f64, r_c: f64) -> f64 {
    gamma / (8.0 * PI.powf(1.5) * r_c.powi(3))
}

/// CSL effective center-of-mass localization rate for k clusters of N
/// identical nucleons each: λ_CSL · N² · k.
pub fn csl_cm_rate(lambda_csl: f64, n_per_cluster: f64, k_clusters: f64) -> f64 {
    lambda_csl * n_per_cluster * n_per_cluster * k_clusters
}

/// DP characteristic damping time of a two-site superposition separated by
/// much more than R0: τ = √π ħ R₀ / (G m²).
pub fn dp_damping_time(consts: &PhysicalConstants, m: f64, r0: f64) -> f64 {
    PI.sqrt() * consts.hbar * r0 / (consts.g * m * m)
}

/// Asymptotic noise-field temperature of dissipative DP: T = ħ²/(8 k_B m_r R₀²).
pub fn dp_noise_temperature(consts: &PhysicalConstants, m_r: f64, r0: f64) -> f64 {
    consts.hbar * consts.hbar / (8.0 * consts.k_b * m_r * r0 * r0)
}

/// Inverse of [`dp_noise_temperature`]: the reference mass for a given
/// asymptotic temperature.
pub fn dp_noise_mass(consts: &PhysicalConstants, temperature: f64, r0: f64) -> f64 {
    consts.hbar * consts.hbar / (8.0 * consts.k_b * temperature * r0 * r0)
}

/// Tilloy–Diósi CSL back-action decoherence coefficient on the off-diagonal
/// density-matrix element: π G² m² |x₁-x₂| / (2γ).
pub fn td_csl_backaction_damping(consts: &PhysicalConstants, m: f64, separation: f64, gamma: f64) -> f64 {
    PI * consts.g * consts.g * m * m * separation / (2.0 * gamma)
}

/// TD-DP damping time: the back-action doubles the DP decoherence term, so
/// the damping time halves. The boolean flags whether the dissipative
/// effective theory is valid (mass at least the m_r of a 1 K noise field).
pub fn td_dp_damping_time(consts: &PhysicalConstants, m: f64, r0: f64) -> (f64, bool) {
    let valid = m >= dp_noise_mass(consts, 1.0, r0);
    (dp_damping_time(consts, m, r0) / 2.0, valid)
}

/// K-model critical width. Elementary particle: (L/L_p)²·L; macroscopic body
/// of size R: (R/L_p)^{2/3}·L, with L = ħ/(mc) in both cases.
pub fn k_critical_width(consts: &PhysicalConstants, m_tot: f64, r: f64, macroscopic: bool) -> f64 {
    let compton = consts.hbar / (m_tot * consts.c);
    if macroscopic {
        (r / consts.l_planck).powf(2.0 / 3.0) * compton
    } else {
        (compton / consts.l_planck).powi(2) * compton
    }
}

/// K-model critical reduction time: τ_c = m a_c² / ħ.
pub fn k_critical_time(consts: &PhysicalConstants, m: f64, a_c: f64) -> f64 {
    m * a_c * a_c / consts.hbar
}

/// Collapse rate of the probe-sphere CM wavefunction once gravitationally
/// entangled: (N_probe + N_sphere)·λ_GRW.
pub fn probe_collapse_rate(n_pointer_nucleons: f64, n_sphere_nucleons: f64, lambda_grw: f64) -> f64 {
    (n_pointer_nucleons + n_sphere_nucleons) * lambda_grw
}

/// Nucleon count of a square wafer, as a diagnostic against quoted values.
pub fn wafer_nucleon_estimate(consts: &PhysicalConstants, thickness: f64, width: f64, density: f64) -> f64 {
    density * thickness * width * width / consts.m_nucleon
}

/// Which body plays the pointer role in an orthogonality assessment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pointer {
    /// The force probe; its pointer separation is declared by the protocol.
    Probe,
    /// Any other gravitating body (Earth case); separation taken as twice the
    /// kinematic deflection.
    Body { mass: f64 },
}

/// Outcome of the pointer-orthogonality criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerAssessment {
    /// Whether the pointer states are macroscopically distinct (> σ_GRW).
    pub projective: bool,
    /// Rigid-body deflection under constant force f0 over the interaction
    /// time: f0 t²/(2 m). Diagnostic only.
    pub kinematic_deflection: f64,
    /// The separation actually compared against σ_GRW.
    pub pointer_separation_used: f64,
}

/// Assess whether a gravitating pointer body resolves the cat state.
///
/// The probe's projectivity defers to the protocol's declared
/// `pointer_separation` (the kinematic deflection is reported as a
/// diagnostic); any other body is judged on its kinematic deflection alone.
pub fn pointer_orthogonality(
    params: &CollapseParams,
    protocol: &ExperimentProtocol,
    pointer: Pointer,
    f0: f64,
    interaction_time: f64,
) -> PointerAssessment {
    let (mass, declared) = match pointer {
        Pointer::Probe => (protocol.probe_mass, Some(protocol.pointer_separation)),
        Pointer::Body { mass } => (mass, None),
    };
    let kinematic_deflection = f0 * interaction_time * interaction_time / (2.0 * mass);
    let pointer_separation_used = declared.unwrap_or(2.0 * kinematic_deflection);
    PointerAssessment {
        projective: pointer_separation_used > params.sigma_grw,
        kinematic_deflection,
        pointer_separation_used,
    }
}

/// "Collapse within coherence" threshold: the expected number of collapse
/// events inside the coherence window above which collapse is treated as
/// operative for the protocol.
pub const COHERENCE_EVENT_THRESHOLD: f64 = 0.1;

/// Derived per-theory quantities for one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub theory: TheoryId,
    /// The theory's own collapse/decoherence rate for the microsphere, s⁻¹
    pub intrinsic_rate: f64,
    /// Rate governing the center-of-mass cat state (probe-limited for the
    /// quantized-gravity family), s⁻¹
    pub effective_cm_rate: f64,
    /// Spatial resolution of a collapse event, m (None where the theory has
    /// no width scale)
    pub collapse_width: Option<f64>,
    /// Superposition damping time for decoherence-type theories, s
    pub damping_time: Option<f64>,
    /// effective_cm_rate × coherence_time >= COHERENCE_EVENT_THRESHOLD
    pub hits_within_coherence: bool,
    /// cat_separation_L > collapse_width
    pub collapse_effective_on_cat: bool,
}

/// Compute the full rate report for (theory, protocol).
pub fn rate_report(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    params: &CollapseParams,
    consts: &PhysicalConstants,
) -> RateReport {
    let base = theory.alias_target();
    let n_sphere = protocol.sphere_nucleons(consts);
    let gamma_cqt = cqt_decay_rate(protocol.tunneling_rate_nu, protocol.probe_resolution_tau);
    let probe_rate = probe_collapse_rate(protocol.probe_pointer_nucleons, n_sphere, params.lambda_grw);

    let (intrinsic, effective, width, damping) = match base {
        TheoryId::CqtNewton => (gamma_cqt, gamma_cqt, None, None),
        TheoryId::GrwMN | TheoryId::GrwFN => {
            let r = grw_rate(n_sphere, params.lambda_grw);
            (r, r, Some(params.sigma_grw), None)
        }
        TheoryId::CslMN => {
            let lambda = csl_lambda(params.gamma_csl, params.r_c);
            let cm = csl_cm_rate(lambda, n_sphere, 1.0);
            (lambda, cm, Some(params.r_c), None)
        }
        TheoryId::DpMN => {
            let tau = dp_damping_time(consts, protocol.sphere_mass, params.r0_dp);
            (1.0 / tau, 1.0 / tau, Some(params.r0_dp), Some(tau))
        }
        TheoryId::TdCsl => {
            let lambda = csl_lambda(params.gamma_td_csl, params.sigma_td_csl);
            let cm = csl_cm_rate(lambda, n_sphere, 1.0);
            (lambda, cm, Some(params.sigma_td_csl), None)
        }
        TheoryId::TdDp => {
            let (tau, _valid) = td_dp_damping_time(consts, protocol.sphere_mass, params.r0_dp);
            (1.0 / tau, 1.0 / tau, Some(params.sigma_td_dp), Some(tau))
        }
        TheoryId::KMN => {
            let a_c = k_critical_width(consts, protocol.sphere_mass, protocol.sphere_radius, true);
            let tau_c = k_critical_time(consts, protocol.sphere_mass, a_c);
            (1.0 / tau_c, 1.0 / tau_c, Some(a_c), None)
        }
        TheoryId::Grw0 | TheoryId::Csl0 | TheoryId::Dp0 | TheoryId::K0 => {
            // Intrinsic rate from the theory's own process; the observable
            // jump rate is the telegraph rate limited by the probe collapse
            // rate, whichever is smaller. The probe limit is quoted from the
            // GRW counting; the family differs only in minute statistics.
            let intrinsic = match base {
                TheoryId::Grw0 => grw_rate(n_sphere, params.lambda_grw),
                TheoryId::Csl0 => {
                    csl_cm_rate(csl_lambda(params.gamma_csl, params.r_c), n_sphere, 1.0)
                }
                TheoryId::Dp0 => 1.0 / dp_damping_time(consts, protocol.sphere_mass, params.r0_dp),
                TheoryId::K0 => {
                    let a_c =
                        k_critical_width(consts, protocol.sphere_mass, protocol.sphere_radius, true);
                    1.0 / k_critical_time(consts, protocol.sphere_mass, a_c)
                }
                _ => unreachable!(),
            };
            let width = match base {
                TheoryId::Grw0 => params.sigma_grw,
                TheoryId::Csl0 => params.r_c,
                TheoryId::Dp0 => params.r0_dp,
                TheoryId::K0 => {
                    k_critical_width(consts, protocol.sphere_mass, protocol.sphere_radius, true)
                }
                _ => unreachable!(),
            };
            (intrinsic, gamma_cqt.min(probe_rate), Some(width), None)
        }
        TheoryId::Nh => (0.0, 0.0, None, None),
        TheoryId::KafriEtAl | TheoryId::BeraEtAl | TheoryId::AdlerTD => unreachable!(),
    };

    RateReport {
        theory,
        intrinsic_rate: intrinsic,
        effective_cm_rate: effective,
        collapse_width: width,
        damping_time: damping,
        hits_within_coherence: effective * protocol.coherence_time >= COHERENCE_EVENT_THRESHOLD,
        collapse_effective_on_cat: width
            .map(|w| protocol.cat_separation_l > w)
            .unwrap_or(false),
    }
}
