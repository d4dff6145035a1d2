//! Verdict classifier: maps (theory, protocol) to the qualitative probe-signal
//! class the theory predicts, with rationale codes and, for slit-race cases,
//! the probability split between the two observable branches.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::params::CollapseParams;
use crate::protocol::ExperimentProtocol;
use crate::rates::{rate_report, Pointer, RateReport, TheoryId};

/// Qualitative probe-signal classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalClass {
    /// Uncollapsed symmetric cat: the probe reads zero net force
    #[serde(rename = "NET_ZERO_FORCE")]
    NetZeroForce,
    /// Full-mass sphere sits in one minimum for the whole run
    #[serde(rename = "CONSTANT_SINGLE_MINIMUM")]
    ConstantSingleMinimum,
    /// Probe-monitored force flips between -f0 and +f0
    #[serde(rename = "TELEGRAPH_JUMPS")]
    TelegraphJumps,
    /// Force exists only as delta-like marks at collapse events
    #[serde(rename = "INTERMITTENT_FLASH_FORCE")]
    IntermittentFlashForce,
    /// No gravitational coupling at all
    #[serde(rename = "NO_FORCE")]
    NoForce,
    /// Cat suppressed on microscopic timescales in every protocol, then a
    /// constant single-minimum force
    #[serde(rename = "RAPID_SUPPRESSION_SINGLE_MINIMUM")]
    RapidSuppressionSingleMinimum,
}

impl SignalClass {
    pub fn name(&self) -> &'static str {
        match self {
            SignalClass::NetZeroForce => "NET_ZERO_FORCE",
            SignalClass::ConstantSingleMinimum => "CONSTANT_SINGLE_MINIMUM",
            SignalClass::TelegraphJumps => "TELEGRAPH_JUMPS",
            SignalClass::IntermittentFlashForce => "INTERMITTENT_FLASH_FORCE",
            SignalClass::NoForce => "NO_FORCE",
            SignalClass::RapidSuppressionSingleMinimum => "RAPID_SUPPRESSION_SINGLE_MINIMUM",
        }
    }
}

impl std::fmt::Display for SignalClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Why the classifier landed on its class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RationaleCode {
    #[serde(rename = "WIDTH_INEFFECTIVE")]
    WidthIneffective,
    #[serde(rename = "RATE_OUTSIDE_COHERENCE")]
    RateOutsideCoherence,
    #[serde(rename = "COLLAPSE_WITHIN_COHERENCE")]
    CollapseWithinCoherence,
    #[serde(rename = "SN_TUNNELING_SUPPRESSED")]
    SnTunnelingSuppressed,
    #[serde(rename = "TD_RESIDUAL_TUNNELING")]
    TdResidualTunneling,
    #[serde(rename = "PROBE_DRIVES_COLLAPSE")]
    ProbeDrivesCollapse,
    #[serde(rename = "POINTER_NOT_ORTHOGONAL")]
    PointerNotOrthogonal,
    #[serde(rename = "NO_GRAVITATIONAL_COUPLING")]
    NoGravitationalCoupling,
    #[serde(rename = "FLASH_ONTOLOGY")]
    FlashOntology,
    #[serde(rename = "SUB_PICOMETER_CUTOFF")]
    SubPicometerCutoff,
    #[serde(rename = "SLIT_RACE_SPLIT")]
    SlitRaceSplit,
    #[serde(rename = "EQUIVALENT_THEORY_MAPPING")]
    EquivalentTheoryMapping,
}

/// Probability split between pre-slit collapse (constant force) and cat
/// formation followed by an observable jump, for hit-type theories racing a
/// slit-based preparation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictSplit {
    pub constant_single_minimum_prob: f64,
    pub telegraph_jump_prob: f64,
}

/// Classified probe-signal prediction for one (theory, protocol) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub theory: TheoryId,
    pub protocol: String,
    pub signal_class: SignalClass,
    pub rationale_codes: Vec<RationaleCode>,
    pub split: Option<VerdictSplit>,
}

/// Collapse-width cutoffs at or below this scale suppress the cat in every
/// protocol considered (no preparation reaches sub-picometer separations).
pub const SUB_PICOMETER_CUTOFF: f64 = 1e-12;

/// Fraction of the coherence window that elapses before the slit stage.
pub const SLIT_ARRIVAL_FRACTION: f64 = 0.5;

/// Pure decision procedure; no randomness anywhere.
pub fn classify_verdict(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    params: &CollapseParams,
    consts: &PhysicalConstants,
) -> Verdict {
    let report = rate_report(theory, protocol, params, consts);
    let mut codes = Vec::new();
    if theory.alias_target() != theory {
        codes.push(RationaleCode::EquivalentTheoryMapping);
    }
    let base = theory.alias_target();

    // special cases first
    if base == TheoryId::Nh {
        codes.push(RationaleCode::NoGravitationalCoupling);
        return verdict(theory, protocol, SignalClass::NoForce, codes, None);
    }
    if base == TheoryId::GrwFN {
        codes.push(RationaleCode::FlashOntology);
        if !report.hits_within_coherence {
            codes.push(RationaleCode::RateOutsideCoherence);
        }
        return verdict(theory, protocol, SignalClass::IntermittentFlashForce, codes, None);
    }

    // probe-coupling rule: CQT-Newton and the quantized-gravity family let the
    // probe drive collapse, provided its pointer states are orthogonal
    if base.probe_drives_collapse() {
        let assessment = crate::rates::pointer_orthogonality(
            params,
            protocol,
            Pointer::Probe,
            0.0,
            protocol.coherence_time,
        );
        if assessment.projective {
            codes.push(RationaleCode::ProbeDrivesCollapse);
            return verdict(theory, protocol, SignalClass::TelegraphJumps, codes, None);
        }
        codes.push(RationaleCode::PointerNotOrthogonal);
        return verdict(theory, protocol, SignalClass::NetZeroForce, codes, None);
    }

    // semiclassical family: width-effectiveness, then rate vs coherence
    if !report.collapse_effective_on_cat {
        codes.push(RationaleCode::WidthIneffective);
        return verdict(theory, protocol, SignalClass::NetZeroForce, codes, None);
    }
    if !report.hits_within_coherence {
        codes.push(RationaleCode::RateOutsideCoherence);
        return verdict(theory, protocol, SignalClass::NetZeroForce, codes, None);
    }
    codes.push(RationaleCode::CollapseWithinCoherence);

    // collapse resolves the cat; SN self-gravity (or TD residual tunneling)
    // decides what happens afterwards
    if theory.is_td() {
        codes.push(RationaleCode::TdResidualTunneling);
    } else {
        codes.push(RationaleCode::SnTunnelingSuppressed);
    }

    let width = report.collapse_width.unwrap_or(f64::INFINITY);
    if width <= SUB_PICOMETER_CUTOFF {
        codes.push(RationaleCode::SubPicometerCutoff);
        return verdict(theory, protocol, SignalClass::RapidSuppressionSingleMinimum, codes, None);
    }

    // GRW-type hit processes racing a slit-based preparation: the first hit
    // may land before or after the cat forms
    if base == TheoryId::GrwMN && protocol.slit_width.is_some() {
        let t_slit = SLIT_ARRIVAL_FRACTION * protocol.coherence_time;
        let p_pre = 1.0 - (-report.effective_cm_rate * t_slit).exp();
        codes.push(RationaleCode::SlitRaceSplit);
        let split = VerdictSplit {
            constant_single_minimum_prob: p_pre,
            telegraph_jump_prob: 1.0 - p_pre,
        };
        let class = if p_pre >= 0.5 {
            SignalClass::ConstantSingleMinimum
        } else {
            SignalClass::TelegraphJumps
        };
        return verdict(theory, protocol, class, codes, Some(split));
    }

    verdict(theory, protocol, SignalClass::ConstantSingleMinimum, codes, None)
}

fn verdict(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    signal_class: SignalClass,
    rationale_codes: Vec<RationaleCode>,
    split: Option<VerdictSplit>,
) -> Verdict {
    Verdict {
        theory,
        protocol: protocol.name.to_string(),
        signal_class,
        rationale_codes,
        split,
    }
}

/// One row of the verdict table, with the rate report attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictCell {
    pub verdict: Verdict,
    pub rates: RateReport,
}

/// Full cross product of theories x protocols, ordered deterministically.
pub fn verdict_table(
    theories: &[TheoryId],
    protocols: &[ExperimentProtocol],
    params: &CollapseParams,
    consts: &PhysicalConstants,
) -> Vec<VerdictCell> {
    let mut cells = Vec::with_capacity(theories.len() * protocols.len());
    for theory in theories {
        for protocol in protocols {
            cells.push(VerdictCell {
                verdict: classify_verdict(*theory, protocol, params, consts),
                rates: rate_report(*theory, protocol, params, consts),
            });
        }
    }
    cells
}
