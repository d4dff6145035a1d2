//! Scenario runner: simulates (theory, protocol) with the requested engine,
//! aggregates ensemble statistics, and checks the simulated records against
//! the classified verdict.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::Result;
use crate::force::point_force;
use crate::grid::{grid_trajectory, GridOptions};
use crate::params::CollapseParams;
use crate::protocol::ExperimentProtocol;
use crate::rates::{rate_report, RateReport, TheoryId};
use crate::two_site::{
    derive_stream_seed, ensemble_statistics, run_two_site_ensemble, telegraph_analytic_corr,
    telegraph_analytic_mean, EnsembleSummary, EventKind, ForceRecord,
};
use crate::verdict::{classify_verdict, SignalClass, Verdict};

/// Which trajectory engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    TwoSite,
    Grid,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineKind::TwoSite => "two_site",
            EngineKind::Grid => "grid",
        })
    }
}

/// Empirical record shape, extracted from simulated trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmpiricalClass {
    /// Every sample negligible against f0
    Zero,
    /// Zero until the first collapse event, then pinned at one of +-f0
    ConstantPmF0,
    /// Pinned at +-f0 from the start (probe-collapsed telegraph)
    Jumps,
    /// Isolated +-f0 marks on a zero baseline
    Flashes,
    /// No single shape reaches the dominance threshold
    Mixed,
}

/// Fraction of records that must share a shape for the ensemble to get its class.
pub const CLASS_DOMINANCE: f64 = 0.9;

/// Analytic-overlay curves for the ensemble summary, where available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticOverlay {
    pub mean: Vec<f64>,
    pub corr: Vec<f64>,
}

/// Result of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub verdict: Verdict,
    pub rates: RateReport,
    pub f0: f64,
    /// Raw records (empty when n_traj = 0)
    pub records: Vec<ForceRecord>,
    pub ensemble: Option<EnsembleSummary>,
    /// Analytic mean/correlation curves (telegraph theories only)
    pub analytic: Option<AnalyticOverlay>,
    /// The ensemble's empirical class (None when n_traj = 0)
    pub empirical_class: Option<EmpiricalClass>,
    /// Whether the empirical class is compatible with the verdict
    pub consistent: Option<bool>,
}

fn classify_record(rec: &ForceRecord, f0: f64) -> EmpiricalClass {
    let tol = 1e-6 * f0.abs().max(f64::MIN_POSITIVE);
    let is_zero = |f: f64| f.abs() <= tol;
    let at_f0 = |f: f64| (f.abs() - f0.abs()).abs() <= tol;

    if rec.forces.iter().all(|&f| is_zero(f)) {
        return EmpiricalClass::Zero;
    }
    if rec.forces.iter().all(|&f| at_f0(f)) {
        return EmpiricalClass::Jumps;
    }
    // zero prefix, then constant +-f0
    let first_nonzero = rec.forces.iter().position(|&f| !is_zero(f)).unwrap();
    let tail = &rec.forces[first_nonzero..];
    if tail.iter().all(|&f| at_f0(f) && f.signum() == tail[0].signum()) {
        return EmpiricalClass::ConstantPmF0;
    }
    // isolated marks: short +-f0 runs returning to the zero baseline
    let nonzero_count = rec.forces.iter().filter(|&&f| !is_zero(f)).count();
    let mut run_lengths_ok = true;
    let mut run = 0usize;
    for &f in &rec.forces {
        if !is_zero(f) {
            if !at_f0(f) {
                run_lengths_ok = false;
                break;
            }
            run += 1;
            if run > 2 {
                run_lengths_ok = false;
                break;
            }
        } else {
            run = 0;
        }
    }
    if run_lengths_ok && nonzero_count <= rec.forces.len() / 4 {
        return EmpiricalClass::Flashes;
    }
    EmpiricalClass::Mixed
}

/// Extract the dominant record shape across an ensemble.
pub fn extract_empirical_class(records: &[ForceRecord], f0: f64) -> EmpiricalClass {
    if records.is_empty() {
        return EmpiricalClass::Mixed;
    }
    let mut counts = [0usize; 4]; // Zero, ConstantPmF0, Jumps, Flashes
    for rec in records {
        match classify_record(rec, f0) {
            EmpiricalClass::Zero => counts[0] += 1,
            EmpiricalClass::ConstantPmF0 => counts[1] += 1,
            EmpiricalClass::Jumps => counts[2] += 1,
            EmpiricalClass::Flashes => counts[3] += 1,
            EmpiricalClass::Mixed => {}
        }
    }
    let need = (CLASS_DOMINANCE * records.len() as f64).ceil() as usize;
    let classes = [
        EmpiricalClass::Zero,
        EmpiricalClass::ConstantPmF0,
        EmpiricalClass::Jumps,
        EmpiricalClass::Flashes,
    ];
    for (count, class) in counts.iter().zip(classes) {
        if *count >= need {
            return class;
        }
    }
    EmpiricalClass::Mixed
}

/// Compatibility between the predicted class and the dominant record shape.
/// Flash verdicts also accept an all-zero ensemble: the flash rate may simply
/// be below the horizon.
pub fn class_compatible(predicted: SignalClass, empirical: EmpiricalClass) -> bool {
    match predicted {
        SignalClass::NetZeroForce | SignalClass::NoForce => empirical == EmpiricalClass::Zero,
        SignalClass::ConstantSingleMinimum | SignalClass::RapidSuppressionSingleMinimum => {
            empirical == EmpiricalClass::ConstantPmF0
        }
        SignalClass::TelegraphJumps => empirical == EmpiricalClass::Jumps,
        SignalClass::IntermittentFlashForce => {
            empirical == EmpiricalClass::Flashes || empirical == EmpiricalClass::Zero
        }
    }
}

/// Horizon/dt at which the verdict's signal shape becomes visible in a
/// simulated record. Collapse- and flash-type predictions need the horizon
/// stretched to a few expected events when the rate is slow.
pub fn consistency_window(report: &RateReport, verdict: &Verdict, coherence: f64) -> (f64, f64) {
    let rate = report.effective_cm_rate;
    let horizon = match verdict.signal_class {
        SignalClass::ConstantSingleMinimum | SignalClass::RapidSuppressionSingleMinimum => {
            if rate > 0.0 {
                coherence.max(20.0 / rate)
            } else {
                coherence
            }
        }
        SignalClass::IntermittentFlashForce => {
            if rate > 0.0 {
                coherence.max(40.0 / rate)
            } else {
                coherence
            }
        }
        SignalClass::TelegraphJumps => {
            if rate > 0.0 {
                coherence.max(3.0 / rate)
            } else {
                coherence
            }
        }
        _ => coherence,
    };
    // flash marks must stay isolated samples, so flash cells sample finer
    let samples = if verdict.signal_class == SignalClass::IntermittentFlashForce {
        2000.0
    } else {
        500.0
    };
    let mut dt = horizon / samples;
    // keep jump processes resolvable
    if rate > 0.0 && rate.is_finite() {
        let bound = 0.09 / rate;
        if bound < dt {
            dt = bound;
        }
    }
    let dt = dt.max(horizon / 100_000.0);
    (horizon, dt)
}

/// Run one scenario: verdict + rates always; records, ensemble statistics and
/// the verdict-vs-simulation consistency flag when n_traj > 0.
#[allow(clippy::too_many_arguments)]
pub fn run_scenario(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    params: &CollapseParams,
    consts: &PhysicalConstants,
    engine: EngineKind,
    n_traj: usize,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ScenarioResult> {
    let verdict = classify_verdict(theory, protocol, params, consts);
    let rates = rate_report(theory, protocol, params, consts);
    let f0 = point_force(
        consts,
        protocol.sphere_mass,
        protocol.probe_mass,
        protocol.cat_separation_l,
        protocol.probe_distance(),
    )?;

    if n_traj == 0 {
        return Ok(ScenarioResult {
            verdict,
            rates,
            f0,
            records: Vec::new(),
            ensemble: None,
            analytic: None,
            empirical_class: None,
            consistent: None,
        });
    }

    let records = match engine {
        EngineKind::TwoSite => {
            run_two_site_ensemble(theory, protocol, params, consts, n_traj, horizon, dt, seed)?
        }
        EngineKind::Grid => {
            let options = GridOptions::default();
            let mut recs = Vec::with_capacity(n_traj);
            for i in 0..n_traj as u64 {
                let run = grid_trajectory(
                    theory,
                    protocol,
                    params,
                    consts,
                    &options,
                    horizon,
                    dt,
                    derive_stream_seed(seed, i),
                    &[],
                )?;
                recs.push(run.record);
            }
            recs
        }
    };

    let n_t = records[0].times.len();
    let lag_steps: Vec<usize> = (1..=10).map(|k| k * (n_t.saturating_sub(1)) / 10).filter(|&l| l > 0).collect();
    let ensemble = ensemble_statistics(&records, &lag_steps);

    let analytic = if verdict.signal_class == SignalClass::TelegraphJumps && verdict.split.is_none()
    {
        let gamma = rates.effective_cm_rate;
        Some(AnalyticOverlay {
            mean: ensemble.times.iter().map(|&t| telegraph_analytic_mean(f0, gamma, t)).collect(),
            corr: ensemble
                .corr_lags
                .iter()
                .map(|&lag| telegraph_analytic_corr(f0, gamma, 0.0, lag))
                .collect(),
        })
    } else {
        None
    };

    let empirical = extract_empirical_class(&records, f0);
    let consistent = class_compatible(verdict.signal_class, empirical);

    Ok(ScenarioResult {
        verdict,
        rates,
        f0,
        records,
        ensemble: Some(ensemble),
        analytic,
        empirical_class: Some(empirical),
        consistent: Some(consistent),
    })
}

/// Empirical collapse/jump event rate across an ensemble: events per unit
/// time per trajectory.
pub fn empirical_event_rate(records: &[ForceRecord], kind: EventKind) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let horizon = records[0].times.last().copied().unwrap_or(0.0);
    if horizon <= 0.0 {
        return 0.0;
    }
    let total: usize = records
        .iter()
        .map(|r| r.events.iter().filter(|e| e.kind == kind).count())
        .sum();
    total as f64 / (records.len() as f64 * horizon)
}
