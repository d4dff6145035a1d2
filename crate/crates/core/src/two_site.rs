//! Reduced two-level dynamics of the double-well center of mass: the
//! CQT-Newton telegraph force process with its analytic benchmarks, GRW-type
//! jump trajectories, CSL-type diffusive trajectories, DP/TD dephasing, and
//! the per-theory composition that emits [`ForceRecord`]s.
//!
//! Force convention: the analytic benchmark pins state |+> to force -f0, so a
//! general state reports F = -f0 (|c+|^2 - |c-|^2).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};
use crate::force::point_force;
use crate::params::CollapseParams;
use crate::protocol::ExperimentProtocol;
use crate::rates::{rate_report, TheoryId};

/// Pure state c+|+> + c-|->.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteState {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

impl TwoSiteState {
    pub fn new(c_plus: Complex64, c_minus: Complex64) -> Result<Self> {
        let mut s = Self { c_plus, c_minus };
        let n = s.norm_sq();
        if !(n > 0.0 && n.is_finite()) {
            return Err(CoreError::InvalidArgument(
                "two-site amplitudes must have positive finite norm".into(),
            ));
        }
        s.renormalize();
        Ok(s)
    }

    pub fn plus() -> Self {
        Self {
            c_plus: Complex64::new(1.0, 0.0),
            c_minus: Complex64::new(0.0, 0.0),
        }
    }

    pub fn minus() -> Self {
        Self {
            c_plus: Complex64::new(0.0, 0.0),
            c_minus: Complex64::new(1.0, 0.0),
        }
    }

    /// Equal-weight cat (|+> + |->)/sqrt(2); stationary under the tunneling
    /// Hamiltonian.
    pub fn symmetric_cat() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { c_plus: a, c_minus: a }
    }

    pub fn norm_sq(&self) -> f64 {
        self.c_plus.norm_sqr() + self.c_minus.norm_sqr()
    }

    pub fn renormalize(&mut self) {
        let n = self.norm_sq().sqrt();
        self.c_plus /= n;
        self.c_minus /= n;
    }

    pub fn p_plus(&self) -> f64 {
        self.c_plus.norm_sqr()
    }

    pub fn p_minus(&self) -> f64 {
        self.c_minus.norm_sqr()
    }

    /// <sigma_3> in the site basis.
    pub fn site_polarization(&self) -> f64 {
        self.p_plus() - self.p_minus()
    }

    /// max(p+, p-): 1 for a basis state, 1/2 for an equal cat.
    pub fn site_purity(&self) -> f64 {
        self.p_plus().max(self.p_minus())
    }
}

/// 2x2 Hermitian density matrix in the {|+>, |->} basis. Hermiticity is
/// structural: only the upper off-diagonal is stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteDensityMatrix {
    pub rho_pp: f64,
    pub rho_mm: f64,
    pub rho_pm: Complex64,
}

impl TwoSiteDensityMatrix {
    pub fn from_state(s: &TwoSiteState) -> Self {
        Self {
            rho_pp: s.p_plus(),
            rho_mm: s.p_minus(),
            rho_pm: s.c_plus * s.c_minus.conj(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho_pp + self.rho_mm
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_trace = self.trace() / 2.0;
        let disc = ((self.rho_pp - self.rho_mm) / 2.0).powi(2) + self.rho_pm.norm_sqr();
        let root = disc.sqrt();
        (half_trace - root, half_trace + root)
    }
}

/// Exact off-diagonal damping by exp(-lambda dt); populations untouched.
pub fn dephasing_step(rho: &TwoSiteDensityMatrix, lambda: f64, dt: f64) -> TwoSiteDensityMatrix {
    TwoSiteDensityMatrix {
        rho_pp: rho.rho_pp,
        rho_mm: rho.rho_mm,
        rho_pm: rho.rho_pm * (-lambda * dt).exp(),
    }
}

/// Exact rotation under H = hbar nu sigma_1 for time dt (nu is an angular
/// tunneling rate).
pub fn evolve_unitary(state: &TwoSiteState, nu: f64, dt: f64) -> TwoSiteState {
    let theta = nu * dt;
    let (sin, cos) = theta.sin_cos();
    let i = Complex64::i();
    TwoSiteState {
        c_plus: cos * state.c_plus - i * sin * state.c_minus,
        c_minus: cos * state.c_minus - i * sin * state.c_plus,
    }
}

/// One instantaneous GRW-type reduction in the two-outcome regime
/// (cat separation much larger than the hit width): outcome + with
/// probability |c+|^2, state collapses to the corresponding basis state.
pub fn grw_jump_two_site<R: Rng + ?Sized>(state: &TwoSiteState, rng: &mut R) -> (TwoSiteState, bool) {
    let plus = rng.gen::<f64>() < state.p_plus();
    let collapsed = if plus { TwoSiteState::plus() } else { TwoSiteState::minus() };
    (collapsed, plus)
}

/// One Euler-Maruyama step of the norm-preserving diffusive collapse SSE in
/// the site basis (Ito convention, renormalized after the step):
///
///   dc = (-Gamma/8)(sigma3 - <sigma3>)^2 c dt + (sqrt(Gamma)/2)(sigma3 - <sigma3>) c dW
///
/// E[|c+|^2] is a martingale of the continuous process.
pub fn csl_diffusive_step<R: Rng + ?Sized>(
    state: &TwoSiteState,
    gamma_cm: f64,
    dt: f64,
    rng: &mut R,
) -> Result<TwoSiteState> {
    if gamma_cm * dt >= 0.1 {
        return Err(CoreError::ResolutionTooCoarse(gamma_cm * dt));
    }
    if gamma_cm == 0.0 {
        return Ok(*state);
    }
    let z = state.site_polarization();
    let a_plus = 1.0 - z;
    let a_minus = -1.0 - z;
    let dw: f64 = {
        let xi: f64 = StandardNormal.sample(rng);
        xi * dt.sqrt()
    };
    let drift = -gamma_cm / 8.0 * dt;
    let diff = gamma_cm.sqrt() / 2.0 * dw;
    let mut next = TwoSiteState {
        c_plus: state.c_plus * (1.0 + drift * a_plus * a_plus + diff * a_plus),
        c_minus: state.c_minus * (1.0 + drift * a_minus * a_minus + diff * a_minus),
    };
    next.renormalize();
    Ok(next)
}

/// Mean of the telegraph force for initial state |+>: -f0 exp(-Gamma t).
pub fn telegraph_analytic_mean(f0: f64, gamma: f64, t: f64) -> f64 {
    -f0 * (-gamma * t).exp()
}

/// Two-time correlation of the telegraph force: f0^2 exp(-Gamma |t' - t|).
pub fn telegraph_analytic_corr(f0: f64, gamma: f64, t: f64, t2: f64) -> f64 {
    f0 * f0 * (-gamma * (t2 - t).abs()).exp()
}

/// What happened at an event mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    /// Telegraph flip of the probe-monitored force
    Jump,
    /// Collapse event (GRW hit, CSL localization, DP reduction, flash)
    Hit,
    /// Tunneling flip between the minima
    Tunnel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceEvent {
    pub time: f64,
    pub kind: EventKind,
}

/// Time-stamped probe-force trajectory from one stochastic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceRecord {
    pub theory: TheoryId,
    pub seed: u64,
    /// Uniform sample grid, strictly increasing, starting at 0
    pub times: Vec<f64>,
    /// Force at each sample time, N
    pub forces: Vec<f64>,
    pub events: Vec<ForceEvent>,
}

impl ForceRecord {
    fn with_capacity(theory: TheoryId, seed: u64, n: usize) -> Self {
        Self {
            theory,
            seed,
            times: Vec::with_capacity(n),
            forces: Vec::with_capacity(n),
            events: Vec::new(),
        }
    }

    /// True when every sample is one of {-f0, 0, +f0} (jump-theory invariant).
    pub fn values_in_jump_set(&self, f0: f64) -> bool {
        let tol = 1e-12 * f0.abs().max(f64::MIN_POSITIVE);
        self.forces
            .iter()
            .all(|f| f.abs() <= tol || (f.abs() - f0.abs()).abs() <= tol)
    }
}

/// Deterministic per-trajectory stream derivation: stream = hash(seed, index).
pub fn derive_stream_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 over the combined word
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_grid(horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(horizon >= dt) {
        return Err(CoreError::InvalidArgument(format!(
            "need dt > 0 and horizon >= dt, got dt = {dt}, horizon = {horizon}"
        )));
    }
    let n_steps = (horizon / dt).round().max(1.0) as usize;
    Ok((0..=n_steps).map(|i| i as f64 * dt).collect())
}

fn exp_waiting_time<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Two-state Markov jump process starting at -f0 with per-state flip rate
/// Gamma/2, sampled on a uniform grid. This is the unique symmetric process
/// whose mean and autocorrelation reproduce the analytic benchmarks.
pub fn telegraph_sample(
    f0: f64,
    gamma: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ForceRecord> {
    if gamma * dt >= 0.1 {
        return Err(CoreError::ResolutionTooCoarse(gamma * dt));
    }
    let times = sample_grid(horizon, dt)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut record = ForceRecord::with_capacity(TheoryId::CqtNewton, seed, times.len());

    let mut force = -f0;
    let mut next_flip = exp_waiting_time(gamma / 2.0, &mut rng);
    for &t in &times {
        while next_flip <= t {
            force = -force;
            record.events.push(ForceEvent { time: next_flip, kind: EventKind::Jump });
            next_flip += exp_waiting_time(gamma / 2.0, &mut rng);
        }
        record.times.push(t);
        record.forces.push(force);
    }
    Ok(record)
}

/// Theory-appropriate composition of the two-site steps into one trajectory.
pub fn run_two_site_trajectory(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    params: &CollapseParams,
    consts: &PhysicalConstants,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ForceRecord> {
    let report = rate_report(theory, protocol, params, consts);
    let f0 = point_force(
        consts,
        protocol.sphere_mass,
        protocol.probe_mass,
        protocol.cat_separation_l,
        protocol.probe_distance(),
    )?;

    match theory.alias_target() {
        TheoryId::Nh => {
            let times = sample_grid(horizon, dt)?;
            let forces = vec![0.0; times.len()];
            Ok(ForceRecord { theory, seed, times, forces, events: Vec::new() })
        }
        TheoryId::CqtNewton | TheoryId::Grw0 | TheoryId::Csl0 | TheoryId::Dp0 | TheoryId::K0 => {
            let mut rec = telegraph_sample(f0, report.effective_cm_rate, horizon, dt, seed)?;
            rec.theory = theory;
            Ok(rec)
        }
        TheoryId::GrwMN | TheoryId::KMN => jump_trajectory(
            theory,
            protocol,
            report.effective_cm_rate,
            report.collapse_effective_on_cat,
            f0,
            horizon,
            dt,
            seed,
        ),
        TheoryId::GrwFN => flash_trajectory(
            theory,
            protocol,
            report.effective_cm_rate,
            report.collapse_effective_on_cat,
            f0,
            horizon,
            dt,
            seed,
        ),
        TheoryId::CslMN | TheoryId::TdCsl => diffusive_trajectory(
            theory,
            protocol,
            report.effective_cm_rate,
            report.collapse_effective_on_cat,
            f0,
            horizon,
            dt,
            seed,
        ),
        TheoryId::DpMN | TheoryId::TdDp => reduction_trajectory(
            theory,
            protocol,
            report.effective_cm_rate,
            report.collapse_effective_on_cat,
            f0,
            horizon,
            dt,
            seed,
        ),
        TheoryId::KafriEtAl | TheoryId::BeraEtAl | TheoryId::AdlerTD => unreachable!(),
    }
}

/// GRW/K-model: unitary tunneling plus Poisson-timed hits. A width-effective
/// hit selects one minimum; the SN self-interaction then freezes tunneling
/// (nu -> 0), so the force stays at that value.
#[allow(clippy::too_many_arguments)]
fn jump_trajectory(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    rate: f64,
    width_effective: bool,
    f0: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ForceRecord> {
    let times = sample_grid(horizon, dt)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut record = ForceRecord::with_capacity(theory, seed, times.len());

    let mut state = TwoSiteState::symmetric_cat();
    let mut collapsed: Option<f64> = None; // force after collapse
    let mut next_hit = exp_waiting_time(rate, &mut rng);
    let mut prev_t = 0.0;
    for &t in &times {
        while next_hit <= t {
            if collapsed.is_none() {
                state = evolve_unitary(&state, protocol.tunneling_rate_nu, next_hit - prev_t);
                prev_t = next_hit;
            }
            record.events.push(ForceEvent { time: next_hit, kind: EventKind::Hit });
            if width_effective && collapsed.is_none() {
                let (post, plus) = grw_jump_two_site(&state, &mut rng);
                state = post;
                collapsed = Some(if plus { -f0 } else { f0 });
            }
            next_hit += exp_waiting_time(rate, &mut rng);
        }
        if collapsed.is_none() {
            state = evolve_unitary(&state, protocol.tunneling_rate_nu, t - prev_t);
            prev_t = t;
        }
        record.times.push(t);
        record.forces.push(collapsed.unwrap_or(0.0));
    }
    Ok(record)
}

/// Flash ontology: no matter density between collapse events, so the force is
/// zero except for a delta-like mark at each flash. Between flashes the state
/// evolves unitarily (no SN term), so tunneling stays active.
#[allow(clippy::too_many_arguments)]
fn flash_trajectory(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    rate: f64,
    width_effective: bool,
    f0: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ForceRecord> {
    let times = sample_grid(horizon, dt)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut record = ForceRecord::with_capacity(theory, seed, times.len());

    let mut state = TwoSiteState::symmetric_cat();
    let mut next_flash = exp_waiting_time(rate, &mut rng);
    let mut prev_t = 0.0;
    // force mark applied to the first sample at or after the flash
    let mut pending_mark: Option<f64> = None;
    for &t in &times {
        while next_flash <= t {
            state = evolve_unitary(&state, protocol.tunneling_rate_nu, next_flash - prev_t);
            prev_t = next_flash;
            let (post, plus) = grw_jump_two_site(&state, &mut rng);
            if width_effective {
                state = post;
            }
            record.events.push(ForceEvent { time: next_flash, kind: EventKind::Hit });
            pending_mark = Some(if plus { -f0 } else { f0 });
            next_flash += exp_waiting_time(rate, &mut rng);
        }
        state = evolve_unitary(&state, protocol.tunneling_rate_nu, t - prev_t);
        prev_t = t;
        record.times.push(t);
        record.forces.push(pending_mark.take().unwrap_or(0.0));
    }
    Ok(record)
}

/// Site purity above which a diffusive trajectory counts as localized.
pub const LOCALIZED_PURITY: f64 = 1.0 - 1e-6;

/// CSL-type diffusive localization. When the rate is resolvable at the sample
/// step the SSE is integrated directly; otherwise the collapse completes
/// inside one sample interval and the exact strong-noise limit is used
/// (Born-rule selection at an Exp(rate) time).
///
/// For the matter-density variant the SN self-interaction freezes the state
/// in the selected minimum; for Tilloy-Diosi there is no self-interaction, so
/// tunneling stays active and is Zeno-suppressed to ~nu^2/Gamma.
#[allow(clippy::too_many_arguments)]
fn diffusive_trajectory(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    gamma_cm: f64,
    width_effective: bool,
    f0: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ForceRecord> {
    let times = sample_grid(horizon, dt)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut record = ForceRecord::with_capacity(theory, seed, times.len());

    if !width_effective || gamma_cm == 0.0 {
        // localization cannot resolve the two minima; the cat is inert
        record.times = times;
        record.forces = vec![0.0; record.times.len()];
        return Ok(record);
    }

    let sn_freeze = theory.alias_target() != TheoryId::TdCsl;
    if gamma_cm * dt < 0.1 {
        let mut state = TwoSiteState::symmetric_cat();
        let mut localized = false;
        let mut frozen: Option<f64> = None;
        let mut last_sign = 0.0;
        for &t in &times {
            if t > 0.0 {
                if let Some(force) = frozen {
                    record.times.push(t);
                    record.forces.push(force);
                    continue;
                }
                state = evolve_unitary(&state, protocol.tunneling_rate_nu, dt);
                state = csl_diffusive_step(&state, gamma_cm, dt, &mut rng)?;
                if !localized && state.site_purity() > LOCALIZED_PURITY {
                    localized = true;
                    record.events.push(ForceEvent { time: t, kind: EventKind::Hit });
                    if sn_freeze {
                        let pinned = if state.p_plus() > 0.5 {
                            TwoSiteState::plus()
                        } else {
                            TwoSiteState::minus()
                        };
                        state = pinned;
                        frozen = Some(-f0 * state.site_polarization());
                    }
                    last_sign = state.site_polarization().signum();
                } else if localized {
                    let sign = state.site_polarization().signum();
                    if sign != 0.0 && sign != last_sign {
                        record.events.push(ForceEvent { time: t, kind: EventKind::Tunnel });
                        last_sign = sign;
                    }
                }
            }
            record.times.push(t);
            record.forces.push(frozen.unwrap_or(-f0 * state.site_polarization()));
        }
    } else {
        strong_collapse_fill(
            &times,
            gamma_cm,
            protocol.tunneling_rate_nu,
            sn_freeze,
            f0,
            &mut rng,
            &mut record,
        );
    }
    Ok(record)
}

/// DP-type reduction: exponential-time state-vector reduction at the damping
/// rate; the force is zero from the symmetric cat until the reduction selects
/// a minimum.
#[allow(clippy::too_many_arguments)]
fn reduction_trajectory(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    rate: f64,
    width_effective: bool,
    f0: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<ForceRecord> {
    let times = sample_grid(horizon, dt)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut record = ForceRecord::with_capacity(theory, seed, times.len());
    if !width_effective || rate == 0.0 {
        record.times = times;
        record.forces = vec![0.0; record.times.len()];
        return Ok(record);
    }
    let sn_freeze = theory.alias_target() != TheoryId::TdDp;
    strong_collapse_fill(
        &times,
        rate,
        protocol.tunneling_rate_nu,
        sn_freeze,
        f0,
        &mut rng,
        &mut record,
    );
    Ok(record)
}

/// Fill a record for collapse completing below the sample resolution: one
/// Exp(rate) reduction to a Born-selected minimum, then (without SN freezing)
/// rare Zeno-limited tunneling flips at ~nu^2/rate.
fn strong_collapse_fill(
    times: &[f64],
    rate: f64,
    nu: f64,
    sn_freeze: bool,
    f0: f64,
    rng: &mut ChaCha12Rng,
    record: &mut ForceRecord,
) {
    let t_collapse = exp_waiting_time(rate, rng);
    let plus = rng.gen::<f64>() < 0.5;
    let mut force_after = if plus { -f0 } else { f0 };
    let mut collapse_marked = false;
    let zeno_rate = if sn_freeze { 0.0 } else { nu * nu / rate };
    let mut next_tunnel = t_collapse + exp_waiting_time(zeno_rate, rng);
    for &t in times {
        if t >= t_collapse && !collapse_marked {
            record.events.push(ForceEvent { time: t_collapse, kind: EventKind::Hit });
            collapse_marked = true;
        }
        while collapse_marked && next_tunnel <= t {
            force_after = -force_after;
            record.events.push(ForceEvent { time: next_tunnel, kind: EventKind::Tunnel });
            next_tunnel += exp_waiting_time(zeno_rate, rng);
        }
        record.times.push(t);
        record.forces.push(if t >= t_collapse { force_after } else { 0.0 });
    }
}

/// Ensemble statistics over trajectories sharing one sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n_traj: usize,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Lag values (s) at which the two-time correlation is estimated
    pub corr_lags: Vec<f64>,
    /// Time-averaged lag correlation E[F(t)F(t+lag)]
    pub corr: Vec<f64>,
    pub corr_stderr: Vec<f64>,
}

/// Mean/stderr per time sample and time-averaged lag correlations with
/// across-trajectory standard errors.
pub fn ensemble_statistics(records: &[ForceRecord], lag_steps: &[usize]) -> EnsembleSummary {
    assert!(!records.is_empty(), "need at least one record");
    let n_traj = records.len();
    let n_t = records[0].times.len();
    let dt = if n_t > 1 { records[0].times[1] - records[0].times[0] } else { 0.0 };

    let mut mean = vec![0.0; n_t];
    let mut m2 = vec![0.0; n_t];
    for rec in records {
        for (i, f) in rec.forces.iter().enumerate() {
            mean[i] += f;
            m2[i] += f * f;
        }
    }
    let mut stderr = vec![0.0; n_t];
    for i in 0..n_t {
        mean[i] /= n_traj as f64;
        let var = (m2[i] / n_traj as f64 - mean[i] * mean[i]).max(0.0);
        stderr[i] = (var / n_traj as f64).sqrt();
    }

    let mut corr = Vec::with_capacity(lag_steps.len());
    let mut corr_stderr = Vec::with_capacity(lag_steps.len());
    let mut corr_lags = Vec::with_capacity(lag_steps.len());
    for &lag in lag_steps {
        corr_lags.push(lag as f64 * dt);
        // per-trajectory time average, then stats across trajectories
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for rec in records {
            let n_pairs = n_t.saturating_sub(lag);
            let c = if n_pairs == 0 {
                0.0
            } else {
                (0..n_pairs).map(|i| rec.forces[i] * rec.forces[i + lag]).sum::<f64>()
                    / n_pairs as f64
            };
            sum += c;
            sum2 += c * c;
        }
        let m = sum / n_traj as f64;
        let var = (sum2 / n_traj as f64 - m * m).max(0.0);
        corr.push(m);
        corr_stderr.push((var / n_traj as f64).sqrt());
    }

    EnsembleSummary { n_traj, times: records[0].times.clone(), mean, stderr, corr_lags, corr, corr_stderr }
}

/// Run an ensemble of independent trajectories with seed-derived streams,
/// merged deterministically by index.
#[allow(clippy::too_many_arguments)]
pub fn run_two_site_ensemble(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    params: &CollapseParams,
    consts: &PhysicalConstants,
    n_traj: usize,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<Vec<ForceRecord>> {
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| {
            run_two_site_trajectory(
                theory,
                protocol,
                params,
                consts,
                horizon,
                dt,
                derive_stream_seed(seed, i),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn analytic_mean_examples() {
        assert_eq!(telegraph_analytic_mean(2.0, 1.0, 0.0), -2.0);
        let v = telegraph_analytic_mean(1.0, 2.0, 0.5);
        assert!((v + 1.0 / std::f64::consts::E).abs() < 1e-15);
        assert_eq!(telegraph_analytic_mean(1.5, 0.0, 42.0), -1.5);
    }

    #[test]
    fn analytic_corr_examples() {
        assert_eq!(telegraph_analytic_corr(3.0, 1.0, 2.0, 2.0), 9.0);
        assert!(telegraph_analytic_corr(1.0, 1.0, 0.0, 1e6) < 1e-300);
        let a = telegraph_analytic_corr(1.0, 0.7, 1.0, 3.0);
        let b = telegraph_analytic_corr(1.0, 0.7, 3.0, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn telegraph_gamma_zero_is_constant() {
        let rec = telegraph_sample(1.0, 0.0, 1.0, 0.01, 7).unwrap();
        assert!(rec.events.is_empty());
        assert!(rec.forces.iter().all(|&f| f == -1.0));
    }

    #[test]
    fn telegraph_resolution_guard() {
        assert!(matches!(
            telegraph_sample(1.0, 100.0, 1.0, 0.01, 7),
            Err(CoreError::ResolutionTooCoarse(_))
        ));
    }

    #[test]
    fn telegraph_ensemble_mean_matches_analytic() {
        // Monte Carlo vs the analytic mean at t = 1/Gamma, n = 1e3 (smoke; the
        // acceptance suite runs 1e4)
        let (f0, gamma, n) = (1.0, 1.0, 1000);
        let horizon = 2.0;
        let dt = 0.01;
        let records: Vec<ForceRecord> = (0..n)
            .map(|i| telegraph_sample(f0, gamma, horizon, dt, derive_stream_seed(5, i)).unwrap())
            .collect();
        let stats = ensemble_statistics(&records, &[]);
        let idx = (1.0 / gamma / dt).round() as usize;
        let expected = telegraph_analytic_mean(f0, gamma, stats.times[idx]);
        let err = (stats.mean[idx] - expected).abs();
        assert!(err < 3.0 * stats.stderr[idx], "err = {err}, 3se = {}", 3.0 * stats.stderr[idx]);
    }

    #[test]
    fn telegraph_lag_correlation_matches_analytic() {
        let (f0, gamma, n) = (1.0, 1.0, 1000);
        let records: Vec<ForceRecord> = (0..n)
            .map(|i| telegraph_sample(f0, gamma, 3.0, 0.01, derive_stream_seed(11, i)).unwrap())
            .collect();
        let lag = 100; // Gamma * lag = 1
        let stats = ensemble_statistics(&records, &[lag]);
        let expected = f0 * f0 / std::f64::consts::E;
        let err = (stats.corr[0] - expected).abs();
        assert!(err < 3.0 * stats.corr_stderr[0], "err = {err}, 3se = {}", 3.0 * stats.corr_stderr[0]);
    }

    #[test]
    fn unitary_identity_and_rabi_flip() {
        let s = TwoSiteState::plus();
        let same = evolve_unitary(&s, 3.0, 0.0);
        assert_eq!(same.c_plus, s.c_plus);

        // nu dt = pi/2 takes |+> to |-> up to a phase
        let flipped = evolve_unitary(&s, 1.0, std::f64::consts::FRAC_PI_2);
        assert!(flipped.p_minus() > 1.0 - 1e-12);
    }

    #[test]
    fn unitary_population_matches_rk4_oracle() {
        // integrate i dc/dt = nu sigma1 c with RK4 as an independent oracle
        let nu = 1.3;
        let t_final = 2.0;
        let n = 20_000;
        let dt = t_final / n as f64;
        let mut c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let rhs = |c: &[Complex64; 2]| {
            let i = Complex64::i();
            [-i * nu * c[1], -i * nu * c[0]]
        };
        for _ in 0..n {
            let k1 = rhs(&c);
            let c2 = [c[0] + 0.5 * dt * k1[0], c[1] + 0.5 * dt * k1[1]];
            let k2 = rhs(&c2);
            let c3 = [c[0] + 0.5 * dt * k2[0], c[1] + 0.5 * dt * k2[1]];
            let k3 = rhs(&c3);
            let c4 = [c[0] + dt * k3[0], c[1] + dt * k3[1]];
            let k4 = rhs(&c4);
            c[0] += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            c[1] += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        }
        let direct = evolve_unitary(&TwoSiteState::plus(), nu, t_final);
        assert!((direct.p_plus() - c[0].norm_sqr()).abs() < 1e-9);
        // and the closed form P+(t) = cos^2(nu t)
        assert!((direct.p_plus() - (nu * t_final).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn jump_outcome_statistics() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        // deterministic branch
        let (s, plus) = grw_jump_two_site(&TwoSiteState::plus(), &mut rng);
        assert!(plus && s.p_plus() == 1.0);

        // |c+|^2 = 0.7 drawn 1e4 times
        let state = TwoSiteState::new(
            Complex64::new(0.7f64.sqrt(), 0.0),
            Complex64::new(0.3f64.sqrt(), 0.0),
        )
        .unwrap();
        for (p, label) in [(0.7, "0.7"), (0.5, "0.5")] {
            let st = if p == 0.5 { TwoSiteState::symmetric_cat() } else { state };
            let n = 10_000;
            let hits = (0..n).filter(|_| grw_jump_two_site(&st, &mut rng).1).count();
            let freq = hits as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 3.0 * sigma, "{label}: freq = {freq}");
        }
    }

    #[test]
    fn dephasing_step_examples() {
        let rho = TwoSiteDensityMatrix::from_state(&TwoSiteState::symmetric_cat());
        let same = dephasing_step(&rho, 0.0, 1.0);
        assert_eq!(same, rho);

        let damped = dephasing_step(&rho, 1.0, 1.0);
        assert!((damped.rho_pm.norm() - rho.rho_pm.norm() / std::f64::consts::E).abs() < 1e-15);
        assert_eq!(damped.trace(), rho.trace());
        let (lo, _) = damped.eigenvalues();
        assert!(lo >= -1e-12);
    }

    #[test]
    fn diffusive_step_gamma_zero_and_guard() {
        let s = TwoSiteState::symmetric_cat();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let same = csl_diffusive_step(&s, 0.0, 0.01, &mut rng).unwrap();
        assert_eq!(same, s);
        assert!(csl_diffusive_step(&s, 100.0, 0.01, &mut rng).is_err());
    }

    #[test]
    fn diffusive_martingale_smoke() {
        // E[|c+|^2] stays at its initial value (n = 1e3 smoke version)
        let p0: f64 = 0.3;
        let state = TwoSiteState::new(
            Complex64::new(p0.sqrt(), 0.0),
            Complex64::new((1.0 - p0).sqrt(), 0.0),
        )
        .unwrap();
        let gamma = 1.0;
        let dt = 0.01;
        let steps = 500; // t = 5/Gamma
        let n = 1000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for i in 0..n {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(77, i));
            let mut s = state;
            for _ in 0..steps {
                s = csl_diffusive_step(&s, gamma, dt, &mut rng).unwrap();
            }
            sum += s.p_plus();
            sum2 += s.p_plus() * s.p_plus();
        }
        let mean = sum / n as f64;
        let var = (sum2 / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - p0).abs() < 3.0 * se, "mean = {mean}, se = {se}");
    }

    #[test]
    fn diffusive_steps_preserve_norm() {
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        let mut s = TwoSiteState::symmetric_cat();
        for _ in 0..1000 {
            s = evolve_unitary(&s, 3.0, 0.01);
            s = csl_diffusive_step(&s, 1.0, 0.01, &mut rng).unwrap();
            assert!((s.norm_sq() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn trajectory_nh_is_identically_zero() {
        let p = ExperimentProtocol::romero_isart();
        let rec = run_two_site_trajectory(
            TheoryId::Nh, &p, &CollapseParams::default(), &consts(), 1.0, 0.01, 9,
        )
        .unwrap();
        assert!(rec.forces.iter().all(|&f| f == 0.0));
        assert!(rec.events.is_empty());
    }

    #[test]
    fn trajectory_grw_romero_isart_net_zero() {
        // width-ineffective hits leave the record at zero for the whole run
        let p = ExperimentProtocol::romero_isart();
        let rec = run_two_site_trajectory(
            TheoryId::GrwMN, &p, &CollapseParams::default(), &consts(), 0.1, 1e-3, 13,
        )
        .unwrap();
        assert!(rec.forces.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn trajectory_csl_pino_constant_after_first_event() {
        let p = ExperimentProtocol::pino();
        let params = CollapseParams::default();
        let rec =
            run_two_site_trajectory(TheoryId::CslMN, &p, &params, &consts(), 0.5, 1e-3, 21).unwrap();
        let f0 = point_force(&consts(), p.sphere_mass, p.probe_mass, p.cat_separation_l, p.probe_distance()).unwrap();
        let hit_time = rec
            .events
            .iter()
            .find(|e| e.kind == EventKind::Hit)
            .map(|e| e.time)
            .expect("collapse event expected");
        assert!(rec.events.iter().all(|e| e.kind != EventKind::Tunnel));
        let first = rec
            .forces
            .iter()
            .zip(&rec.times)
            .find(|(_, &t)| t >= hit_time)
            .map(|(f, _)| *f)
            .unwrap();
        assert!((first.abs() - f0).abs() < 1e-12 * f0);
        for (&f, &t) in rec.forces.iter().zip(&rec.times) {
            if t >= hit_time {
                assert_eq!(f, first, "constant after the first event");
            }
        }
    }

    #[test]
    fn trajectory_determinism_is_bitwise() {
        let p = ExperimentProtocol::pino();
        let params = CollapseParams::default();
        for theory in [TheoryId::CqtNewton, TheoryId::GrwMN, TheoryId::CslMN, TheoryId::GrwFN] {
            let a = run_two_site_trajectory(theory, &p, &params, &consts(), 0.5, 1e-3, 99).unwrap();
            let b = run_two_site_trajectory(theory, &p, &params, &consts(), 0.5, 1e-3, 99).unwrap();
            assert_eq!(a, b, "{theory}");
        }
    }

    #[test]
    fn jump_theories_emit_only_jump_values() {
        let p = ExperimentProtocol::pino();
        let params = CollapseParams::default();
        let c = consts();
        let f0 = point_force(&c, p.sphere_mass, p.probe_mass, p.cat_separation_l, p.probe_distance()).unwrap();
        for theory in [TheoryId::CqtNewton, TheoryId::GrwMN, TheoryId::GrwFN, TheoryId::KMN, TheoryId::Grw0] {
            let rec = run_two_site_trajectory(theory, &p, &params, &c, 0.5, 1e-3, 17).unwrap();
            assert!(rec.values_in_jump_set(f0), "{theory}");
        }
    }

    #[test]
    fn record_times_strictly_increasing() {
        let rec = telegraph_sample(1.0, 1.0, 2.0, 0.01, 31).unwrap();
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
    }
}
