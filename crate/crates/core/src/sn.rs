//! Radial Schrödinger–Newton solver on u(r) = r ψ(r), with collapse-threshold
//! detection by bisection.
//!
//! The solver works internally in rescaled units (length = sigma0, time =
//! m sigma0^2 / hbar), where the dynamics depends on the single coupling
//! K = G m^3 sigma0 / hbar^2. Strang splitting with a spectral kinetic step on
//! the odd extension of u; the self-potential uses the shell-integral Green
//! form
//!
//!   V(r) = -G m^2 [ (1/r) ∫_0^r |psi|^2 4 pi r'^2 dr' + ∫_r^rmax |psi|^2 4 pi r' dr' ].

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};

/// Radial wavefunction u(r) = r psi(r) on interior points r_j = j dr,
/// j = 1..n_intervals-1, with u(0) = u(r_max) = 0. Normalization:
/// 4 pi ∫ |u|^2 dr = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub dr: f64,
    pub u: Vec<Complex64>,
    pub mass: f64,
}

impl RadialState {
    /// 3-D Gaussian packet psi(r) ∝ exp(-r^2 / 4 sigma0^2) of per-axis width
    /// sigma0; rms radius sqrt(3) sigma0.
    pub fn new_gaussian(sigma0: f64, mass: f64, n_intervals: usize, r_max: f64) -> Result<Self> {
        if !n_intervals.is_power_of_two() {
            return Err(CoreError::GridNotPowerOfTwo(n_intervals));
        }
        if !(r_max >= 10.0 * sigma0) {
            return Err(CoreError::GridTooSmall(format!(
                "r_max = {r_max:e} < 10 sigma0 = {:e}",
                10.0 * sigma0
            )));
        }
        let dr = r_max / n_intervals as f64;
        let u: Vec<Complex64> = (1..n_intervals)
            .map(|j| {
                let r = j as f64 * dr;
                Complex64::new(r * (-(r * r) / (4.0 * sigma0 * sigma0)).exp(), 0.0)
            })
            .collect();
        let mut state = Self { dr, u, mass };
        state.normalize();
        Ok(state)
    }

    pub fn n_intervals(&self) -> usize {
        self.u.len() + 1
    }

    pub fn r_max(&self) -> f64 {
        self.n_intervals() as f64 * self.dr
    }

    pub fn norm(&self) -> f64 {
        4.0 * PI * self.u.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dr
    }

    pub fn normalize(&mut self) {
        let n = self.norm().sqrt();
        for c in &mut self.u {
            *c /= n;
        }
    }

    /// Root-mean-square radius <r^2>^{1/2}.
    pub fn rms_radius(&self) -> f64 {
        let r2 = 4.0
            * PI
            * self
                .u
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let r = (i + 1) as f64 * self.dr;
                    r * r * c.norm_sqr()
                })
                .sum::<f64>()
            * self.dr;
        r2.sqrt()
    }

    /// Probability mass in the outer `fraction` of the box (boundary-flux guard).
    pub fn outer_mass(&self, fraction: f64) -> f64 {
        let start = ((1.0 - fraction) * self.u.len() as f64) as usize;
        4.0 * PI * self.u[start..].iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dr
    }
}

/// Spectral sine-basis kinetic propagator via odd extension.
struct RadialKinetic {
    n_intervals: usize,
    phases: Vec<f64>, // k_m^2 / 2 per unit rescaled time
    fft: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl RadialKinetic {
    fn new(n_intervals: usize, d_xi: f64) -> Self {
        let len = 2 * n_intervals;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let phases = (0..len)
            .map(|m| {
                let mm = if m <= n_intervals { m as f64 } else { m as f64 - len as f64 };
                let k = PI * mm / (n_intervals as f64 * d_xi);
                k * k / 2.0
            })
            .collect();
        Self { n_intervals, phases, fft, inv, buf: vec![Complex64::default(); len] }
    }

    /// exp(-i (k^2/2) dtau) applied to the interior points of u.
    fn step(&mut self, u: &mut [Complex64], dtau: f64) {
        let n = self.n_intervals;
        debug_assert_eq!(u.len(), n - 1);
        self.buf[0] = Complex64::default();
        self.buf[n] = Complex64::default();
        for j in 1..n {
            self.buf[j] = u[j - 1];
            self.buf[2 * n - j] = -u[j - 1];
        }
        self.fft.process(&mut self.buf);
        for (c, phase) in self.buf.iter_mut().zip(&self.phases) {
            *c *= Complex64::from_polar(1.0, -phase * dtau);
        }
        self.inv.process(&mut self.buf);
        let scale = 1.0 / (2 * n) as f64;
        for j in 1..n {
            u[j - 1] = self.buf[j] * scale;
        }
    }
}

/// Dimensionless self-potential Phi(xi) (so that V = (G m^2 / sigma0) Phi),
/// from trapezoid prefix sums of |u|^2 over the interior points, with the
/// zero boundary values at xi = 0 and xi = xi_max included.
/// Normalization: 4 pi ∫ |u|^2 dxi = 1.
fn self_potential(u: &[Complex64], d_xi: f64, phi: &mut [f64]) {
    let n = u.len();
    debug_assert_eq!(phi.len(), n);
    // inner(i) = ∫_0^{xi_i} |u|^2 dxi
    let mut inner = vec![0.0; n];
    let mut prev = 0.0; // |u(0)|^2
    let mut acc = 0.0;
    for (i, c) in u.iter().enumerate() {
        let w = c.norm_sqr();
        acc += 0.5 * (prev + w) * d_xi;
        inner[i] = acc;
        prev = w;
    }
    // outer(i) = ∫_{xi_i}^{xi_max} |u|^2 / xi dxi, integrated from the far end
    let mut next = 0.0; // |u(xi_max)|^2 / xi_max
    let mut acc = 0.0;
    for i in (0..n).rev() {
        let xi = (i + 1) as f64 * d_xi;
        let v = u[i].norm_sqr() / xi;
        acc += 0.5 * (v + next) * d_xi;
        next = v;
        phi[i] = -4.0 * PI * (inner[i] / xi + acc);
    }
}

/// Semiclassical energy functional in rescaled units (kinetic + half the
/// self-interaction), used as a conservation diagnostic. The kinetic term is
/// the staggered Dirichlet difference form, independent of the spectral
/// stepping.
pub fn energy_functional(u: &[Complex64], d_xi: f64, coupling: f64) -> f64 {
    let n = u.len();
    let mut kinetic = 0.0;
    for j in 0..=n {
        let left = if j == 0 { Complex64::default() } else { u[j - 1] };
        let right = if j == n { Complex64::default() } else { u[j] };
        let grad = (right - left) / d_xi;
        kinetic += 0.5 * grad.norm_sqr() * d_xi;
    }
    let mut phi = vec![0.0; n];
    self_potential(u, d_xi, &mut phi);
    let potential: f64 = u
        .iter()
        .zip(&phi)
        .map(|(c, p)| 0.5 * coupling * p * c.norm_sqr() * d_xi)
        .sum::<f64>();
    4.0 * PI * (kinetic + potential)
}

/// Outcome of one SN evolution: final state plus the (t, rms width) series.
pub type WidthSeries = Vec<(f64, f64)>;

/// Evolve the radial SN equation for `n_steps` steps of `dt` (SI seconds).
///
/// Errors when the norm drifts by more than 1e-6 (instability) or more than
/// 1e-4 of the probability reaches the outer 10% of the box (box too small).
pub fn sn_evolve_radial(
    state: &RadialState,
    g_eff: f64,
    dt: f64,
    n_steps: usize,
    consts: &PhysicalConstants,
) -> Result<(RadialState, WidthSeries)> {
    if !(dt > 0.0) || n_steps == 0 {
        return Err(CoreError::InvalidArgument(
            "need dt > 0 and n_steps >= 1".into(),
        ));
    }
    // rescale: length unit sigma_ref, time unit m sigma_ref^2 / hbar
    let sigma_ref = state.rms_radius() / 3.0f64.sqrt();
    let time_unit = state.mass * sigma_ref * sigma_ref / consts.hbar;
    let coupling = g_eff * state.mass.powi(3) * sigma_ref / (consts.hbar * consts.hbar);
    let d_xi = state.dr / sigma_ref;
    let d_tau = dt / time_unit;

    let n_intervals = state.n_intervals();
    let mut u = state.u.clone();
    // in rescaled units the norm is 4 pi Σ|u_xi|^2 d_xi = 1 with u_xi = sqrt(sigma_ref) u
    let xi_scale = sigma_ref.sqrt();
    for c in &mut u {
        *c *= xi_scale;
    }

    let mut kinetic = RadialKinetic::new(n_intervals, d_xi);
    let mut phi = vec![0.0; u.len()];
    let norm_of = |u: &[Complex64]| 4.0 * PI * u.iter().map(|c| c.norm_sqr()).sum::<f64>() * d_xi;
    let rms_of = |u: &[Complex64]| -> f64 {
        let r2 = 4.0
            * PI
            * u.iter()
                .enumerate()
                .map(|(i, c)| {
                    let xi = (i + 1) as f64 * d_xi;
                    xi * xi * c.norm_sqr()
                })
                .sum::<f64>()
            * d_xi;
        r2.sqrt() * sigma_ref
    };

    let norm0 = norm_of(&u);
    let mut series = Vec::with_capacity(n_steps + 1);
    series.push((0.0, rms_of(&u)));
    for step in 1..=n_steps {
        kinetic.step(&mut u, d_tau / 2.0);
        if coupling != 0.0 {
            self_potential(&u, d_xi, &mut phi);
            for (c, p) in u.iter_mut().zip(&phi) {
                *c *= Complex64::from_polar(1.0, -coupling * p * d_tau);
            }
        }
        kinetic.step(&mut u, d_tau / 2.0);
        series.push((step as f64 * dt, rms_of(&u)));
    }

    let drift = (norm_of(&u) - norm0).abs() / norm0;
    if drift > 1e-6 {
        return Err(CoreError::StabilityAbort(format!(
            "norm drift {drift:.3e} over {n_steps} steps"
        )));
    }
    let mut out = RadialState { dr: state.dr, u, mass: state.mass };
    for c in &mut out.u {
        *c /= xi_scale;
    }
    if out.outer_mass(0.1) > 1e-4 {
        return Err(CoreError::GridTooSmall(format!(
            "outer 10% of the box holds {:.3e} of the probability",
            out.outer_mass(0.1)
        )));
    }
    Ok((out, series))
}

/// Simulation budget for collapse-threshold detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnBudget {
    /// Physical evolution horizon per run, s
    pub horizon: f64,
    /// Radial intervals (power of two)
    pub n_intervals: usize,
    /// Minimum box size in units of sigma0 (grown automatically when the
    /// free dispersion over the horizon needs more room)
    pub box_sigmas: f64,
    /// Maximum potential phase per step, rad
    pub phase_limit: f64,
    /// Steps cap per run
    pub max_steps: usize,
    /// Bisection stops when hi/lo falls below this ratio
    pub bracket_ratio: f64,
}

impl Default for SnBudget {
    fn default() -> Self {
        Self {
            horizon: 3.0e4,
            n_intervals: 1024,
            box_sigmas: 16.0,
            phase_limit: 0.05,
            max_steps: 40_000,
            bracket_ratio: 1.35,
        }
    }
}

/// Relative rms contraction that flags the gravitational-collapse regime.
/// Sub-threshold packets never contract below their initial width; collapsing
/// ones cross this line on their way down.
pub const CONTRACTION_THRESHOLD: f64 = 0.97;

/// True when the packet is in the gravitational-collapse regime: the rms
/// width contracts below [`CONTRACTION_THRESHOLD`] of its initial value
/// within the physical horizon. The run stops at the first contraction, well
/// before the post-collapse bounce.
pub fn collapses_within_budget(
    consts: &PhysicalConstants,
    g_eff: f64,
    sigma0: f64,
    mass: f64,
    budget: &SnBudget,
) -> Result<bool> {
    let time_unit = mass * sigma0 * sigma0 / consts.hbar;
    let tau_max = budget.horizon / time_unit;
    // size the box for the worst case of free dispersion over the horizon
    let sigma_end = (1.0 + (tau_max / 2.0) * (tau_max / 2.0)).sqrt();
    let box_sigmas = (5.5 * sigma_end).max(budget.box_sigmas);
    let mut state =
        RadialState::new_gaussian(sigma0, mass, budget.n_intervals, box_sigmas * sigma0)?;
    let w0 = state.rms_radius();

    let coupling = g_eff * mass.powi(3) * sigma0 / (consts.hbar * consts.hbar);
    let d_tau = budget.phase_limit / coupling.abs().max(1.0);
    let n_steps =
        ((budget.horizon / time_unit / d_tau).ceil() as usize).clamp(100, budget.max_steps);
    let dt = budget.horizon / n_steps as f64;

    let n_chunks = 16;
    let chunk = (n_steps / n_chunks).max(1);
    let mut done = 0;
    while done < n_steps {
        let steps = chunk.min(n_steps - done);
        let (next, series) = sn_evolve_radial(&state, g_eff, dt, steps, consts)?;
        if series.iter().any(|(_, w)| *w < CONTRACTION_THRESHOLD * w0) {
            return Ok(true);
        }
        state = next;
        done += steps;
    }
    Ok(false)
}

/// Least-squares slope of width vs time over the final quarter of the series.
pub fn width_trend_final_quarter(series: &WidthSeries) -> f64 {
    let start = series.len() * 3 / 4;
    let window = &series[start..];
    let n = window.len() as f64;
    let mean_t: f64 = window.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_w: f64 = window.iter().map(|(_, w)| w).sum::<f64>() / n;
    let cov: f64 = window.iter().map(|(t, w)| (t - mean_t) * (w - mean_w)).sum();
    let var: f64 = window.iter().map(|(t, _)| (t - mean_t) * (t - mean_t)).sum();
    cov / var
}

/// Bisect the critical mass for gravitational collapse at initial width
/// sigma0. Returns a bracket (lo, hi) with hi/lo <= 2, or None when no
/// threshold exists in [mass_lo, mass_hi] (e.g. g_eff = 0).
pub fn detect_critical_mass(
    consts: &PhysicalConstants,
    g_eff: f64,
    sigma0: f64,
    mass_lo: f64,
    mass_hi: f64,
    budget: &SnBudget,
) -> Result<Option<(f64, f64)>> {
    if !(mass_lo > 0.0 && mass_hi > mass_lo) {
        return Err(CoreError::InvalidArgument(
            "need 0 < mass_lo < mass_hi".into(),
        ));
    }
    if collapses_within_budget(consts, g_eff, sigma0, mass_lo, budget)? {
        return Ok(None); // threshold below the given range
    }
    if !collapses_within_budget(consts, g_eff, sigma0, mass_hi, budget)? {
        return Ok(None); // no collapse anywhere in range (g_eff = 0 lands here)
    }
    let mut lo = mass_lo;
    let mut hi = mass_hi;
    let ratio = budget.bracket_ratio.clamp(1.01, 2.0);
    while hi / lo > ratio {
        let mid = (lo * hi).sqrt();
        if collapses_within_budget(consts, g_eff, sigma0, mid, budget)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some((lo, hi)))
}
