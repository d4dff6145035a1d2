//! 1-D grid wavefunction machinery: cat-state construction, the GRW hit law,
//! collapse-center sampling, Poisson event times, and the grid-level
//! double-well trajectory.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};
use crate::force::{net_force_on_probe, MatterDensity1D};
use crate::params::CollapseParams;
use crate::protocol::ExperimentProtocol;
use crate::rates::{rate_report, TheoryId};
use crate::two_site::{EventKind, ForceEvent, ForceRecord};

/// Uniform 1-D grid specification. `n` must be a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl GridSpec {
    /// Symmetric grid spanning [-half_span, +half_span].
    pub fn symmetric(half_span: f64, n: usize) -> Self {
        let dx = 2.0 * half_span / n as f64;
        Self { x0: -half_span, dx, n }
    }

    pub fn span(&self) -> f64 {
        (self.n - 1) as f64 * self.dx
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }
}

/// Discretized 1-D wavefunction with the mass it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState1D {
    pub grid: GridSpec,
    pub psi: Vec<Complex64>,
    pub mass: f64,
}

impl WaveState1D {
    pub fn norm_sq(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        for c in &mut self.psi {
            *c /= n;
        }
    }

    pub fn mean_x(&self) -> f64 {
        self.psi
            .iter()
            .enumerate()
            .map(|(i, c)| self.grid.x_at(i) * c.norm_sqr())
            .sum::<f64>()
            * self.grid.dx
    }

    /// Standard deviation of position.
    pub fn width(&self) -> f64 {
        let mean = self.mean_x();
        let var = self
            .psi
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let d = self.grid.x_at(i) - mean;
                d * d * c.norm_sqr()
            })
            .sum::<f64>()
            * self.grid.dx;
        var.sqrt()
    }

    /// Probability mass at x > threshold.
    pub fn probability_right_of(&self, threshold: f64) -> f64 {
        self.psi
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.x_at(*i) > threshold)
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            * self.grid.dx
    }

    /// Reduced matter density m |psi|^2.
    pub fn to_density(&self) -> MatterDensity1D {
        let values = self.psi.iter().map(|c| self.mass * c.norm_sqr()).collect();
        MatterDensity1D::new(self.grid.x0, self.grid.dx, values)
            .expect("wavefunction density is non-negative")
    }

    /// Binary dump. Layout, all little-endian:
    /// header n (u64), dx (f64), x0 (f64), mass (f64); payload n interleaved
    /// (re, im) f64 pairs.
    pub fn write_binary<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&self.grid.dx.to_le_bytes())?;
        w.write_all(&self.grid.x0.to_le_bytes())?;
        w.write_all(&self.mass.to_le_bytes())?;
        for c in &self.psi {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a state dumped by [`WaveState1D::write_binary`].
    pub fn read_binary<R: std::io::Read>(mut r: R) -> std::io::Result<Self> {
        let mut u64buf = [0u8; 8];
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let n = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut f64buf)?;
        let dx = f64::from_le_bytes(f64buf);
        r.read_exact(&mut f64buf)?;
        let x0 = f64::from_le_bytes(f64buf);
        r.read_exact(&mut f64buf)?;
        let mass = f64::from_le_bytes(f64buf);
        let mut psi = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut f64buf)?;
            let re = f64::from_le_bytes(f64buf);
            r.read_exact(&mut f64buf)?;
            let im = f64::from_le_bytes(f64buf);
            psi.push(Complex64::new(re, im));
        }
        Ok(Self { grid: GridSpec { x0, dx, n }, psi, mass })
    }
}

/// Normalized equal-weight two-Gaussian cat state at +-L/2. The overlap
/// between the components is kept; the numerical normalization absorbs it.
pub fn make_cat_state(sigma: f64, l: f64, grid: GridSpec, mass: f64) -> Result<WaveState1D> {
    if !grid.n.is_power_of_two() {
        return Err(CoreError::GridNotPowerOfTwo(grid.n));
    }
    if !(sigma > 0.0) || l < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "need sigma > 0 and L >= 0, got sigma = {sigma}, L = {l}"
        )));
    }
    let needed = l + 10.0 * sigma;
    if grid.span() < needed {
        return Err(CoreError::GridSpanTooSmall { span: grid.span(), needed });
    }
    let psi: Vec<Complex64> = (0..grid.n)
        .map(|i| {
            let x = grid.x_at(i);
            let gp = (-(x - l / 2.0).powi(2) / (4.0 * sigma * sigma)).exp();
            let gm = (-(x + l / 2.0).powi(2) / (4.0 * sigma * sigma)).exp();
            Complex64::new(gp + gm, 0.0)
        })
        .collect();
    let mut state = WaveState1D { grid, psi, mass };
    state.normalize();
    Ok(state)
}

/// 1-D GRW multiplication Gaussian of width sigma.
fn hit_gaussian(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Apply one GRW hit at center X: psi' = g(x - X)^{1/2} psi / C, renormalized.
/// Returns the post-hit state and the normalization factor C.
pub fn grw_hit(state: &WaveState1D, center: f64, sigma_grw: f64) -> Result<(WaveState1D, f64)> {
    let grid = state.grid;
    if center < grid.x0 || center > grid.x_at(grid.n - 1) {
        return Err(CoreError::CenterOutsideGrid(center));
    }
    let mut c_sq = 0.0;
    let mut psi = Vec::with_capacity(grid.n);
    for (i, amp) in state.psi.iter().enumerate() {
        let g = hit_gaussian(grid.x_at(i) - center, sigma_grw);
        c_sq += g * amp.norm_sqr();
        psi.push(amp * g.sqrt());
    }
    c_sq *= grid.dx;
    if !(c_sq > 0.0) {
        return Err(CoreError::StabilityAbort(
            "hit normalization vanished (center far outside support)".into(),
        ));
    }
    let mut post = WaveState1D { grid, psi, mass: state.mass };
    post.normalize();
    Ok((post, c_sq.sqrt()))
}

/// Collapse-center probability density rho(X) = C(X)^2 = (g * |psi|^2)(X) on
/// the state grid.
pub fn collapse_center_density(state: &WaveState1D, sigma_grw: f64) -> Vec<f64> {
    let grid = state.grid;
    let weights: Vec<f64> = state.psi.iter().map(|c| c.norm_sqr()).collect();
    (0..grid.n)
        .map(|j| {
            let xj = grid.x_at(j);
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * hit_gaussian(grid.x_at(i) - xj, sigma_grw))
                .sum::<f64>()
                * grid.dx
        })
        .collect()
}

/// Inverse-CDF sampler for collapse centers, tabulated on the grid.
/// Grid-exact and deterministic given the RNG stream.
pub struct CollapseCenterSampler {
    grid: GridSpec,
    cdf: Vec<f64>,
}

impl CollapseCenterSampler {
    pub fn new(state: &WaveState1D, sigma_grw: f64) -> Result<Self> {
        let density = collapse_center_density(state, sigma_grw);
        let total: f64 = density.iter().sum::<f64>() * state.grid.dx;
        if (total - 1.0).abs() > 1e-6 {
            return Err(CoreError::CenterDensityNotNormalized(total));
        }
        let mut cdf = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        for d in &density {
            acc += d * state.grid.dx;
            cdf.push(acc / total);
        }
        Ok(Self { grid: state.grid, cdf })
    }

    /// CDF value at grid index i (for KS-style checks).
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c < u);
        if idx == 0 {
            return self.grid.x_at(0);
        }
        if idx >= self.cdf.len() {
            return self.grid.x_at(self.cdf.len() - 1);
        }
        // linear interpolation inside the cell
        let c0 = self.cdf[idx - 1];
        let c1 = self.cdf[idx];
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid.x_at(idx - 1) + frac * self.grid.dx
    }
}

/// Sample one collapse center from rho(X) = C(X)^2.
pub fn sample_collapse_center<R: Rng + ?Sized>(
    state: &WaveState1D,
    sigma_grw: f64,
    rng: &mut R,
) -> Result<f64> {
    Ok(CollapseCenterSampler::new(state, sigma_grw)?.sample(rng))
}

/// Exponential waiting time to the next Poisson event; +inf when the rate is
/// zero (no event within any horizon).
pub fn poisson_next_event<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Double-well potential: two inverted Gaussians of depth u0 and width w at
/// +-L/2.
pub fn double_well(x: f64, l: f64, u0: f64, w: f64) -> f64 {
    -u0 * ((-(x - l / 2.0).powi(2) / (2.0 * w * w)).exp()
        + (-(x + l / 2.0).powi(2) / (2.0 * w * w)).exp())
}

/// Split-step Fourier propagator on the periodic line grid.
pub struct LineEvolver {
    grid: GridSpec,
    mass: f64,
    hbar: f64,
    potential: Vec<f64>,
    kinetic_phase: Vec<f64>, // hbar k^2 / (2m) per unit time
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl LineEvolver {
    pub fn new(grid: GridSpec, mass: f64, hbar: f64, potential: Vec<f64>) -> Result<Self> {
        if !grid.n.is_power_of_two() {
            return Err(CoreError::GridNotPowerOfTwo(grid.n));
        }
        if potential.len() != grid.n {
            return Err(CoreError::InvalidArgument("potential length != grid size".into()));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let dk = 2.0 * PI / (grid.n as f64 * grid.dx);
        let kinetic_phase = (0..grid.n)
            .map(|j| {
                let m = if j <= grid.n / 2 { j as f64 } else { j as f64 - grid.n as f64 };
                let k = m * dk;
                hbar * k * k / (2.0 * mass)
            })
            .collect();
        Ok(Self { grid, mass, hbar, potential, kinetic_phase, fwd, inv })
    }

    /// max |V| / hbar, the potential phase rate that bounds the step size.
    pub fn potential_phase_rate(&self) -> f64 {
        self.potential.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) / self.hbar
    }

    /// One Strang step V/2 - T - V/2 of duration dt.
    pub fn step(&self, psi: &mut [Complex64], dt: f64) {
        debug_assert_eq!(psi.len(), self.grid.n);
        let half = |psi: &mut [Complex64]| {
            for (c, v) in psi.iter_mut().zip(&self.potential) {
                *c *= Complex64::from_polar(1.0, -v * dt / (2.0 * self.hbar));
            }
        };
        half(psi);
        self.fwd.process(psi);
        for (c, phase) in psi.iter_mut().zip(&self.kinetic_phase) {
            *c *= Complex64::from_polar(1.0, -phase * dt);
        }
        self.inv.process(psi);
        let scale = 1.0 / self.grid.n as f64;
        for c in psi.iter_mut() {
            *c *= scale;
        }
        half(psi);
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// Time-stamped collapse event on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseEvent {
    pub time: f64,
    pub center: f64,
    pub pre_width: f64,
    pub post_width: f64,
}

/// Everything one grid trajectory produces.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub record: ForceRecord,
    pub events: Vec<CollapseEvent>,
    pub final_state: WaveState1D,
}

/// Grid and double-well parameters for the grid trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Grid size (power of two)
    pub n: usize,
    /// Cat packet width as a fraction of L
    pub sigma_fraction: f64,
    /// Well width as a fraction of L
    pub well_width_fraction: f64,
    /// Well depth, J
    pub well_depth: f64,
    /// Internal substeps allowed per output sample before the deep-well
    /// stationary path takes over
    pub max_substeps: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            n: 2048,
            sigma_fraction: 0.125,
            well_width_fraction: 1.0 / 6.0,
            well_depth: 1e-19,
            max_substeps: 256,
        }
    }
}

/// Full grid-level trajectory: probe force from the instantaneous matter
/// density at each output time, GRW-type hits at Poisson times (plus any
/// forced hits), double-well potential active.
///
/// When the well depth makes the unitary phase unresolvable at the requested
/// output step (the physical presets are many orders into this regime), the
/// packets are pinned by the wells and the density is treated as stationary
/// between hits; hits remain the only density-changing events, which is the
/// deep-well limit of the same dynamics.
#[allow(clippy::too_many_arguments)]
pub fn grid_trajectory(
    theory: TheoryId,
    protocol: &ExperimentProtocol,
    params: &CollapseParams,
    consts: &PhysicalConstants,
    options: &GridOptions,
    horizon: f64,
    dt: f64,
    seed: u64,
    forced_hits: &[(f64, f64)],
) -> Result<GridRun> {
    let base = theory.alias_target();
    let supported = matches!(
        base,
        TheoryId::GrwMN | TheoryId::KMN | TheoryId::GrwFN | TheoryId::Nh
    );
    if !supported {
        return Err(CoreError::UnsupportedEngine {
            theory: theory.name().into(),
            engine: "grid".into(),
        });
    }
    if !(dt > 0.0) || horizon < dt {
        return Err(CoreError::InvalidArgument(format!(
            "need dt > 0 and horizon >= dt, got dt = {dt}, horizon = {horizon}"
        )));
    }

    let report = rate_report(theory, protocol, params, consts);
    let l = protocol.cat_separation_l;
    let sigma = options.sigma_fraction * l;
    let sigma_hit = report.collapse_width.unwrap_or(params.sigma_grw);

    // span: cat + margins; hits wider than the cat region fall back to the
    // broad-hit limit, so the grid only ever needs to resolve the cat scale.
    let half_span = 0.5 * l + 6.0 * sigma + 3.0 * sigma_hit.min(l);
    let grid = GridSpec::symmetric(half_span, options.n);
    let mut state = make_cat_state(sigma, l, grid, protocol.sphere_mass)?;

    let well_w = options.well_width_fraction * l;
    let potential: Vec<f64> = (0..grid.n)
        .map(|i| double_well(grid.x_at(i), l, options.well_depth, well_w))
        .collect();
    let evolver = LineEvolver::new(grid, protocol.sphere_mass, consts.hbar, potential)?;

    // substeps needed to keep the potential phase under 0.1 rad
    let needed = (evolver.potential_phase_rate() * dt / 0.1).ceil();
    let frozen = needed > options.max_substeps as f64;
    let n_sub = if frozen { 0 } else { (needed as usize).max(1) };

    let probe_x = 0.0;
    let probe_y = protocol.probe_y_offset();
    let probe_mass = protocol.probe_mass;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let rate = report.effective_cm_rate;
    let flash_only = base == TheoryId::GrwFN;

    // merge Poisson times with forced hits; forced hits carry a center
    let mut hits: Vec<(f64, Option<f64>)> = forced_hits.iter().map(|&(t, x)| (t, Some(x))).collect();
    if base != TheoryId::Nh {
        let mut t = poisson_next_event(rate, &mut rng);
        while t <= horizon {
            hits.push((t, None));
            t += poisson_next_event(rate, &mut rng);
        }
    }
    hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let n_steps = (horizon / dt).round().max(1.0) as usize;
    let mut record = ForceRecord {
        theory,
        seed,
        times: Vec::with_capacity(n_steps + 1),
        forces: Vec::with_capacity(n_steps + 1),
        events: Vec::new(),
    };
    let mut collapse_events = Vec::new();

    let broad_hit_limit = sigma_hit >= 3.0 * half_span;
    let mut hit_iter = hits.into_iter().peekable();
    let mut flash_mark: Option<f64> = None;
    for i in 0..=n_steps {
        let t = i as f64 * dt;
        if i > 0 && !frozen {
            for _ in 0..n_sub {
                evolver.step(&mut state.psi, dt / n_sub as f64);
            }
        }
        while hit_iter.peek().map(|h| h.0 <= t).unwrap_or(false) {
            let (t_hit, forced_center) = hit_iter.next().unwrap();
            let pre_width = state.width();
            let center = match forced_center {
                Some(x) => x,
                None if broad_hit_limit => {
                    // hit much wider than the cat: rho(X) -> g(X - <x>)
                    let xi: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                    state.mean_x() + sigma_hit * xi
                }
                None => sample_collapse_center(&state, sigma_hit, &mut rng)?,
            };
            if !broad_hit_limit {
                let (post, _c) = grw_hit(&state, center, sigma_hit)?;
                state = post;
            }
            record.events.push(ForceEvent { time: t_hit, kind: EventKind::Hit });
            collapse_events.push(CollapseEvent {
                time: t_hit,
                center,
                pre_width,
                post_width: state.width(),
            });
            if flash_only {
                // force mark from the configuration selected by the flash
                let sign = if center > 0.0 { 1.0 } else { -1.0 };
                let full = crate::force::point_force(
                    consts,
                    protocol.sphere_mass,
                    probe_mass,
                    l,
                    protocol.probe_distance(),
                )?;
                flash_mark = Some(sign * full);
            }
        }
        let force = if flash_only {
            flash_mark.take().unwrap_or(0.0)
        } else {
            net_force_on_probe(consts, &state.to_density(), probe_x, probe_y, probe_mass)?
        };
        record.times.push(t);
        record.forces.push(force);
    }
    Ok(GridRun { record, events: collapse_events, final_state: state })
}
