//! Newtonian force and energy formulas for the sphere-probe geometry.
//!
//! Everything here is a pure function; densities are 1-D reductions with the
//! transverse profile integrated out, which is exact for the axial force
//! component used throughout.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};

/// Magnitude of the horizontal force on a probe at distance D from either
/// minimum when the full mass M sits in one minimum: f0 = G M m L / (2 D³).
pub fn point_force(consts: &PhysicalConstants, m_sphere: f64, m_probe: f64, l: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(CoreError::NonPositiveDistance(d));
    }
    if l < 0.0 {
        return Err(CoreError::InvalidArgument(format!("L must be >= 0, got {l}")));
    }
    Ok(consts.g * m_sphere * m_probe * l / (2.0 * d * d * d))
}

/// Density form of the point force: (2π/3) G ρ m L / (1 + a/R)³.
///
/// Algebraically identical to `point_force` with M = (4/3)πR³ρ and D = R + a.
pub fn density_force(consts: &PhysicalConstants, rho: f64, m_probe: f64, l: f64, a: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(CoreError::NonPositiveDistance(r));
    }
    if a < 0.0 {
        return Err(CoreError::InvalidArgument(format!("a must be >= 0, got {a}")));
    }
    let prefactor = 2.0 * PI / 3.0;
    Ok(prefactor * consts.g * rho * m_probe * l / (1.0 + a / r).powi(3))
}

/// Gravitational interaction energy between the two half-mass lumps of an
/// uncollapsed cat state: U_self = -G M² / (4 L).
pub fn self_energy(consts: &PhysicalConstants, m_sphere: f64, l: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(CoreError::NonPositiveDistance(l));
    }
    Ok(-consts.g * m_sphere * m_sphere / (4.0 * l))
}

/// A 1-D reduced matter density: mass per length sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatterDensity1D {
    /// Coordinate of the first sample, m
    pub x0: f64,
    /// Grid spacing, m
    pub dx: f64,
    /// Mass per length at each grid point, kg m⁻¹
    pub values: Vec<f64>,
}

impl MatterDensity1D {
    /// Build from raw samples. Values must be finite and non-negative.
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(CoreError::InvalidArgument(format!("dx must be positive, got {dx}")));
        }
        if values.len() < 2 {
            return Err(CoreError::InvalidArgument("density needs at least 2 samples".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CoreError::InvalidArgument(
                "density values must be finite and non-negative".into(),
            ));
        }
        Ok(Self { x0, dx, values })
    }

    pub fn grid_min(&self) -> f64 {
        self.x0
    }

    pub fn grid_max(&self) -> f64 {
        self.x0 + (self.values.len() - 1) as f64 * self.dx
    }

    /// Total mass by trapezoid quadrature, kg.
    pub fn total_mass(&self) -> f64 {
        trapezoid(&self.values, self.dx)
    }

    /// x-coordinate of sample i.
    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }
}

/// Horizontal gravitational force on a point probe at (probe_x, probe_y) from
/// a 1-D matter density along the x-axis, by trapezoid quadrature:
///
///   F_x = -G m ∫ ρ(x) (probe_x - x) / ((probe_x - x)² + probe_y²)^{3/2} dx
///
/// The probe must sit outside the density support by at least one grid cell.
pub fn net_force_on_probe(
    consts: &PhysicalConstants,
    density: &MatterDensity1D,
    probe_x: f64,
    probe_y: f64,
    probe_mass: f64,
) -> Result<f64> {
    let on_axis = probe_y.abs() < density.dx;
    let inside_span =
        probe_x >= density.grid_min() - density.dx && probe_x <= density.grid_max() + density.dx;
    if on_axis && inside_span {
        return Err(CoreError::ProbeInsideDensity);
    }
    let y2 = probe_y * probe_y;
    let integrand: Vec<f64> = density
        .values
        .iter()
        .enumerate()
        .map(|(i, rho)| {
            let dx_probe = probe_x - density.x_at(i);
            rho * dx_probe / (dx_probe * dx_probe + y2).powf(1.5)
        })
        .collect();
    Ok(-consts.g * probe_mass * trapezoid(&integrand, density.dx))
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (0.5 * values[0] + interior + 0.5 * values[values.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    /// Symmetric two-Gaussian cat density with total mass `m`.
    fn cat_density(m: f64, l: f64, sigma: f64, n: usize) -> MatterDensity1D {
        let span = l + 12.0 * sigma;
        let x0 = -span / 2.0;
        let dx = span / (n - 1) as f64;
        let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = x0 + i as f64 * dx;
                let gp = (-(x - l / 2.0).powi(2) / (2.0 * sigma * sigma)).exp();
                let gm = (-(x + l / 2.0).powi(2) / (2.0 * sigma * sigma)).exp();
                0.5 * m * norm * (gp + gm)
            })
            .collect();
        MatterDensity1D::new(x0, dx, values).unwrap()
    }

    #[test]
    fn point_force_matches_quoted_estimate() {
        // M = 0.38 ng, m = 4.0 ng, L = 1 pm, D = 3 um -> ~2e-30 N
        let f = point_force(&consts(), 0.38e-12, 4.0e-12, 1e-12, 3e-6).unwrap();
        assert!((f - 2e-30).abs() / 2e-30 < 0.10, "f = {f:e}");
    }

    #[test]
    fn point_force_zero_separation() {
        let f = point_force(&consts(), 1e-13, 4e-12, 0.0, 3e-6).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn point_force_cubic_law() {
        let f1 = point_force(&consts(), 1e-13, 4e-12, 1e-12, 3e-6).unwrap();
        let f2 = point_force(&consts(), 1e-13, 4e-12, 1e-12, 6e-6).unwrap();
        assert!((f1 / f2 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn point_force_rejects_zero_distance() {
        assert!(point_force(&consts(), 1e-13, 4e-12, 1e-12, 0.0).is_err());
    }

    #[test]
    fn density_force_matches_quoted_estimate() {
        // tantalum sphere, R = 5 um, a = 1 um, L = 10 pm -> ~0.6e-28 N
        let f = density_force(&consts(), 16_700.0, 4e-12, 1e-11, 1e-6, 5e-6).unwrap();
        assert!((f - 0.6e-28).abs() / 0.6e-28 < 0.10, "f = {f:e}");
    }

    #[test]
    fn density_force_vanishes_at_large_gap() {
        let f = density_force(&consts(), 16_700.0, 4e-12, 1e-11, 1.0, 5e-6).unwrap();
        assert!(f < 1e-40);
    }

    #[test]
    fn density_force_agrees_with_point_force() {
        let (rho, r, a, l, m) = (16_700.0f64, 5e-6f64, 1e-6, 1e-11, 4e-12);
        let m_sphere = rho * 4.0 / 3.0 * PI * r.powi(3);
        let fp = point_force(&consts(), m_sphere, m, l, r + a).unwrap();
        let fd = density_force(&consts(), rho, m, l, a, r).unwrap();
        assert!((fp - fd).abs() / fp < 1e-12);
    }

    #[test]
    fn self_energy_quoted_example() {
        // M = 1e-13 kg, L = 1 pm -> -1.7e-25 J
        let u = self_energy(&consts(), 1e-13, 1e-12).unwrap();
        assert!((u - (-1.7e-25)).abs() / 1.7e-25 < 0.02, "u = {u:e}");
    }

    #[test]
    fn self_energy_scaling_and_zero_mass() {
        let u1 = self_energy(&consts(), 1e-13, 1e-12).unwrap();
        let u2 = self_energy(&consts(), 1e-13, 0.5e-12).unwrap();
        assert!((u2 / u1 - 2.0).abs() < 1e-12);
        assert_eq!(self_energy(&consts(), 0.0, 1e-12).unwrap(), 0.0);
        assert!(self_energy(&consts(), 1e-13, 0.0).is_err());
    }

    #[test]
    fn symmetric_cat_gives_no_net_force() {
        let p = crate::protocol::ExperimentProtocol::romero_isart();
        let density = cat_density(p.sphere_mass, 5e-6, 0.2e-6, 2048);
        let f0 = point_force(&consts(), p.sphere_mass, p.probe_mass, 5e-6, 6e-6).unwrap();
        let f = net_force_on_probe(&consts(), &density, 0.0, 6e-6, p.probe_mass).unwrap();
        assert!(f.abs() < 1e-6 * f0, "f = {f:e}, f0 = {f0:e}");
    }

    #[test]
    fn collapsed_lump_matches_point_force() {
        // full mass in a narrow packet at +L/2, probe far compared to the width
        let (m, l, sigma) = (3.8e-13, 5e-6, 0.05e-6);
        let span = l + 12.0 * sigma;
        let n = 4096;
        let dx = span / (n - 1) as f64;
        let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = -span / 2.0 + i as f64 * dx;
                m * norm * (-(x - l / 2.0).powi(2) / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let density = MatterDensity1D::new(-span / 2.0, dx, values).unwrap();
        let y = 20e-6;
        let d = (y * y + l * l / 4.0).sqrt();
        let expected = point_force(&consts(), m, 4e-12, l, d).unwrap();
        let f = net_force_on_probe(&consts(), &density, 0.0, y, 4e-12).unwrap();
        // mass at +L/2 pulls the probe toward +x
        assert!(f > 0.0);
        assert!((f - expected).abs() / expected < 0.01, "f = {f:e} vs {expected:e}");

        // half mass -> half force
        let half: Vec<f64> = density.values.iter().map(|v| 0.5 * v).collect();
        let half_density = MatterDensity1D::new(density.x0, density.dx, half).unwrap();
        let fh = net_force_on_probe(&consts(), &half_density, 0.0, y, 4e-12).unwrap();
        assert!((fh - 0.5 * f).abs() / (0.5 * f) < 1e-12);
    }

    #[test]
    fn probe_inside_density_rejected() {
        let density = cat_density(1e-13, 5e-6, 0.2e-6, 512);
        assert!(matches!(
            net_force_on_probe(&consts(), &density, 0.0, 0.0, 4e-12),
            Err(CoreError::ProbeInsideDensity)
        ));
    }

    #[test]
    fn quadrature_converges_on_refinement() {
        let coarse = cat_density(3.8e-13, 5e-6, 0.3e-6, 1024);
        let fine = cat_density(3.8e-13, 5e-6, 0.3e-6, 2048);
        // off-center probe so the force is nonzero
        let fc = net_force_on_probe(&consts(), &coarse, 2e-6, 6e-6, 4e-12).unwrap();
        let ff = net_force_on_probe(&consts(), &fine, 2e-6, 6e-6, 4e-12).unwrap();
        assert!((fc - ff).abs() / ff.abs() < 1e-3);
    }

    #[test]
    fn density_mass_is_conserved() {
        let density = cat_density(3.8e-13, 5e-6, 0.2e-6, 2048);
        assert!((density.total_mass() - 3.8e-13).abs() / 3.8e-13 < 1e-8);
    }

    proptest! {
        // mirror-reflecting the density about the probe's x-coordinate flips the sign
        #[test]
        fn net_force_antisymmetric_under_mirror(shift in -2.0e-6..2.0e-6f64, sigma in 0.1e-6..0.5e-6f64) {
            let l = 4e-6;
            let n = 1024;
            let span = l + 12.0 * sigma;
            let dx = span / (n - 1) as f64;
            let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
            let values: Vec<f64> = (0..n).map(|i| {
                let x = -span / 2.0 + i as f64 * dx;
                1e-13 * norm * (-(x - shift).powi(2) / (2.0 * sigma * sigma)).exp()
            }).collect();
            let mirrored: Vec<f64> = values.iter().rev().copied().collect();
            let d1 = MatterDensity1D::new(-span / 2.0, dx, values).unwrap();
            let d2 = MatterDensity1D::new(-span / 2.0, dx, mirrored).unwrap();
            let f1 = net_force_on_probe(&consts(), &d1, 0.0, 8e-6, 4e-12).unwrap();
            let f2 = net_force_on_probe(&consts(), &d2, 0.0, 8e-6, 4e-12).unwrap();
            let scale = f1.abs().max(f2.abs()).max(1e-40);
            prop_assert!((f1 + f2).abs() / scale < 1e-9);
        }
    }
}
