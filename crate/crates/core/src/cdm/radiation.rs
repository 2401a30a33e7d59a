//! Far-field radiation of a dipole row above an infinite ground plane.
//!
//! Elements sit at `(0, y_i, 0)` and radiate into `z > 0`; the image of a
//! tangential magnetic dipole doubles its moment. Pattern angles `theta` lie in
//! the yz plane and are measured from the `-y` axis (the guide runs toward
//! `+y`), so a row phased as `exp(j k0 y cos theta0)` beams at `theta0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::consts::{angular, wavenumber, ETA0, MU0};
use crate::error::{Error, Result};
use crate::waveguide;

/// Pattern sampling step (deg).
pub const PATTERN_STEP_DEG: f64 = 0.25;

/// Hemisphere quadrature step (deg) in both angles.
pub const HEMISPHERE_STEP_DEG: f64 = 1.0;

/// `0, 0.25, ..., 180` degrees.
pub fn pattern_grid() -> Vec<f64> {
    let n = (180.0 / PATTERN_STEP_DEG).round() as usize;
    (0..=n).map(|i| i as f64 * PATTERN_STEP_DEG).collect()
}

fn array_factor(positions: &[f64], moments: &[Complex64], k: f64, u: f64) -> Complex64 {
    positions.iter().zip(moments).map(|(&y, &m)| m * Complex64::from_polar(1.0, k * u * y)).sum()
}

/// Far-field `r H` on the yz plane (A), phase reference at the origin.
///
/// The x-directed dipole's element factor is 1 everywhere on this plane.
pub fn far_field(positions: &[f64], moments: &[Complex64], f_hz: f64, theta_deg: &[f64]) -> Vec<Complex64> {
    let k = wavenumber(f_hz);
    let pref = k * k / (2.0 * PI);
    theta_deg.iter().map(|t| pref * array_factor(positions, moments, k, -t.to_radians().cos())).collect()
}

/// Midpoint rule on `(polar, azimuth)` with the polar axis along the ground
/// normal.
#[derive(Debug, Clone)]
pub struct HemisphereGrid {
    /// `(r_x, r_y, weight)` per cell; `weight` is the cell's solid angle.
    pub cells: Vec<(f64, f64, f64)>,
}

impl HemisphereGrid {
    pub fn new(step_deg: f64) -> Self {
        let n_pol = (90.0 / step_deg).round() as usize;
        let n_az = (360.0 / step_deg).round() as usize;
        let d_pol = (PI / 2.0) / n_pol as f64;
        let d_az = 2.0 * PI / n_az as f64;
        let mut cells = Vec::with_capacity(n_pol * n_az);
        for i in 0..n_pol {
            let th = (i as f64 + 0.5) * d_pol;
            let (s, _) = th.sin_cos();
            let w = s * d_pol * d_az;
            for j in 0..n_az {
                let ph = (j as f64 + 0.5) * d_az;
                let (sp, cp) = ph.sin_cos();
                cells.push((s * cp, s * sp, w));
            }
        }
        Self { cells }
    }

    pub fn total_solid_angle(&self) -> f64 {
        self.cells.iter().map(|c| c.2).sum()
    }
}

/// Radiation intensity `U(r) = eta k^4 |AF|^2 (1 - r_x^2) / (8 pi^2)` (W/sr).
fn intensity(positions: &[f64], moments: &[Complex64], k: f64, rx: f64, ry: f64) -> f64 {
    let af = array_factor(positions, moments, k, ry);
    ETA0 * k.powi(4) * af.norm_sqr() * (1.0 - rx * rx) / (8.0 * PI * PI)
}

/// Radiated power (W) by quadrature over the upper hemisphere.
pub fn hemisphere_radiated_power(positions: &[f64], moments: &[Complex64], f_hz: f64, grid: &HemisphereGrid) -> f64 {
    let k = wavenumber(f_hz);
    grid.cells.iter().map(|&(rx, ry, w)| w * intensity(positions, moments, k, rx, ry)).sum()
}

/// Radiated power (W) from the imaginary part of the exterior Green's
/// function: `-(w mu0 / 2) sum_ij m_i^* Im G_ij m_j`.
///
/// Independent of any angular quadrature; serves as a check on it.
pub fn radiated_power_from_coupling(positions: &[f64], moments: &[Complex64], f_hz: f64) -> f64 {
    let n = positions.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc -= waveguide::external_self_damping(f_hz) * moments[i].norm_sqr();
        for j in 0..n {
            if i != j {
                let g = waveguide::external_greens(f_hz, [0.0, positions[i], 0.0], [0.0, positions[j], 0.0])
                    .expect("distinct positions");
                acc += (moments[i].conj() * moments[j]).re * g.im;
            }
        }
    }
    -0.5 * angular(f_hz) * MU0 * acc
}

#[derive(Debug, Clone)]
pub struct DirectivityPattern {
    pub theta_deg: Vec<f64>,
    /// Linear directivity on the yz plane.
    pub linear: Vec<f64>,
    pub radiated_power: f64,
}

impl DirectivityPattern {
    pub fn dbi(&self) -> Vec<f64> {
        self.linear.iter().map(|d| 10.0 * d.log10()).collect()
    }

    /// `(theta_deg, dBi)` of the maximum; the first maximum wins a tie.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = 0;
        for (i, &d) in self.linear.iter().enumerate() {
            if d > self.linear[best] {
                best = i;
            }
        }
        (self.theta_deg[best], 10.0 * self.linear[best].log10())
    }
}

/// Directivity `4 pi U / P_rad` on the yz-plane pattern grid, with `P_rad`
/// integrated over the upper hemisphere only.
pub fn directivity(positions: &[f64], moments: &[Complex64], f_hz: f64) -> Result<DirectivityPattern> {
    if moments.iter().all(|m| m.norm() == 0.0) {
        return Err(Error::UndefinedDirectivity);
    }
    let k = wavenumber(f_hz);
    let grid = HemisphereGrid::new(HEMISPHERE_STEP_DEG);
    let p_rad = hemisphere_radiated_power(positions, moments, f_hz, &grid);
    if !(p_rad > 0.0) {
        return Err(Error::UndefinedDirectivity);
    }
    let theta_deg = pattern_grid();
    let linear = theta_deg
        .iter()
        .map(|t| 4.0 * PI * intensity(positions, moments, k, 0.0, -t.to_radians().cos()) / p_rad)
        .collect();
    Ok(DirectivityPattern { theta_deg, linear, radiated_power: p_rad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const F: f64 = 3.5e9;

    fn row(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 * 0.03).collect()
    }

    #[test]
    fn broadside_for_uniform_moments() {
        let y = row(20);
        let m = vec![Complex64::new(1e-6, 0.0); 20];
        let d = directivity(&y, &m, F).unwrap();
        assert_eq!(d.peak().0, 90.0);
    }

    #[test]
    fn phased_row_points_at_target() {
        let k = wavenumber(F);
        let y = row(30);
        for theta0 in [30.0_f64, 55.0, 120.0, 150.0] {
            let m: Vec<_> =
                y.iter().map(|&yi| Complex64::from_polar(1e-6, k * yi * theta0.to_radians().cos())).collect();
            let (peak, _) = directivity(&y, &m, F).unwrap().peak();
            assert!((peak - theta0).abs() <= PATTERN_STEP_DEG, "{theta0} -> {peak}");
        }
    }

    #[test]
    fn pattern_is_linear_in_moments() {
        let y = row(5);
        let a: Vec<_> = (0..5).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let b: Vec<_> = (0..5).map(|i| Complex64::new(-1.0, 0.5 * i as f64)).collect();
        let ab: Vec<_> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let g = pattern_grid();
        let (fa, fb, fab) = (far_field(&y, &a, F, &g), far_field(&y, &b, F, &g), far_field(&y, &ab, F, &g));
        for i in 0..g.len() {
            assert!((fa[i] + fb[i] - fab[i]).norm() <= 1e-9 * fab[i].norm().max(1.0));
        }
    }

    #[test]
    fn single_ground_backed_dipole() {
        // U ~ 1 - r_x^2; its hemisphere integral is 4 pi / 3, so D_max = 3
        let m = [Complex64::new(1e-6, 0.0)];
        let d = directivity(&[0.0], &m, F).unwrap();
        let (_, peak) = d.peak();
        assert_relative_eq!(peak, 10.0 * 3.0_f64.log10(), epsilon = 5e-3);
        // closed form: P = eta k^4 |m|^2 / (6 pi)
        let k = wavenumber(F);
        let p = ETA0 * k.powi(4) * 1e-12 / (6.0 * PI);
        assert_relative_eq!(d.radiated_power, p, max_relative = 1e-3);
    }

    #[test]
    fn quadrature_agrees_with_coupling_form() {
        let y = row(15);
        let m: Vec<_> =
            (0..15).map(|i| Complex64::from_polar(1e-6 * (1.0 + 0.1 * i as f64), -1.3 * i as f64)).collect();
        let q = hemisphere_radiated_power(&y, &m, F, &HemisphereGrid::new(HEMISPHERE_STEP_DEG));
        let c = radiated_power_from_coupling(&y, &m, F);
        assert_relative_eq!(q, c, max_relative = 2e-3);
    }

    #[test]
    fn directivity_integrates_to_four_pi() {
        // integrate D with a finer, different grid than the one used to normalise it
        let y = row(30);
        let k = wavenumber(F);
        let m: Vec<_> = y.iter().map(|&yi| Complex64::from_polar(1e-6, k * yi * 0.5)).collect();
        let p = hemisphere_radiated_power(&y, &m, F, &HemisphereGrid::new(HEMISPHERE_STEP_DEG));
        let fine = HemisphereGrid::new(0.2);
        let total: f64 = fine.cells.iter().map(|&(rx, ry, w)| w * 4.0 * PI * intensity(&y, &m, k, rx, ry) / p).sum();
        assert_relative_eq!(total, 4.0 * PI, max_relative = 5e-3);
        assert_relative_eq!(fine.total_solid_angle(), 2.0 * PI, max_relative = 1e-5);
    }

    #[test]
    fn zero_moments_have_no_directivity() {
        let m = [Complex64::new(0.0, 0.0); 3];
        assert!(matches!(directivity(&row(3), &m, F), Err(Error::UndefinedDirectivity)));
    }
}
