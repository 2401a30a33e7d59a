//! Holographic polarizability synthesis and Lorentzian-constrained mapping.
//!
//! The ideal hologram asks every element for a unit phasor that cancels the
//! guided-wave phase and adds the free-space phase of the target direction.
//! A resonant element cannot deliver arbitrary phasors: its polarizability is
//! tied to a Lorentzian, so amplitude and phase move together as the element's
//! resonance is tuned. [`euclidean_map`] picks, per element, the tunable
//! resonance whose polarizability lies closest to the (scaled) requirement.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consts::angular;
use crate::error::{domain, Result};

/// Default tuning-grid density used by the antenna designer.
pub const DEFAULT_TUNING_GRID: usize = 501;

/// Resonant response of one metamaterial element.
///
/// The damping rate is always derived from the resonance and quality factor
/// (`gamma = omega0 / (2 Q)`), never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianParams {
    /// Coupling factor `F` (m^3).
    pub coupling_factor: f64,
    /// Quality factor `Q`.
    pub quality_factor: f64,
    /// Resonance frequency `f0` (Hz).
    pub resonance_hz: f64,
    /// Lowest reachable resonance (Hz).
    pub tuning_min_hz: f64,
    /// Highest reachable resonance (Hz).
    pub tuning_max_hz: f64,
}

impl LorentzianParams {
    pub fn new(
        coupling_factor: f64,
        quality_factor: f64,
        resonance_hz: f64,
        tuning_min_hz: f64,
        tuning_max_hz: f64,
    ) -> Result<Self> {
        let p = Self { coupling_factor, quality_factor, resonance_hz, tuning_min_hz, tuning_max_hz };
        p.validate()?;
        Ok(p)
    }

    /// 3.0e-9 m^3 coupling, Q = 10, tunable over 3.2-3.8 GHz, resting at 3.5 GHz.
    pub fn reference() -> Self {
        Self {
            coupling_factor: 3.0e-9,
            quality_factor: 10.0,
            resonance_hz: 3.5e9,
            tuning_min_hz: 3.2e9,
            tuning_max_hz: 3.8e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling_factor > 0.0) {
            return domain(format!("coupling factor must be positive, got {}", self.coupling_factor));
        }
        if !(self.quality_factor > 0.0) {
            return domain(format!("quality factor must be positive, got {}", self.quality_factor));
        }
        if !(self.tuning_min_hz > 0.0 && self.tuning_min_hz < self.tuning_max_hz) {
            return domain(format!(
                "tuning range [{}, {}] Hz is empty or non-positive",
                self.tuning_min_hz, self.tuning_max_hz
            ));
        }
        if !(self.resonance_hz >= self.tuning_min_hz && self.resonance_hz <= self.tuning_max_hz) {
            return domain(format!(
                "resonance {} Hz lies outside the tuning range [{}, {}] Hz",
                self.resonance_hz, self.tuning_min_hz, self.tuning_max_hz
            ));
        }
        Ok(())
    }

    /// Damping rate `gamma = omega0 / (2 Q)` in rad/s.
    pub fn damping(&self) -> f64 {
        angular(self.resonance_hz) / (2.0 * self.quality_factor)
    }

    /// Same element retuned to `resonance_hz`.
    pub fn with_resonance(&self, resonance_hz: f64) -> Result<Self> {
        let p = Self { resonance_hz, ..*self };
        p.validate()?;
        Ok(p)
    }

    /// Polarizability at `f_hz`; see [`lorentzian_alpha`].
    pub fn alpha(&self, f_hz: f64) -> Result<Complex64> {
        lorentzian_alpha(self, f_hz)
    }

    /// On-resonance magnitude `2 Q F`.
    pub fn peak_magnitude(&self) -> f64 {
        2.0 * self.quality_factor * self.coupling_factor
    }
}

/// `F w^2 / (w0^2 - w^2 + j w gamma)`.
///
/// With the `e^{+j w t}` convention the imaginary part is strictly negative
/// for every positive frequency.
pub fn lorentzian_alpha(params: &LorentzianParams, f_hz: f64) -> Result<Complex64> {
    if !(f_hz > 0.0) {
        return domain(format!("frequency must be positive, got {f_hz}"));
    }
    let w = angular(f_hz);
    let w0 = angular(params.resonance_hz);
    let num = params.coupling_factor * w * w;
    let den = Complex64::new(w0 * w0 - w * w, w * params.damping());
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequiredPolarizability {
    pub element_index: usize,
    pub y_position: f64,
    /// Unit-magnitude target phasor.
    pub value: Complex64,
}

/// Ideal holographic phasors `exp(j beta y) exp(j k0 y cos theta0)`.
///
/// `beta` is the (real) guided propagation constant and `k0` the free-space
/// wavenumber, both in rad/m; `theta0_deg` is the beam direction.
pub fn required_polarizabilities(
    positions: &[f64],
    beta: f64,
    k0: f64,
    theta0_deg: f64,
) -> Result<Vec<RequiredPolarizability>> {
    if positions.is_empty() {
        return domain("no element positions given");
    }
    if !(k0 > 0.0) {
        return domain(format!("free-space wavenumber must be positive, got {k0}"));
    }
    let cos0 = theta0_deg.to_radians().cos();
    Ok(positions
        .iter()
        .enumerate()
        .map(|(i, &y)| RequiredPolarizability {
            element_index: i,
            y_position: y,
            value: Complex64::from_polar(1.0, y * (beta + k0 * cos0)),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    pub resonance_hz: f64,
    pub alpha: Complex64,
}

/// Polarizabilities reachable at a fixed operating frequency, ordered by
/// increasing resonance.
#[derive(Debug, Clone)]
pub struct Locus {
    pub operating_hz: f64,
    pub points: Vec<LocusPoint>,
}

impl Locus {
    pub fn max_magnitude(&self) -> f64 {
        self.points.iter().map(|p| p.alpha.norm()).fold(0.0, f64::max)
    }

    /// Index of the sample closest to `target` and its distance. Ties go to the
    /// lower resonance.
    pub fn nearest(&self, target: Complex64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d = (p.alpha - target).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

/// Sweep the element resonance uniformly over its tuning range and record the
/// polarizability each setting produces at `operating_hz`.
pub fn achievable_locus(params: &LorentzianParams, operating_hz: f64, grid_points: usize) -> Result<Locus> {
    if grid_points < 2 {
        return domain(format!("locus needs at least 2 grid points, got {grid_points}"));
    }
    params.validate()?;
    let (lo, hi) = (params.tuning_min_hz, params.tuning_max_hz);
    let step = (hi - lo) / (grid_points - 1) as f64;
    let points = (0..grid_points)
        .map(|i| {
            // pin the last sample to the range end exactly
            let f0 = if i + 1 == grid_points { hi } else { lo + step * i as f64 };
            let alpha = lorentzian_alpha(&params.with_resonance(f0)?, operating_hz)?;
            Ok(LocusPoint { resonance_hz: f0, alpha })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Locus { operating_hz, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedElement {
    pub element_index: usize,
    pub tuned_f0: f64,
    pub achieved_alpha: Complex64,
    /// Distance to the scaled requirement, in units of the locus's peak magnitude.
    pub mapping_residual: f64,
}

/// Euclidean modulation.
///
/// Each unit phasor is first scaled by the locus's largest magnitude, so the
/// targets sit on the circle circumscribing the accessible polarizabilities,
/// then snapped to the nearest locus sample.
pub fn euclidean_map(
    required: &[RequiredPolarizability],
    params: &LorentzianParams,
    operating_hz: f64,
    grid_points: usize,
) -> Result<Vec<MappedElement>> {
    if required.is_empty() {
        return domain("no required polarizabilities to map");
    }
    if grid_points < 16 {
        return domain(format!("Euclidean mapping needs at least 16 grid points, got {grid_points}"));
    }
    let locus = achievable_locus(params, operating_hz, grid_points)?;
    let scale = locus.max_magnitude();
    let targets: Vec<(usize, Complex64)> = required.iter().map(|r| (r.element_index, r.value * scale)).collect();
    Ok(map_onto_locus(&targets, &locus))
}

/// Snap already-scaled targets onto `locus`. Mapping the returned
/// `achieved_alpha` values again reproduces the same resonances.
pub fn map_onto_locus(targets: &[(usize, Complex64)], locus: &Locus) -> Vec<MappedElement> {
    let scale = locus.max_magnitude();
    targets
        .iter()
        .map(|&(element_index, target)| {
            let (k, dist) = locus.nearest(target);
            let p = locus.points[k];
            MappedElement {
                element_index,
                tuned_f0: p.resonance_hz,
                achieved_alpha: p.alpha,
                mapping_residual: dist / scale,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> LorentzianParams {
        LorentzianParams::reference()
    }

    #[test]
    fn on_resonance_alpha_is_minus_j_two_q_f() {
        let a = lorentzian_alpha(&params(), 3.5e9).unwrap();
        assert_relative_eq!(a.re, 0.0, epsilon = 1e-20);
        assert_relative_eq!(a.im, -6.0e-8, max_relative = 1e-12);
    }

    #[test]
    fn alpha_vanishes_at_low_frequency() {
        let a = lorentzian_alpha(&params(), 1.0).unwrap();
        assert!(a.norm() < 1e-25);
    }

    #[test]
    fn non_positive_frequency_is_rejected() {
        assert!(lorentzian_alpha(&params(), 0.0).is_err());
        assert!(lorentzian_alpha(&params(), -1.0).is_err());
    }

    #[test]
    fn imaginary_part_negative_everywhere() {
        for k in 1..400 {
            let f = k as f64 * 2.0e7;
            assert!(lorentzian_alpha(&params(), f).unwrap().im < 0.0, "f = {f}");
        }
    }

    #[test]
    fn magnitude_peak_in_frequency_sits_at_resonance() {
        // brute force on a 1 kHz grid around f0; the w^2 numerator pushes the
        // peak up by the factor 1/sqrt(1 - 1/(8 Q^2))
        let p = params();
        let mut best = (0.0, 0.0);
        let mut f = 3.49e9;
        while f <= 3.51e9 {
            let m = lorentzian_alpha(&p, f).unwrap().norm();
            if m > best.1 {
                best = (f, m);
            }
            f += 1.0e3;
        }
        let q = p.quality_factor;
        let analytic = p.resonance_hz / (1.0 - 1.0 / (8.0 * q * q)).sqrt();
        assert!((best.0 - analytic).abs() <= 1.0e3, "{} vs {}", best.0, analytic);
        assert!((best.0 - p.resonance_hz).abs() / p.resonance_hz < 1e-3);
    }

    #[test]
    fn required_at_origin_is_one() {
        let r = required_polarizabilities(&[0.0], 90.0, 73.3, 30.0).unwrap();
        assert_eq!(r[0].value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn broadside_requirement_only_compensates_the_guide() {
        let ys = [0.0, 0.03, 0.06, 0.25];
        let r = required_polarizabilities(&ys, 90.0, 73.3, 90.0).unwrap();
        for (e, y) in r.iter().zip(ys) {
            let want = Complex64::from_polar(1.0, 90.0 * y);
            assert!((e.value - want).norm() < 1e-14);
        }
    }

    #[test]
    fn required_phase_matches_hand_evaluation() {
        let r = required_polarizabilities(&[0.03], 90.0, 73.3, 30.0).unwrap();
        // 0.03 * (90 + 73.3 cos 30deg), evaluated at 30 digits
        let phase = 4.604_389_862_921_98_f64;
        let want = Complex64::from_polar(1.0, phase);
        assert!((r[0].value - want).norm() < 1e-13);
        assert_relative_eq!(r[0].value.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn required_rejects_bad_input() {
        assert!(required_polarizabilities(&[], 90.0, 73.3, 30.0).is_err());
        assert!(required_polarizabilities(&[0.0], 90.0, 0.0, 30.0).is_err());
    }

    #[test]
    fn two_point_locus_is_the_range_ends() {
        let l = achievable_locus(&params(), 3.5e9, 2).unwrap();
        assert_eq!(l.points.len(), 2);
        assert_eq!(l.points[0].resonance_hz, 3.2e9);
        assert_eq!(l.points[1].resonance_hz, 3.8e9);
        assert!(achievable_locus(&params(), 3.5e9, 1).is_err());
    }

    #[test]
    fn locus_lies_in_lower_half_plane_and_peaks_at_two_q_f() {
        let p = params();
        let l = achievable_locus(&p, 3.5e9, 1001).unwrap();
        assert!(l.points.iter().all(|pt| pt.alpha.im <= 0.0));
        // analytic maximum over w0: 2QF / sqrt(1 - 1/(16 Q^2))
        let q = p.quality_factor;
        let analytic = p.peak_magnitude() / (1.0 - 1.0 / (16.0 * q * q)).sqrt();
        assert!((l.max_magnitude() - analytic).abs() / analytic < 1e-5);
        assert!((l.max_magnitude() - p.peak_magnitude()).abs() / p.peak_magnitude() < 1e-3);
    }

    #[test]
    fn exact_locus_sample_maps_to_itself() {
        let l = achievable_locus(&params(), 3.5e9, 501).unwrap();
        let target = l.points[123].alpha;
        let m = map_onto_locus(&[(0, target)], &l);
        assert_eq!(m[0].tuned_f0, l.points[123].resonance_hz);
        assert_eq!(m[0].mapping_residual, 0.0);
    }

    #[test]
    fn on_resonance_phase_maps_to_operating_frequency() {
        let p = params();
        let req = [RequiredPolarizability { element_index: 0, y_position: 0.0, value: Complex64::new(0.0, -1.0) }];
        let m = euclidean_map(&req, &p, 3.5e9, 501).unwrap();
        let step = (p.tuning_max_hz - p.tuning_min_hz) / 500.0;
        // the true maximum of |alpha| sits 3.5 GHz / (16 Q^2) below f_op
        assert!((m[0].tuned_f0 - 3.5e9).abs() <= 2.0 * step, "{}", m[0].tuned_f0);
    }

    #[test]
    fn mapped_resonance_is_monotone_in_required_phase() {
        // walk the required phase once around the circle; the chosen resonance
        // may only fall back once, where the walk crosses the side opposite the locus
        let p = params();
        let l = achievable_locus(&p, 3.5e9, 501).unwrap();
        let scale = l.max_magnitude();
        let f0s: Vec<f64> = (0..360)
            .map(|k| {
                let phase = (-270.0 + k as f64).to_radians();
                let t = Complex64::from_polar(scale, phase);
                map_onto_locus(&[(0, t)], &l)[0].tuned_f0
            })
            .collect();
        let descents = (0..360).filter(|&k| f0s[(k + 1) % 360] < f0s[k]).count();
        assert_eq!(descents, 1, "{f0s:?}");
        // requirements pointing away from the locus pin to its extremities
        let lo = f0s.iter().filter(|&&f| f == p.tuning_min_hz).count();
        let hi = f0s.iter().filter(|&&f| f == p.tuning_max_hz).count();
        assert!(lo > 10 && hi > 10, "lo {lo} hi {hi}");
        for k in [-270, -260, 80, 89] {
            let t = Complex64::from_polar(scale, (k as f64).to_radians());
            let f = map_onto_locus(&[(0, t)], &l)[0].tuned_f0;
            assert!(f == p.tuning_min_hz || f == p.tuning_max_hz, "phase {k}: {f}");
        }
    }

    #[test]
    fn map_rejects_empty_and_coarse_grid() {
        let req = required_polarizabilities(&[0.0], 90.0, 73.3, 30.0).unwrap();
        assert!(euclidean_map(&[], &params(), 3.5e9, 501).is_err());
        assert!(euclidean_map(&req, &params(), 3.5e9, 15).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LorentzianParams::new(0.0, 10.0, 3.5e9, 3.2e9, 3.8e9).is_err());
        assert!(LorentzianParams::new(3e-9, -1.0, 3.5e9, 3.2e9, 3.8e9).is_err());
        assert!(LorentzianParams::new(3e-9, 10.0, 3.5e9, 3.8e9, 3.2e9).is_err());
        assert!(LorentzianParams::new(3e-9, 10.0, 3.9e9, 3.2e9, 3.8e9).is_err());
        assert!(LorentzianParams::new(3e-9, 10.0, 3.5e9, 3.2e9, 3.8e9).is_ok());
    }
}
