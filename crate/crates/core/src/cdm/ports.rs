//! Port scattering parameters and the power budget of a solved row.
//!
//! Port 1 sits at `y = 0` and port 2 at `y = L`; the termination is matched.
//! Each dipole launches `K m_i` toward both ports, so forward scattering adds
//! to the through wave with position-independent phase while backscatter
//! picks up the round trip `e^{-2j beta y_i}` (the moments already carry one
//! factor `e^{-j beta y_i}` from the feed).

use num_complex::Complex64;
use serde::Serialize;

use super::radiation::{hemisphere_radiated_power, HemisphereGrid, HEMISPHERE_STEP_DEG};
use super::{assemble, solve, InteractionSystem};
use crate::consts::{angular, EPS0, MU0};
use crate::design::LorentzianParams;
use crate::error::Result;
use crate::waveguide::{self, WaveguideSpec};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Remainders below this fraction of the input power are flagged.
pub const NEGATIVE_REMAINDER_WARNING: f64 = -0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SParameters {
    pub s11: Complex64,
    pub s21: Complex64,
}

impl SParameters {
    pub fn s11_db(&self) -> f64 {
        20.0 * self.s11.norm().log10()
    }

    pub fn s21_db(&self) -> f64 {
        20.0 * self.s21.norm().log10()
    }
}

/// Wave-amplitude S-parameters (electric-field convention) for the solved
/// moments.
pub fn s_parameters(system: &InteractionSystem, moments: &[Complex64], spec: &WaveguideSpec) -> Result<SParameters> {
    let f = system.frequency_hz;
    let beta = waveguide::propagation_constant(spec, f)?;
    let k = waveguide::modal_coupling(spec, f)?;
    let h10 = waveguide::unit_power_amplitude(spec, f)? * system.incident_scale;
    let l = spec.length;
    let mut fwd = Complex64::new(0.0, 0.0);
    let mut bwd = Complex64::new(0.0, 0.0);
    for (&y, &m) in spec.positions.iter().zip(moments) {
        fwd += m * (-J * beta * (l - y)).exp();
        bwd += m * (-J * beta * y).exp();
    }
    let s21 = (-J * beta * l).exp() + k * fwd / h10;
    // a backward wave's E_z is -Z_TE H_x
    let s11 = -k * bwd / h10;
    Ok(SParameters { s11, s21 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBudget {
    pub p_in: f64,
    pub p_refl: f64,
    pub p_trans: f64,
    pub p_rad: f64,
    /// `p_element_loss + p_dielectric_loss`.
    pub p_loss: f64,
    /// Power dissipated inside the elements: the work the local field does on
    /// each dipole minus what the dipole re-radiates into the guide and the
    /// half-space.
    pub p_element_loss: f64,
    /// Substrate dissipation integrated along the guide.
    pub p_dielectric_loss: f64,
    /// `p_in` minus every accounted channel.
    pub remainder: f64,
    /// Set when the remainder is below -2 % of the input power.
    pub nonphysical: bool,
}

impl PowerBudget {
    /// `(p_refl + p_trans + p_rad + p_loss) / p_in`.
    pub fn accounted_fraction(&self) -> f64 {
        (self.p_refl + self.p_trans + self.p_rad + self.p_loss) / self.p_in
    }
}

/// Centreline `E_z / Z_TE` at `y`. `behind` elements contribute forward
/// waves, the rest backward waves.
fn guided_e_over_z(
    y: f64,
    behind: usize,
    beta: Complex64,
    k: Complex64,
    h10: Complex64,
    positions: &[f64],
    moments: &[Complex64],
) -> Complex64 {
    let mut e = h10 * (-J * beta * y).exp();
    for (i, (&yi, &m)) in positions.iter().zip(moments).enumerate() {
        let w = k * m * (-J * beta * (y - yi).abs()).exp();
        if i < behind {
            e += w;
        } else {
            e -= w;
        }
    }
    e
}

fn dielectric_loss(spec: &WaveguideSpec, f: f64, h10: Complex64, moments: &[Complex64]) -> Result<f64> {
    let tan_d = spec.substrate.tan_delta;
    if tan_d == 0.0 {
        return Ok(0.0);
    }
    let beta = waveguide::propagation_constant(spec, f)?;
    let k = waveguide::modal_coupling(spec, f)?;
    let z = waveguide::wave_impedance(spec, f)?;
    // (w eps'' / 2) * (a b / 2) |E_z|^2 per unit length
    let density = angular(f) * EPS0 * spec.substrate.eps_r * tan_d / 2.0 * (spec.width * spec.height / 2.0) * z * z;
    let mut bounds = Vec::with_capacity(spec.n_elements() + 2);
    bounds.push(0.0);
    bounds.extend(spec.positions.iter().cloned());
    bounds.push(spec.length);
    const SUB: usize = 32;
    let mut total = 0.0;
    for (seg, w) in bounds.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / SUB as f64;
        let mut acc = 0.0;
        for s in 0..=SUB {
            let y = a + h * s as f64;
            let e = guided_e_over_z(y, seg, beta, k, h10, &spec.positions, moments).norm_sqr();
            let c = if s == 0 || s == SUB {
                1.0
            } else if s % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += c * e;
        }
        total += acc * h / 3.0;
    }
    Ok(density * total)
}

/// Split the 1 W (times `|incident_scale|^2`) input into reflected,
/// transmitted, radiated and dissipated power.
pub fn power_accounting(
    system: &InteractionSystem,
    moments: &[Complex64],
    spec: &WaveguideSpec,
) -> Result<PowerBudget> {
    let f = system.frequency_hz;
    let s = s_parameters(system, moments, spec)?;
    let p_in = system.incident_scale.norm_sqr();
    let p_refl = s.s11.norm_sqr() * p_in;
    let p_trans = s.s21.norm_sqr() * p_in;
    let p_rad = if moments.iter().all(|m| m.norm() == 0.0) {
        0.0
    } else {
        hemisphere_radiated_power(&spec.positions, moments, f, &HemisphereGrid::new(HEMISPHERE_STEP_DEG))
    };

    let beta = waveguide::propagation_constant(spec, f)?;
    let self_damping = beta.re / (spec.width * spec.height) + waveguide::external_self_damping(f);
    let half_wmu = 0.5 * angular(f) * MU0;
    let p_element_loss: f64 =
        moments.iter().zip(&system.alphas).map(|(m, a)| half_wmu * m.norm_sqr() * (a.inv().im - self_damping)).sum();

    let h10 = waveguide::unit_power_amplitude(spec, f)? * system.incident_scale;
    let p_dielectric_loss = dielectric_loss(spec, f, h10, moments)?;

    let p_loss = p_element_loss + p_dielectric_loss;
    let remainder = p_in - (p_refl + p_trans + p_rad + p_loss);
    let nonphysical = remainder < NEGATIVE_REMAINDER_WARNING * p_in;
    if nonphysical {
        log::warn!("power budget remainder {remainder:.4} W of {p_in:.4} W indicates non-physical gain");
    }
    Ok(PowerBudget { p_in, p_refl, p_trans, p_rad, p_loss, p_element_loss, p_dielectric_loss, remainder, nonphysical })
}

/// S-parameters of a row whose elements keep their tuned resonances while the
/// drive frequency sweeps.
pub fn s_parameter_sweep(
    spec: &WaveguideSpec,
    element: &LorentzianParams,
    tuned_f0: &[f64],
    frequencies: &[f64],
    include_exterior: bool,
) -> Result<Vec<(f64, SParameters)>> {
    frequencies
        .iter()
        .map(|&f| {
            let alphas = tuned_f0.iter().map(|&f0| element.with_resonance(f0)?.alpha(f)).collect::<Result<Vec<_>>>()?;
            let sys = assemble(spec, &alphas, f, include_exterior)?;
            let m = solve(&sys)?;
            Ok((f, s_parameters(&sys, &m, spec)?))
        })
        .collect()
}
