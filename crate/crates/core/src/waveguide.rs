//! Dielectric-filled rectangular waveguide feeding one row of elements.
//!
//! Axes: the guide runs along +y, the broad wall (width `a`) spans x and the
//! substrate thickness `b` spans z. Elements sit on the top-wall centreline
//! `x = a/2`, where the TE10 transverse magnetic field is purely `H_x`.
//!
//! Time dependence is `e^{+j w t}`; the incident mode travels as `e^{-j beta y}`
//! and decays when the substrate is lossy (`Im beta < 0`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consts::{angular, wavenumber, C0, MU0};
use crate::error::{domain, Error, Result};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Substrate {
    pub eps_r: f64,
    pub tan_delta: f64,
}

impl Substrate {
    /// 1.52 mm Rogers 4003C.
    pub const RO4003C: Substrate = Substrate { eps_r: 3.55, tan_delta: 0.0027 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    /// Broad-wall width `a` (m).
    pub width: f64,
    /// Height `b` (m), the substrate thickness.
    pub height: f64,
    pub substrate: Substrate,
    /// Element positions along the guide (m), strictly increasing.
    pub positions: Vec<f64>,
    /// Port 1 is at `y = 0`, port 2 at `y = length`.
    pub length: f64,
}

impl WaveguideSpec {
    /// Build and validate a guide that must carry only TE10 at `operating_hz`.
    pub fn new(
        width: f64,
        height: f64,
        substrate: Substrate,
        positions: Vec<f64>,
        length: f64,
        operating_hz: f64,
    ) -> Result<Self> {
        let spec = Self { width, height, substrate, positions, length };
        spec.validate()?;
        spec.ensure_single_mode(operating_hz)?;
        Ok(spec)
    }

    /// `n` elements at `y_i = i * pitch`, terminated one pitch past the last element.
    pub fn uniform(
        width: f64,
        height: f64,
        substrate: Substrate,
        n: usize,
        pitch: f64,
        operating_hz: f64,
    ) -> Result<Self> {
        let positions: Vec<f64> = (0..n).map(|i| i as f64 * pitch).collect();
        let length = n as f64 * pitch;
        Self::new(width, height, substrate, positions, length, operating_hz)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > self.height && self.height > 0.0) {
            return domain(format!("need a > b > 0, got a = {}, b = {}", self.width, self.height));
        }
        if !(self.substrate.eps_r >= 1.0) {
            return domain(format!("relative permittivity must be >= 1, got {}", self.substrate.eps_r));
        }
        if !(self.substrate.tan_delta >= 0.0) {
            return domain(format!("loss tangent must be >= 0, got {}", self.substrate.tan_delta));
        }
        if !self.positions.windows(2).all(|w| w[1] > w[0]) {
            return domain("element positions must be strictly increasing");
        }
        if let (Some(&first), Some(&last)) = (self.positions.first(), self.positions.last()) {
            if first < 0.0 || last > self.length {
                return domain(format!("element positions [{first}, {last}] m must lie within [0, {}] m", self.length));
            }
        }
        Ok(())
    }

    pub fn ensure_single_mode(&self, f_hz: f64) -> Result<()> {
        let fc = cutoff_frequency(self);
        if f_hz <= fc {
            return Err(Error::Evanescent { frequency_hz: f_hz, cutoff_hz: fc });
        }
        let fc20 = te20_cutoff_frequency(self);
        if f_hz >= fc20 {
            return Err(Error::Multimode { frequency_hz: f_hz, te20_cutoff_hz: fc20 });
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.positions.len()
    }

    /// Same cross-section with a different element layout.
    pub fn with_positions(&self, positions: Vec<f64>, length: f64) -> Result<Self> {
        let spec = Self { positions, length, ..self.clone() };
        spec.validate()?;
        Ok(spec)
    }
}

/// TE10 cutoff `c / (2 a sqrt(eps_r))`.
pub fn cutoff_frequency(spec: &WaveguideSpec) -> f64 {
    C0 / (2.0 * spec.width * spec.substrate.eps_r.sqrt())
}

pub fn te20_cutoff_frequency(spec: &WaveguideSpec) -> f64 {
    2.0 * cutoff_frequency(spec)
}

/// Complex TE10 propagation constant (rad/m) with `Re > 0`, `Im <= 0`.
pub fn propagation_constant(spec: &WaveguideSpec, f_hz: f64) -> Result<Complex64> {
    let fc = cutoff_frequency(spec);
    if !(f_hz > fc) {
        return Err(Error::Evanescent { frequency_hz: f_hz, cutoff_hz: fc });
    }
    let k0 = wavenumber(f_hz);
    let kc = PI / spec.width;
    let k2 = k0 * k0 * spec.substrate.eps_r * Complex64::new(1.0, -spec.substrate.tan_delta);
    // principal root of a lower-half-plane argument already has Re > 0, Im <= 0
    Ok((k2 - kc * kc).sqrt())
}

/// TE10 wave impedance `w mu0 / Re(beta)`.
pub fn wave_impedance(spec: &WaveguideSpec, f_hz: f64) -> Result<f64> {
    let beta = propagation_constant(spec, f_hz)?;
    Ok(angular(f_hz) * MU0 / beta.re)
}

/// Centreline `H_x` amplitude of a TE10 wave carrying 1 W: `2 / sqrt(Z_TE a b)`.
pub fn unit_power_amplitude(spec: &WaveguideSpec, f_hz: f64) -> Result<f64> {
    let z = wave_impedance(spec, f_hz)?;
    Ok(2.0 / (z * spec.width * spec.height).sqrt())
}

/// Incident `H_x` at every element. With `unit_power` the mode carries 1 W;
/// otherwise its centreline amplitude is 1 A/m.
pub fn incident_field(spec: &WaveguideSpec, f_hz: f64, unit_power: bool) -> Result<Vec<Complex64>> {
    let beta = propagation_constant(spec, f_hz)?;
    let h10 = if unit_power { unit_power_amplitude(spec, f_hz)? } else { 1.0 };
    Ok(spec.positions.iter().map(|&y| h10 * (-J * beta * y).exp()).collect())
}

/// Modal coupling constant `K` of the dominant mode: a centreline magnetic
/// dipole `m` launches `H_x = K m` in both directions.
///
/// Projecting the dipole's magnetic current onto the unit-power TE10 mode
/// gives `K = -j beta / (a b)`. The sign is the one for which a lone dipole
/// does net work on the guide (it radiates into both ports), which is what
/// makes the S-parameter and dipole-work power budgets agree.
pub fn modal_coupling(spec: &WaveguideSpec, f_hz: f64) -> Result<Complex64> {
    let beta = propagation_constant(spec, f_hz)?;
    Ok(-J * beta.re / (spec.width * spec.height))
}

/// Dominant-mode Green's function `K e^{-j beta |y_i - y_j|}` between two
/// centreline dipoles. Higher-order modes are omitted.
pub fn guided_greens(spec: &WaveguideSpec, f_hz: f64, y_i: f64, y_j: f64) -> Result<Complex64> {
    let beta = propagation_constant(spec, f_hz)?;
    let k = modal_coupling(spec, f_hz)?;
    Ok(k * (-J * beta * (y_i - y_j).abs()).exp())
}

/// `H_x` at `r_i` from an x-directed magnetic dipole at `r_j`, both on an
/// infinite ground plane (`z = 0`, field in `z > 0`). The image doubles the
/// free-space dyadic:
///
/// `G = 2 k^3/(4 pi) e^{-jkr} [A + (x.r)^2 B]`,
/// `A = 1/(kr) - j/(kr)^2 - 1/(kr)^3`, `B = -1/(kr) + 3j/(kr)^2 + 3/(kr)^3`.
///
/// For separation along y only `A` survives.
pub fn external_greens(f_hz: f64, r_i: [f64; 3], r_j: [f64; 3]) -> Result<Complex64> {
    let d = [r_i[0] - r_j[0], r_i[1] - r_j[1], r_i[2] - r_j[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if !(r > 0.0) {
        return domain("exterior Green's function is singular for coincident points");
    }
    let k = wavenumber(f_hz);
    let x = k * r;
    let (inv1, inv2, inv3) = (1.0 / x, 1.0 / (x * x), 1.0 / (x * x * x));
    let transverse = Complex64::new(inv1 - inv3, -inv2);
    let longitudinal = Complex64::new(-inv1 + 3.0 * inv3, 3.0 * inv2);
    let cx = d[0] / r;
    let bracket = transverse + longitudinal * (cx * cx);
    Ok(2.0 * k.powi(3) / (4.0 * PI) * (-J * x).exp() * bracket)
}

/// Radiation-reaction term of a ground-backed dipole: the limit of
/// `Im external_greens` at zero separation, `-k^3 / (3 pi)`.
pub fn external_self_damping(f_hz: f64) -> f64 {
    wavenumber(f_hz).powi(3) / (3.0 * PI)
}
