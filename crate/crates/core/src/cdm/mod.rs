//! Coupled-dipole model of one waveguide-fed metasurface row.
//!
//! Every element is an x-directed magnetic dipole `m_i = alpha_i H_loc,i`. The
//! local field is the incident TE10 field plus what every other element
//! launches through the guide and, optionally, through the half-space above
//! the ground plane. Collecting the unknown moments gives
//!
//! ```text
//! G m = H_inc,   G_ii = 1 / alpha_i,   G_ij = -(g_wg(i, j) + g_air(i, j))
//! ```
//!
//! The element's own radiation reaction is taken to be part of its effective
//! polarizability, so the diagonal carries `1/alpha` only.

mod ports;
mod radiation;

pub use ports::{power_accounting, s_parameter_sweep, s_parameters, PowerBudget, SParameters};
pub use radiation::{
    directivity, far_field, hemisphere_radiated_power, pattern_grid, radiated_power_from_coupling, DirectivityPattern,
    HemisphereGrid,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveguide::{self, WaveguideSpec};

/// Largest accepted condition estimate of the interaction matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative residual the solver must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct InteractionSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    pub alphas: Vec<Complex64>,
    /// Centreline `H_x` of the incident wave at `y = 0`, relative to a 1 W mode.
    pub incident_scale: Complex64,
    pub frequency_hz: f64,
    pub include_exterior: bool,
}

impl InteractionSystem {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Multiply the incident wave by `c`.
    pub fn scaled_incident(&self, c: Complex64) -> Self {
        let mut s = self.clone();
        s.rhs *= c;
        s.incident_scale *= c;
        s
    }

    /// Largest relative asymmetry `|G_ij - G_ji| / max|G|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.len();
        let scale = self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }
}

/// Build the coupled-dipole system for a row driven by a 1 W TE10 wave.
pub fn assemble(
    spec: &WaveguideSpec,
    alphas: &[Complex64],
    f_hz: f64,
    include_exterior: bool,
) -> Result<InteractionSystem> {
    let n = spec.n_elements();
    if alphas.len() != n {
        return Err(Error::Domain(format!("{} polarizabilities given for {} elements", alphas.len(), n)));
    }
    if let Some(index) = alphas.iter().position(|a| a.norm() == 0.0 || !a.is_finite()) {
        return Err(Error::SingularDiagonal { index });
    }
    let y = &spec.positions;
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        matrix[(i, i)] = alphas[i].inv();
        for j in 0..i {
            let mut g = waveguide::guided_greens(spec, f_hz, y[i], y[j])?;
            if include_exterior {
                g += waveguide::external_greens(f_hz, [0.0, y[i], 0.0], [0.0, y[j], 0.0])?;
            }
            matrix[(i, j)] = -g;
            matrix[(j, i)] = -g;
        }
    }
    let rhs = DVector::from_vec(waveguide::incident_field(spec, f_hz, true)?);
    Ok(InteractionSystem {
        matrix,
        rhs,
        alphas: alphas.to_vec(),
        incident_scale: Complex64::new(1.0, 0.0),
        frequency_hz: f_hz,
        include_exterior,
    })
}

/// Ratio of extreme singular values of the interaction matrix.
pub fn condition_estimate(matrix: &DMatrix<Complex64>) -> f64 {
    let sv = matrix.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Dipole moments solving `G m = H_inc`.
pub fn solve(system: &InteractionSystem) -> Result<Vec<Complex64>> {
    let estimate = condition_estimate(&system.matrix);
    if !(estimate < MAX_CONDITION) {
        return Err(Error::IllConditioned { estimate });
    }
    let lu = system.matrix.clone().lu();
    let mut m = lu.solve(&system.rhs).ok_or(Error::IllConditioned { estimate })?;
    let rhs_norm = system.rhs.norm();
    if rhs_norm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); system.len()]);
    }
    // one round of iterative refinement is enough for these sizes
    for _ in 0..2 {
        let r = &system.rhs - &system.matrix * &m;
        if r.norm() / rhs_norm < SOLVE_TOLERANCE * 1e-2 {
            break;
        }
        if let Some(dm) = lu.solve(&r) {
            m += dm;
        }
    }
    let residual = (&system.rhs - &system.matrix * &m).norm() / rhs_norm;
    if !(residual < SOLVE_TOLERANCE) {
        return Err(Error::IllConditioned { estimate });
    }
    Ok(m.iter().cloned().collect())
}

/// Everything computed for one row at one frequency.
#[derive(Debug, Clone)]
pub struct SolvedSurface {
    pub frequency_hz: f64,
    pub moments: Vec<Complex64>,
    /// `(theta_deg, complex amplitude)` on the yz plane.
    pub pattern: Vec<(f64, Complex64)>,
    pub directivity: DirectivityPattern,
    pub s: SParameters,
    pub power: PowerBudget,
}

impl SolvedSurface {
    pub fn peak(&self) -> (f64, f64) {
        self.directivity.peak()
    }
}

/// Assemble, solve and post-process one row.
pub fn solve_surface(
    spec: &WaveguideSpec,
    alphas: &[Complex64],
    f_hz: f64,
    include_exterior: bool,
) -> Result<SolvedSurface> {
    let system = assemble(spec, alphas, f_hz, include_exterior)?;
    let moments = solve(&system)?;
    let grid = pattern_grid();
    let amplitudes = far_field(&spec.positions, &moments, f_hz, &grid);
    let directivity = directivity(&spec.positions, &moments, f_hz)?;
    let s = s_parameters(&system, &moments, spec)?;
    let power = power_accounting(&system, &moments, spec)?;
    Ok(SolvedSurface {
        frequency_hz: f_hz,
        moments,
        pattern: grid.into_iter().zip(amplitudes).collect(),
        directivity,
        s,
        power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveguide::Substrate;
    use approx::assert_relative_eq;

    fn guide(n: usize, tan_delta: f64) -> WaveguideSpec {
        WaveguideSpec::uniform(0.03, 1.52e-3, Substrate { eps_r: 3.55, tan_delta }, n, 0.03, 3.5e9).unwrap()
    }

    fn alpha() -> Complex64 {
        Complex64::new(1.0e-8, -4.0e-8)
    }

    #[test]
    fn single_element_has_no_coupling() {
        let g = guide(1, 0.0027);
        let sys = assemble(&g, &[alpha()], 3.5e9, true).unwrap();
        let m = solve(&sys).unwrap();
        assert!((m[0] - alpha() * sys.rhs[0]).norm() < 1e-15 * m[0].norm().max(1.0));
    }

    #[test]
    fn zero_polarizability_is_rejected() {
        let g = guide(2, 0.0);
        let err = assemble(&g, &[alpha(), Complex64::new(0.0, 0.0)], 3.5e9, false).unwrap_err();
        assert!(matches!(err, Error::SingularDiagonal { index: 1 }));
        assert!(assemble(&g, &[alpha()], 3.5e9, false).is_err());
    }

    #[test]
    fn assembled_matrix_is_symmetric() {
        let g = guide(12, 0.0027);
        let alphas: Vec<_> = (0..12).map(|i| Complex64::from_polar(3e-8, -0.2 - 0.2 * i as f64)).collect();
        for ext in [false, true] {
            let sys = assemble(&g, &alphas, 3.5e9, ext).unwrap();
            assert!(sys.asymmetry() < 1e-12);
        }
    }

    #[test]
    fn guided_only_coupling_has_constant_magnitude() {
        let g = guide(6, 0.0);
        let sys = assemble(&g, &[alpha(); 6], 3.5e9, false).unwrap();
        let beta = waveguide::propagation_constant(&g, 3.5e9).unwrap().re;
        let k = beta / (g.width * g.height);
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_relative_eq!(sys.matrix[(i, j)].norm(), k, max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn two_by_two_matches_closed_form_inverse() {
        let g = guide(2, 0.0027);
        let a = [Complex64::new(2e-8, -3e-8), Complex64::new(-1e-8, -5e-8)];
        let sys = assemble(&g, &a, 3.5e9, true).unwrap();
        let m = solve(&sys).unwrap();
        let (p, q, r, s) = (sys.matrix[(0, 0)], sys.matrix[(0, 1)], sys.matrix[(1, 0)], sys.matrix[(1, 1)]);
        let det = p * s - q * r;
        let m0 = (s * sys.rhs[0] - q * sys.rhs[1]) / det;
        let m1 = (-r * sys.rhs[0] + p * sys.rhs[1]) / det;
        assert!((m[0] - m0).norm() <= 1e-12 * m0.norm());
        assert!((m[1] - m1).norm() <= 1e-12 * m1.norm());
    }

    #[test]
    fn solve_is_linear_in_incident_field() {
        let g = guide(8, 0.0027);
        let alphas: Vec<_> = (0..8).map(|i| Complex64::from_polar(4e-8, -0.3 - 0.3 * i as f64)).collect();
        let sys = assemble(&g, &alphas, 3.5e9, true).unwrap();
        let m = solve(&sys).unwrap();
        let c = Complex64::new(-1.5, 0.7);
        let m2 = solve(&sys.scaled_incident(c)).unwrap();
        for (a, b) in m.iter().zip(&m2) {
            assert!((a * c - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn near_singular_system_reports_condition() {
        let g = guide(2, 0.0);
        let mut sys = assemble(&g, &[alpha(); 2], 3.5e9, false).unwrap();
        let row = sys.matrix.row(0).clone_owned();
        sys.matrix.set_row(1, &row);
        match solve(&sys) {
            Err(Error::IllConditioned { estimate }) => assert!(estimate > 1e12),
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }
}
