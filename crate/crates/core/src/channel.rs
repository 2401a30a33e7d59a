//! Clustered (Saleh-Valenzuela) uplink channels seen through the base-station
//! patterns, plus the i.i.d. Rayleigh baseline.
//!
//! Entry `(m, n)` couples user `n` to metasurface `m`:
//!
//! ```text
//! H_mn = s / sqrt(Nc Nr) * sum_p sum_q h_pq g_u(theta_u_pq) g_bs_m(theta_bs_pq)
//! ```
//!
//! with cluster means drawn uniformly and ray angles Laplacian about them.
//! Each ray carries one unit-variance complex Gaussian gain `h_pq` that every
//! surface sees, scaled by its own pattern. With
//! [`ChannelParams::per_entry_gains`] the gain is instead redrawn for every
//! entry `(m, n)`, which makes an isotropic pattern reproduce i.i.d. Rayleigh
//! fading but discards the row correlation caused by overlapping beams. All rays live in the yz
//! plane. The user antenna is omnidirectional there (`g_u = 1`). A
//! base-station ray angle `t` in `[-60, 60]` deg reads the pattern at
//! `90 + t`; anything that lands outside `[0, 180]` is behind the ground plane
//! and gets zero gain.
//!
//! `s` is frozen once from a calibration ensemble so that
//! `E ||H||_F^2 = N_bs N_u`; individual realizations keep their fading.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdm::DirectivityPattern;
use crate::error::{Error, Result};

/// Broadside in pattern coordinates.
pub const BROADSIDE_DEG: f64 = 90.0;

/// Stream offset that keeps calibration draws apart from ensemble draws.
const CALIBRATION_STREAM_BASE: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub n_clusters: usize,
    pub n_rays: usize,
    pub sigma_bs_deg: f64,
    pub sigma_u_deg: f64,
    pub bs_mean_range_deg: [f64; 2],
    pub u_mean_range_deg: [f64; 2],
    pub n_bs: usize,
    pub n_users: usize,
    /// Linear SNR.
    pub rho: f64,
    pub seed: u64,
    /// Draw one cluster geometry per realization and share it across users
    /// (ray gains stay independent). Off by default: every user gets its own
    /// clusters.
    pub shared_clusters: bool,
    /// Redraw the ray gain for every base-station row. Off by default.
    pub per_entry_gains: bool,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.n_rays == 0 || self.n_bs == 0 || self.n_users == 0 {
            return Err(Error::Domain("cluster, ray, antenna and user counts must all be >= 1".into()));
        }
        if !(self.sigma_bs_deg > 0.0 && self.sigma_u_deg > 0.0) {
            return Err(Error::Domain("angular spreads must be positive".into()));
        }
        if !(self.rho > 0.0) {
            return Err(Error::Domain(format!("SNR must be positive, got {}", self.rho)));
        }
        for r in [self.bs_mean_range_deg, self.u_mean_range_deg] {
            if !(r[0] <= r[1]) {
                return Err(Error::Domain(format!("empty angle range {r:?}")));
            }
        }
        Ok(())
    }

    pub fn with_spread(&self, sigma_deg: f64) -> Self {
        Self { sigma_bs_deg: sigma_deg, sigma_u_deg: sigma_deg, ..self.clone() }
    }
}

/// One channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    /// `N_bs x N_u`.
    pub h: DMatrix<Complex64>,
    pub normalization_scale: f64,
}

impl ChannelMatrix {
    pub fn frobenius_sq(&self) -> f64 {
        self.h.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Base-station amplitude patterns on a uniform grid over `[0, 180]` deg.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable {
    step_deg: f64,
    n_surfaces: usize,
    /// Row-major `[grid point][surface]`.
    gains: Vec<f64>,
}

impl PatternTable {
    /// `gains[m][i]` is surface `m` at `i * step_deg`.
    pub fn new(step_deg: f64, gains: Vec<Vec<f64>>) -> Result<Self> {
        let n_surfaces = gains.len();
        if n_surfaces == 0 {
            return Err(Error::Domain("pattern table needs at least one surface".into()));
        }
        let n_grid = (180.0 / step_deg).round() as usize + 1;
        if gains.iter().any(|g| g.len() != n_grid) {
            return Err(Error::Domain(format!("every pattern needs {n_grid} samples at {step_deg} deg")));
        }
        let mut flat = vec![0.0; n_grid * n_surfaces];
        for (m, g) in gains.iter().enumerate() {
            for (i, &v) in g.iter().enumerate() {
                flat[i * n_surfaces + m] = v;
            }
        }
        Ok(Self { step_deg, n_surfaces, gains: flat })
    }

    /// Field-amplitude gains `sqrt(D)` from linear directivity patterns.
    pub fn from_directivity(patterns: &[DirectivityPattern]) -> Result<Self> {
        let step = patterns
            .first()
            .and_then(|p| p.theta_deg.get(1).map(|t| t - p.theta_deg[0]))
            .ok_or_else(|| Error::Domain("no patterns".into()))?;
        Self::new(step, patterns.iter().map(|p| p.linear.iter().map(|d| d.sqrt()).collect()).collect())
    }

    /// `g = 1` over the whole upper half-plane for `n` surfaces.
    pub fn isotropic(n: usize) -> Self {
        let step = 0.25;
        let n_grid = (180.0 / step) as usize + 1;
        Self::new(step, vec![vec![1.0; n_grid]; n]).expect("consistent grid")
    }

    pub fn n_surfaces(&self) -> usize {
        self.n_surfaces
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { gains: self.gains.iter().map(|g| g * c).collect(), ..self.clone() }
    }

    /// Linearly interpolated gains of every surface at `theta_deg`, written
    /// into `out`. Zero outside `[0, 180]`.
    pub fn gains_into(&self, theta_deg: f64, out: &mut [f64]) {
        let n_grid = self.gains.len() / self.n_surfaces;
        if !(0.0..=180.0).contains(&theta_deg) {
            out.iter_mut().for_each(|g| *g = 0.0);
            return;
        }
        let x = theta_deg / self.step_deg;
        let i = (x.floor() as usize).min(n_grid - 2);
        let t = x - i as f64;
        let (lo, hi) = (&self.gains[i * self.n_surfaces..], &self.gains[(i + 1) * self.n_surfaces..]);
        for m in 0..self.n_surfaces {
            out[m] = lo[m] * (1.0 - t) + hi[m] * t;
        }
    }

    pub fn gain(&self, surface: usize, theta_deg: f64) -> f64 {
        let mut g = vec![0.0; self.n_surfaces];
        self.gains_into(theta_deg, &mut g);
        g[surface]
    }
}

/// Reproducible generator for stream `stream` of the master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Laplace quantile for standard deviation `sigma` (scale `sigma / sqrt 2`).
pub fn laplacian_quantile(mean: f64, sigma: f64, u: f64) -> f64 {
    let b = sigma / std::f64::consts::SQRT_2;
    let d = u - 0.5;
    mean - b * d.signum() * (1.0 - 2.0 * d.abs()).ln()
}

/// One Laplacian draw by inverse CDF from a single uniform variate.
pub fn sample_laplacian<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    laplacian_quantile(mean, sigma, u)
}

/// Unit-variance circularly-symmetric complex Gaussian.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn uniform_in<R: Rng + ?Sized>(range: [f64; 2], rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    range[0] + (range[1] - range[0]) * u
}

struct Ray {
    bs_deg: f64,
    #[allow(dead_code)]
    user_deg: f64,
}

fn draw_geometry<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> Vec<Ray> {
    let mut rays = Vec::with_capacity(params.n_clusters * params.n_rays);
    for _ in 0..params.n_clusters {
        let bs_mean = uniform_in(params.bs_mean_range_deg, rng);
        let u_mean = uniform_in(params.u_mean_range_deg, rng);
        for _ in 0..params.n_rays {
            let bs_deg = sample_laplacian(bs_mean, params.sigma_bs_deg, rng);
            // no-op on the channel while g_u = 1, kept so the draw order matches
            // an angle-dependent user antenna
            let user_deg = sample_laplacian(u_mean, params.sigma_u_deg, rng);
            rays.push(Ray { bs_deg, user_deg });
        }
    }
    rays
}

/// Channel before normalization.
pub fn realize_raw<R: Rng + ?Sized>(
    params: &ChannelParams,
    patterns: &PatternTable,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let (n_bs, n_u) = (params.n_bs, params.n_users);
    assert_eq!(patterns.n_surfaces(), n_bs, "pattern table must cover every surface");
    let norm = 1.0 / ((params.n_clusters * params.n_rays) as f64).sqrt();
    let mut h = DMatrix::<Complex64>::zeros(n_bs, n_u);
    let mut g = vec![0.0; n_bs];
    let shared = params.shared_clusters.then(|| draw_geometry(params, rng));
    for n in 0..n_u {
        let own;
        let rays = match &shared {
            Some(r) => r,
            None => {
                own = draw_geometry(params, rng);
                &own
            }
        };
        for ray in rays {
            patterns.gains_into(BROADSIDE_DEG + ray.bs_deg, &mut g);
            if params.per_entry_gains {
                for m in 0..n_bs {
                    h[(m, n)] += complex_gaussian(rng) * g[m];
                }
            } else {
                let gain = complex_gaussian(rng);
                for m in 0..n_bs {
                    h[(m, n)] += gain * g[m];
                }
            }
        }
    }
    h * Complex64::new(norm, 0.0)
}

/// Estimate `s = sqrt(N_bs N_u / mean ||H_raw||_F^2)` from `ensemble`
/// realizations on dedicated streams of `params.seed`.
pub fn calibrate_normalization(params: &ChannelParams, patterns: &PatternTable, ensemble: usize) -> Result<f64> {
    params.validate()?;
    if ensemble < 1000 {
        return Err(Error::Calibration(format!("calibration ensemble must be >= 1000, got {ensemble}")));
    }
    if patterns.n_surfaces() != params.n_bs {
        return Err(Error::Calibration(format!(
            "{} patterns for {} base-station antennas",
            patterns.n_surfaces(),
            params.n_bs
        )));
    }
    let energies: Vec<f64> = (0..ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(params.seed, CALIBRATION_STREAM_BASE + i);
            realize_raw(params, patterns, &mut rng).iter().map(|z| z.norm_sqr()).sum()
        })
        .collect();
    let mean = crate::metrics::pairwise_sum(&energies) / ensemble as f64;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Calibration(format!("mean raw channel energy is {mean}; patterns are degenerate")));
    }
    Ok(((params.n_bs * params.n_users) as f64 / mean).sqrt())
}

/// A calibrated channel generator.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub params: ChannelParams,
    pub patterns: PatternTable,
    pub scale: f64,
}

impl ChannelModel {
    pub fn calibrated(params: ChannelParams, patterns: PatternTable, ensemble: usize) -> Result<Self> {
        let scale = calibrate_normalization(&params, &patterns, ensemble)?;
        Ok(Self { params, patterns, scale })
    }

    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelMatrix {
        realize_channel(&self.params, &self.patterns, self.scale, rng)
    }
}

pub fn realize_channel<R: Rng + ?Sized>(
    params: &ChannelParams,
    patterns: &PatternTable,
    scale: f64,
    rng: &mut R,
) -> ChannelMatrix {
    let h = realize_raw(params, patterns, rng) * Complex64::new(scale, 0.0);
    ChannelMatrix { h, normalization_scale: scale }
}

/// i.i.d. unit-variance complex Gaussian `N_bs x N_u` channel.
pub fn rayleigh_channel<R: Rng + ?Sized>(n_bs: usize, n_u: usize, rng: &mut R) -> ChannelMatrix {
    // column-major fill, one column per user
    let h = DMatrix::from_fn(n_bs, n_u, |_, _| complex_gaussian(rng));
    ChannelMatrix { h, normalization_scale: 1.0 }
}
