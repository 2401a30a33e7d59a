//! Sum capacity, condition numbers and ensemble statistics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{rayleigh_channel, stream_rng, ChannelModel};
use crate::error::{Error, Result};

/// Abscissae in exported CDF tables.
pub const CDF_GRID_POINTS: usize = 512;

/// Which quantity is reported as the condition number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaConvention {
    /// `sigma_max / sigma_min` of `H`.
    #[default]
    Singular,
    /// `lambda_max / lambda_min` of `H^H H`, the square of the above.
    Gram,
}

fn singular_values(h: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if h.iter().any(|z| !z.is_finite()) {
        return Err(Error::Domain("channel matrix has non-finite entries".into()));
    }
    let mut sv: Vec<f64> = h.clone().singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// `sum_u log2(1 + rho / N_u * lambda_u)` over the eigenvalues of `H^H H`.
pub fn sum_capacity(h: &DMatrix<Complex64>, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("SNR must be positive, got {rho}")));
    }
    let n_u = h.ncols() as f64;
    // zero eigenvalues of a wide H contribute nothing
    Ok(singular_values(h)?.iter().map(|s| (1.0 + rho / n_u * s * s).log2()).sum())
}

/// Condition number over the `min(N_bs, N_u)` singular values. Rank
/// deficiency at machine precision yields `+inf`.
pub fn condition_number(h: &DMatrix<Complex64>, convention: KappaConvention) -> Result<f64> {
    let sv = singular_values(h)?;
    let (max, min) = (sv[0], *sv.last().unwrap());
    if !(max > 0.0) {
        return Err(Error::Domain("condition number of a zero matrix".into()));
    }
    let tol = f64::EPSILON * max * h.nrows().max(h.ncols()) as f64;
    if min <= tol {
        return Ok(f64::INFINITY);
    }
    let k = max / min;
    Ok(match convention {
        KappaConvention::Singular => k,
        KappaConvention::Gram => k * k,
    })
}

/// Order-fixed pairwise summation.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

/// Right-continuous step CDF.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("empirical CDF of an empty sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }

    pub fn median(&self) -> f64 {
        let n = self.sorted.len();
        if n % 2 == 1 {
            self.sorted[n / 2]
        } else {
            0.5 * (self.sorted[n / 2 - 1] + self.sorted[n / 2])
        }
    }

    /// `(x, F(x))` at `points` uniformly spaced abscissae over `[min, max]`.
    pub fn table(&self, points: usize) -> Vec<[f64; 2]> {
        let (lo, hi) = (self.min(), self.max());
        if points < 2 || hi == lo {
            return vec![[lo, 1.0]];
        }
        (0..points)
            .map(|i| {
                let x = if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
                [x, self.eval(x)]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// Standard error of the mean.
    pub std_err: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub cdf: Vec<[f64; 2]>,
}

impl Summary {
    /// Statistics of the finite entries of `samples`. If none is finite the
    /// count is zero, the statistics are NaN and the CDF table is empty.
    pub fn of(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("statistics of an empty sample".into()));
        }
        let finite: Vec<f64> = samples.iter().cloned().filter(|x| x.is_finite()).collect();
        if finite.is_empty() {
            let nan = f64::NAN;
            return Ok(Self {
                count: 0,
                mean: nan,
                std_dev: nan,
                std_err: nan,
                median: nan,
                min: nan,
                max: nan,
                cdf: Vec::new(),
            });
        }
        let cdf = EmpiricalCdf::new(&finite)?;
        let n = finite.len() as f64;
        let mean = pairwise_sum(&finite) / n;
        let dev: Vec<f64> = finite.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if finite.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
        Ok(Self {
            count: finite.len(),
            mean,
            std_dev: var.sqrt(),
            std_err: (var / n).sqrt(),
            median: cdf.median(),
            min: cdf.min(),
            max: cdf.max(),
            cdf: cdf.table(CDF_GRID_POINTS),
        })
    }
}

/// Paired metasurface / Rayleigh samples, indexed by realization.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub capacity_ms: Vec<f64>,
    pub capacity_rayleigh: Vec<f64>,
    pub kappa_ms: Vec<f64>,
    pub kappa_rayleigh: Vec<f64>,
    pub kappa_ratio: Vec<f64>,
    pub convention: KappaConvention,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub realizations: usize,
    pub kappa_convention: KappaConvention,
    /// Realizations whose metasurface or Rayleigh channel was rank-deficient;
    /// their infinite condition numbers are left out of the kappa statistics.
    pub rank_deficient: usize,
    pub capacity_ms: Summary,
    pub capacity_rayleigh: Summary,
    pub kappa_ms: Summary,
    pub kappa_rayleigh: Summary,
    pub kappa_ratio: Summary,
}

impl EnsembleStats {
    pub fn len(&self) -> usize {
        self.capacity_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacity_ms.is_empty()
    }

    pub fn summary(&self) -> Result<EnsembleSummary> {
        let rank_deficient =
            self.kappa_ms.iter().zip(&self.kappa_rayleigh).filter(|(a, b)| !a.is_finite() || !b.is_finite()).count();
        Ok(EnsembleSummary {
            realizations: self.len(),
            kappa_convention: self.convention,
            rank_deficient,
            capacity_ms: Summary::of(&self.capacity_ms)?,
            capacity_rayleigh: Summary::of(&self.capacity_rayleigh)?,
            kappa_ms: Summary::of(&self.kappa_ms)?,
            kappa_rayleigh: Summary::of(&self.kappa_rayleigh)?,
            kappa_ratio: Summary::of(&self.kappa_ratio)?,
        })
    }

    /// The same samples reported under another condition-number convention.
    pub fn with_convention(&self, convention: KappaConvention) -> Self {
        let map = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|&k| match (self.convention, convention) {
                    (a, b) if a == b => k,
                    (KappaConvention::Singular, KappaConvention::Gram) => k * k,
                    _ => k.sqrt(),
                })
                .collect()
        };
        let kappa_ms = map(&self.kappa_ms);
        let kappa_rayleigh = map(&self.kappa_rayleigh);
        let kappa_ratio = kappa_ms.iter().zip(&kappa_rayleigh).map(|(a, b)| a / b).collect();
        Self { kappa_ms, kappa_rayleigh, kappa_ratio, convention, ..self.clone() }
    }
}

/// Stream indices for realization `r`: the metasurface channel and its paired
/// Rayleigh draw never share a stream.
pub fn realization_streams(r: u64) -> (u64, u64) {
    (2 * r, 2 * r + 1)
}

/// Run `n` paired realizations. Results depend only on the model's seed,
/// not on how rayon schedules the work.
pub fn ensemble_run(model: &ChannelModel, n: usize, convention: KappaConvention) -> Result<EnsembleStats> {
    if n == 0 {
        return Err(Error::Domain("ensemble needs at least one realization".into()));
    }
    let p = &model.params;
    let rows: Vec<[f64; 4]> = (0..n as u64)
        .into_par_iter()
        .map(|r| {
            let (s_ms, s_ray) = realization_streams(r);
            let h_ms = model.realize(&mut stream_rng(p.seed, s_ms)).h;
            let h_ray = rayleigh_channel(p.n_bs, p.n_users, &mut stream_rng(p.seed, s_ray)).h;
            Ok([
                sum_capacity(&h_ms, p.rho)?,
                sum_capacity(&h_ray, p.rho)?,
                condition_number(&h_ms, convention)?,
                condition_number(&h_ray, convention)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats {
        capacity_ms: rows.iter().map(|r| r[0]).collect(),
        capacity_rayleigh: rows.iter().map(|r| r[1]).collect(),
        kappa_ms: rows.iter().map(|r| r[2]).collect(),
        kappa_rayleigh: rows.iter().map(|r| r[3]).collect(),
        kappa_ratio: rows.iter().map(|r| r[2] / r[3]).collect(),
        convention,
    })
}
