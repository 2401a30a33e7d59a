//! End-to-end runs: design, coupled-dipole solve, channel ensembles, sweeps.
//!
//! The `cmd_*` functions write their results into an output directory and
//! return the paths they produced.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cdm::{s_parameter_sweep, solve_surface, SolvedSurface};
use crate::channel::{stream_rng, ChannelModel, PatternTable};
use crate::config::{AntennaConfig, ExperimentConfig};
use crate::design::{euclidean_map, required_polarizabilities, LorentzianParams, MappedElement};
use crate::error::{Error, Result};
use crate::metrics::{ensemble_run, realization_streams, EnsembleStats, EnsembleSummary};
use crate::output::{fmt_f64, write_json, CsvTable, Provenance};
use crate::waveguide::{propagation_constant, WaveguideSpec};

/// One metasurface after Euclidean mapping.
#[derive(Debug, Clone)]
pub struct DesignedSurface {
    pub surface_index: usize,
    pub target_deg: f64,
    pub guide: WaveguideSpec,
    pub element: LorentzianParams,
    pub elements: Vec<MappedElement>,
}

impl DesignedSurface {
    pub fn alphas(&self) -> Vec<Complex64> {
        self.elements.iter().map(|e| e.achieved_alpha).collect()
    }

    pub fn tuned_f0(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.tuned_f0).collect()
    }
}

pub fn design_surface(
    cfg: &AntennaConfig,
    n_elements: usize,
    surface_index: usize,
    target_deg: f64,
) -> Result<DesignedSurface> {
    let guide = cfg.waveguide(n_elements)?;
    let element = cfg.element.params()?;
    let f = cfg.operating_hz;
    let beta = propagation_constant(&guide, f)?.re;
    let required = required_polarizabilities(&guide.positions, beta, crate::consts::wavenumber(f), target_deg)?;
    let elements = euclidean_map(&required, &element, f, cfg.tuning_grid)?;
    Ok(DesignedSurface { surface_index, target_deg, guide, element, elements })
}

/// Every surface of the antenna, with `n_elements` elements each.
pub fn design_antenna(cfg: &AntennaConfig, n_elements: usize) -> Result<Vec<DesignedSurface>> {
    cfg.beam_angles().into_iter().enumerate().map(|(i, t)| design_surface(cfg, n_elements, i, t)).collect()
}

/// Coupled-dipole solve of every surface at the operating frequency.
/// Failures stay attached to their surface.
pub fn solve_antenna(
    cfg: &AntennaConfig,
    surfaces: &[DesignedSurface],
    include_exterior: bool,
) -> Vec<Result<SolvedSurface>> {
    surfaces.par_iter().map(|s| solve_surface(&s.guide, &s.alphas(), cfg.operating_hz, include_exterior)).collect()
}

/// Base-station amplitude patterns of the designed antenna.
pub fn antenna_patterns(cfg: &AntennaConfig, n_elements: usize, include_exterior: bool) -> Result<PatternTable> {
    let surfaces = design_antenna(cfg, n_elements)?;
    let solved = solve_antenna(cfg, &surfaces, include_exterior)
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Domain(format!("surface {i}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let patterns: Vec<_> = solved.into_iter().map(|s| s.directivity).collect();
    PatternTable::from_directivity(&patterns)
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceSummary {
    pub surface_index: usize,
    pub target_deg: f64,
    pub peak_deg: Option<f64>,
    pub peak_dbi: Option<f64>,
    pub pointing_error_deg: Option<f64>,
    pub s11_db: Option<f64>,
    pub s21_db: Option<f64>,
    pub radiated_fraction: Option<f64>,
    pub loss_fraction: Option<f64>,
    /// `1 - (|S11|^2 + |S21|^2 + P_rad + P_loss) / P_in`.
    pub power_remainder: Option<f64>,
    pub error: Option<String>,
}

impl SurfaceSummary {
    fn new(d: &DesignedSurface, solved: &Result<SolvedSurface>) -> Self {
        let mut s = Self {
            surface_index: d.surface_index,
            target_deg: d.target_deg,
            peak_deg: None,
            peak_dbi: None,
            pointing_error_deg: None,
            s11_db: None,
            s21_db: None,
            radiated_fraction: None,
            loss_fraction: None,
            power_remainder: None,
            error: None,
        };
        match solved {
            Ok(r) => {
                let (t, dbi) = r.peak();
                s.peak_deg = Some(t);
                s.peak_dbi = Some(dbi);
                s.pointing_error_deg = Some((t - d.target_deg).abs());
                s.s11_db = Some(r.s.s11_db());
                s.s21_db = Some(r.s.s21_db());
                s.radiated_fraction = Some(r.power.p_rad / r.power.p_in);
                s.loss_fraction = Some(r.power.p_loss / r.power.p_in);
                s.power_remainder = Some(r.power.remainder);
            }
            Err(e) => s.error = Some(e.to_string()),
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
struct Document<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: T,
}

fn provenance(cfg: &ExperimentConfig) -> Provenance {
    Provenance::new(cfg, cfg.run.seed)
}

pub fn cmd_design(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let surfaces = design_antenna(&cfg.antenna, cfg.antenna.n_elements)?;
    let mut t = CsvTable::new(
        &provenance(cfg),
        &["surface_index", "element_index", "y", "tuned_f0", "alpha_re", "alpha_im", "residual"],
    );
    for s in &surfaces {
        for e in &s.elements {
            t.push_row([
                s.surface_index.to_string(),
                e.element_index.to_string(),
                fmt_f64(s.guide.positions[e.element_index]),
                fmt_f64(e.tuned_f0),
                fmt_f64(e.achieved_alpha.re),
                fmt_f64(e.achieved_alpha.im),
                fmt_f64(e.mapping_residual),
            ]);
        }
    }
    let path = out.join("design.csv");
    t.write(&path)?;
    Ok(vec![path])
}

pub fn cmd_antenna_report(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let a = &cfg.antenna;
    let prov = provenance(cfg);
    let surfaces = design_antenna(a, a.n_elements)?;
    let solved = solve_antenna(a, &surfaces, cfg.run.include_exterior);
    let freqs = a.sweep_frequencies();
    let sweeps: Vec<Result<_>> = surfaces
        .par_iter()
        .map(|s| s_parameter_sweep(&s.guide, &s.element, &s.tuned_f0(), &freqs, cfg.run.include_exterior))
        .collect();

    let mut patterns = CsvTable::new(&prov, &["surface_index", "theta_deg", "directivity_dBi"]);
    let mut sparams = CsvTable::new(&prov, &["surface_index", "f_Hz", "S11_dB", "S21_dB"]);
    let mut summary = Vec::with_capacity(surfaces.len());
    for ((d, r), sw) in surfaces.iter().zip(&solved).zip(&sweeps) {
        summary.push(SurfaceSummary::new(d, r));
        match r {
            Ok(r) => {
                for (t, dbi) in r.directivity.theta_deg.iter().zip(r.directivity.dbi()) {
                    patterns.push_row([d.surface_index.to_string(), fmt_f64(*t), fmt_f64(dbi)]);
                }
                if r.power.nonphysical {
                    log::warn!(
                        "surface {}: power remainder {:.4} is below the warning threshold",
                        d.surface_index,
                        r.power.remainder
                    );
                }
            }
            Err(e) => log::error!("surface {}: {e}", d.surface_index),
        }
        match sw {
            Ok(sw) => {
                for (f, s) in sw {
                    sparams.push_row([
                        d.surface_index.to_string(),
                        fmt_f64(*f),
                        fmt_f64(s.s11_db()),
                        fmt_f64(s.s21_db()),
                    ]);
                }
            }
            Err(e) => log::error!("surface {} S-parameter sweep: {e}", d.surface_index),
        }
    }
    let paths = [out.join("patterns.csv"), out.join("sparams.csv"), out.join("antenna_summary.json")];
    patterns.write(&paths[0])?;
    sparams.write(&paths[1])?;
    #[derive(Serialize)]
    struct Body {
        surfaces: Vec<SurfaceSummary>,
    }
    write_json(&paths[2], &Document { provenance: &prov, body: Body { surfaces: summary } })?;
    Ok(paths.to_vec())
}

/// Calibrated channel model for the configured antenna with `n_elements`
/// elements per surface.
pub fn channel_model(cfg: &ExperimentConfig, patterns: PatternTable, sigma_deg: Option<f64>) -> Result<ChannelModel> {
    let mut params = cfg.channel_params();
    if let Some(s) = sigma_deg {
        params = params.with_spread(s);
    }
    ChannelModel::calibrated(params, patterns, cfg.channel.calibration_realizations)
}

/// The paired metasurface / Rayleigh ensemble at the configured spread.
pub fn run_mc(cfg: &ExperimentConfig) -> Result<(ChannelModel, EnsembleStats)> {
    let patterns = antenna_patterns(&cfg.antenna, cfg.antenna.n_elements, cfg.run.include_exterior)?;
    let model = channel_model(cfg, patterns, None)?;
    let stats = ensemble_run(&model, cfg.run.realizations, cfg.run.kappa_convention)?;
    Ok((model, stats))
}

pub fn cmd_mc(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let prov = provenance(cfg);
    let (model, stats) = run_mc(cfg)?;
    let mut raw = CsvTable::new(&prov, &["realization", "C_ms", "C_rayleigh", "kappa_ms", "kappa_rayleigh", "ratio"]);
    for r in 0..stats.len() {
        raw.push_row([
            r.to_string(),
            fmt_f64(stats.capacity_ms[r]),
            fmt_f64(stats.capacity_rayleigh[r]),
            fmt_f64(stats.kappa_ms[r]),
            fmt_f64(stats.kappa_rayleigh[r]),
            fmt_f64(stats.kappa_ratio[r]),
        ]);
    }
    let mut paths = vec![out.join("mc_raw.csv"), out.join("mc_summary.json")];
    raw.write(&paths[0])?;
    #[derive(Serialize)]
    struct Body {
        normalization_scale: f64,
        #[serde(flatten)]
        summary: EnsembleSummary,
    }
    let body = Body { normalization_scale: model.scale, summary: stats.summary()? };
    write_json(&paths[1], &Document { provenance: &prov, body })?;

    if cfg.run.dump_channels {
        let mut dump = CsvTable::new(&prov, &["realization", "m", "n", "re", "im"]);
        for r in 0..stats.len() as u64 {
            let h = model.realize(&mut stream_rng(model.params.seed, realization_streams(r).0)).h;
            for n in 0..h.ncols() {
                for m in 0..h.nrows() {
                    let z = h[(m, n)];
                    dump.push_row([r.to_string(), m.to_string(), n.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
                }
            }
        }
        let path = out.join("channels.csv");
        dump.write(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// One `(N_m, sigma)` cell of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub n_elements: usize,
    pub sigma_deg: f64,
    pub normalization_scale: f64,
    #[serde(flatten)]
    pub summary: EnsembleSummary,
}

/// Mean-performance grid over `sweep_n_elements x sweep_sigma_deg`, with
/// `sweep_realizations` per cell. Every cell reuses the same random streams.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepCell>> {
    let mut cells = Vec::new();
    for &n_m in &cfg.run.sweep_n_elements {
        let patterns = antenna_patterns(&cfg.antenna, n_m, cfg.run.include_exterior)?;
        let row = cfg
            .run
            .sweep_sigma_deg
            .par_iter()
            .map(|&sigma| {
                let model = channel_model(cfg, patterns.clone(), Some(sigma))?;
                let stats = ensemble_run(&model, cfg.run.sweep_realizations, cfg.run.kappa_convention)?;
                Ok(SweepCell {
                    n_elements: n_m,
                    sigma_deg: sigma,
                    normalization_scale: model.scale,
                    summary: stats.summary()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        cells.extend(row);
    }
    Ok(cells)
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let prov = provenance(cfg);
    let cells = run_sweep(cfg)?;
    let mut t =
        CsvTable::new(&prov, &["N_m", "sigma", "mean_C", "mean_kappa", "mean_C_rayleigh", "mean_kappa_rayleigh"]);
    for c in &cells {
        let s = &c.summary;
        t.push_row([
            c.n_elements.to_string(),
            fmt_f64(c.sigma_deg),
            fmt_f64(s.capacity_ms.mean),
            fmt_f64(s.kappa_ms.mean),
            fmt_f64(s.capacity_rayleigh.mean),
            fmt_f64(s.kappa_rayleigh.mean),
        ]);
    }
    let paths = vec![out.join("sweep.csv"), out.join("sweep_summary.json")];
    t.write(&paths[0])?;
    #[derive(Serialize)]
    struct Body<'a> {
        cells: &'a [SweepCell],
    }
    write_json(&paths[1], &Document { provenance: &prov, body: Body { cells: &cells } })?;
    Ok(paths)
}
