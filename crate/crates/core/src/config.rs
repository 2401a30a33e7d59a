//! JSON experiment configuration.
//!
//! Every field has a default, so `{}` is a complete configuration describing
//! the nominal 20-surface, 30-element antenna at 3.5 GHz. Unknown keys are
//! rejected.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::design::LorentzianParams;
use crate::error::{Error, Result};
use crate::metrics::KappaConvention;
use crate::waveguide::{Substrate, WaveguideSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveguideConfig {
    pub width_m: f64,
    pub height_m: f64,
    pub eps_r: f64,
    pub tan_delta: f64,
}

impl Default for WaveguideConfig {
    fn default() -> Self {
        Self { width_m: 0.030, height_m: 1.52e-3, eps_r: 3.55, tan_delta: 0.0027 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementConfig {
    pub coupling_factor_m3: f64,
    pub quality_factor: f64,
    pub tuning_min_hz: f64,
    pub tuning_max_hz: f64,
}

impl Default for ElementConfig {
    fn default() -> Self {
        let r = LorentzianParams::reference();
        Self {
            coupling_factor_m3: r.coupling_factor,
            quality_factor: r.quality_factor,
            tuning_min_hz: r.tuning_min_hz,
            tuning_max_hz: r.tuning_max_hz,
        }
    }
}

impl ElementConfig {
    /// Lorentzian parameters resting at the middle of the tuning range.
    pub fn params(&self) -> Result<LorentzianParams> {
        LorentzianParams::new(
            self.coupling_factor_m3,
            self.quality_factor,
            0.5 * (self.tuning_min_hz + self.tuning_max_hz),
            self.tuning_min_hz,
            self.tuning_max_hz,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaConfig {
    /// Number of metasurfaces (one RF chain each).
    pub n_bs: usize,
    /// Elements per metasurface.
    pub n_elements: usize,
    pub pitch_m: f64,
    pub operating_hz: f64,
    pub waveguide: WaveguideConfig,
    pub element: ElementConfig,
    /// Explicit beam directions, one per surface. When absent, `n_bs` beams
    /// are spread uniformly over `fan_range_deg`, ends included.
    pub beam_angles_deg: Option<Vec<f64>>,
    pub fan_range_deg: [f64; 2],
    pub tuning_grid: usize,
    /// Frequencies of the S-parameter sweep in the antenna report.
    pub sweep_start_hz: f64,
    pub sweep_stop_hz: f64,
    pub sweep_step_hz: f64,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        Self {
            n_bs: 20,
            n_elements: 30,
            pitch_m: 0.030,
            operating_hz: 3.5e9,
            waveguide: WaveguideConfig::default(),
            element: ElementConfig::default(),
            beam_angles_deg: None,
            fan_range_deg: [30.0, 150.0],
            tuning_grid: crate::design::DEFAULT_TUNING_GRID,
            sweep_start_hz: 3.2e9,
            sweep_stop_hz: 3.8e9,
            sweep_step_hz: 5.0e6,
        }
    }
}

impl AntennaConfig {
    pub fn beam_angles(&self) -> Vec<f64> {
        if let Some(a) = &self.beam_angles_deg {
            return a.clone();
        }
        beam_fan(self.n_bs, self.fan_range_deg)
    }

    pub fn waveguide(&self, n_elements: usize) -> Result<WaveguideSpec> {
        let w = &self.waveguide;
        WaveguideSpec::uniform(
            w.width_m,
            w.height_m,
            Substrate { eps_r: w.eps_r, tan_delta: w.tan_delta },
            n_elements,
            self.pitch_m,
            self.operating_hz,
        )
    }

    pub fn sweep_frequencies(&self) -> Vec<f64> {
        let n = ((self.sweep_stop_hz - self.sweep_start_hz) / self.sweep_step_hz + 1e-9).floor() as usize;
        (0..=n).map(|i| self.sweep_start_hz + i as f64 * self.sweep_step_hz).collect()
    }
}

/// `n` angles uniformly spanning `range`; a single beam sits in the middle.
pub fn beam_fan(n: usize, range: [f64; 2]) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (range[0] + range[1])],
        _ => (0..n).map(|i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub n_users: usize,
    pub snr_db: f64,
    pub n_clusters: usize,
    pub n_rays: usize,
    pub sigma_bs_deg: f64,
    pub sigma_u_deg: f64,
    pub bs_mean_range_deg: [f64; 2],
    pub u_mean_range_deg: [f64; 2],
    pub calibration_realizations: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            n_users: 13,
            snr_db: 10.0,
            n_clusters: 6,
            n_rays: 11,
            sigma_bs_deg: 20.0,
            sigma_u_deg: 20.0,
            bs_mean_range_deg: [-60.0, 60.0],
            u_mean_range_deg: [0.0, 360.0],
            calibration_realizations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub realizations: usize,
    pub sweep_realizations: usize,
    pub sweep_n_elements: Vec<usize>,
    pub sweep_sigma_deg: Vec<f64>,
    pub include_exterior: bool,
    pub shared_clusters: bool,
    /// Redraw ray gains per base-station row (ablation).
    pub per_entry_gains: bool,
    pub kappa_convention: KappaConvention,
    /// Also write every metasurface channel matrix from `mc`.
    pub dump_channels: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_614,
            realizations: 10_000,
            sweep_realizations: 2_000,
            sweep_n_elements: (10..=45).step_by(5).collect(),
            sweep_sigma_deg: (1..=12).map(|i| 5.0 * i as f64).collect(),
            include_exterior: true,
            shared_clusters: false,
            per_entry_gains: false,
            kappa_convention: KappaConvention::Singular,
            dump_channels: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub antenna: AntennaConfig,
    pub channel: ChannelConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    /// Parse and validate. Syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Compact single-line JSON used in output provenance.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let a = &self.antenna;
        if a.n_bs == 0 || a.n_elements == 0 {
            return bad("antenna.n_bs and antenna.n_elements must be >= 1".into());
        }
        if let Some(angles) = &a.beam_angles_deg {
            if angles.len() != a.n_bs {
                return bad(format!("antenna.beam_angles_deg has {} entries for n_bs = {}", angles.len(), a.n_bs));
            }
            if angles.iter().any(|t| !(0.0..=180.0).contains(t)) {
                return bad("antenna.beam_angles_deg entries must lie in [0, 180]".into());
            }
        }
        if !(a.pitch_m > 0.0) {
            return bad(format!("antenna.pitch_m must be positive, got {}", a.pitch_m));
        }
        if a.tuning_grid < 16 {
            return bad(format!("antenna.tuning_grid must be >= 16, got {}", a.tuning_grid));
        }
        if !(a.sweep_step_hz > 0.0 && a.sweep_start_hz > 0.0 && a.sweep_stop_hz >= a.sweep_start_hz) {
            return bad("antenna sweep frequencies must satisfy 0 < start <= stop and step > 0".into());
        }
        a.element.params().map_err(|e| Error::Config(format!("antenna.element: {e}")))?;
        a.waveguide(a.n_elements).map_err(|e| Error::Config(format!("antenna.waveguide: {e}")))?;
        self.channel_params().validate().map_err(|e| Error::Config(format!("channel: {e}")))?;
        if self.channel.calibration_realizations < 1000 {
            return bad("channel.calibration_realizations must be >= 1000".into());
        }
        let r = &self.run;
        if r.realizations == 0 || r.sweep_realizations == 0 {
            return bad("run realization counts must be >= 1".into());
        }
        if r.sweep_n_elements.is_empty() || r.sweep_n_elements.contains(&0) {
            return bad("run.sweep_n_elements must be non-empty and positive".into());
        }
        if r.sweep_sigma_deg.is_empty() || r.sweep_sigma_deg.iter().any(|s| !(*s > 0.0)) {
            return bad("run.sweep_sigma_deg must be non-empty and positive".into());
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        10f64.powf(self.channel.snr_db / 10.0)
    }

    pub fn channel_params(&self) -> ChannelParams {
        let c = &self.channel;
        ChannelParams {
            n_clusters: c.n_clusters,
            n_rays: c.n_rays,
            sigma_bs_deg: c.sigma_bs_deg,
            sigma_u_deg: c.sigma_u_deg,
            bs_mean_range_deg: c.bs_mean_range_deg,
            u_mean_range_deg: c.u_mean_range_deg,
            n_bs: self.antenna.n_bs,
            n_users: c.n_users,
            rho: self.rho(),
            seed: self.run.seed,
            shared_clusters: self.run.shared_clusters,
            per_entry_gains: self.run.per_entry_gains,
        }
    }
}
