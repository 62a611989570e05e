//! Configuration ingestion: strict JSON parsing, unit conversion, defaults.
//!
//! All unit conversion happens here and only here: SNRs arrive in dB and
//! leave as linear noise variances, angles arrive in degrees and leave in
//! radians, distances arrive in meters or wavelengths and leave in
//! wavelengths. Unknown keys are rejected.

use crate::CliError;
use serde::{Deserialize, Serialize};
use skc_core::montecarlo::PathMode;
use skc_core::{AngularSpectrum, PathComponent, Scenario};
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: ScenarioConfig,
    spectra: Vec<SpectrumConfig>,
    axis: AxisConfig,
    grid: GridConfig,
    #[serde(default)]
    outputs: Option<Vec<OutputKind>>,
    #[serde(default)]
    distance_criterion: Option<CriterionConfig>,
    #[serde(default)]
    mc: Option<McSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    #[serde(default = "default_power")]
    power: f64,
    snr_x_db: f64,
    snr_y_db: f64,
    snr_z_db: f64,
    wavelength_m: f64,
}

fn default_power() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    Iso3d,
    Iso2d,
    Laplacian { phi_rms_deg: f64, theta_rms_deg: f64 },
    Discrete { paths: Vec<PathConfig> },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub power: f64,
    pub az_deg: f64,
    pub el_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisConfig {
    #[serde(default)]
    x: f64,
    #[serde(default)]
    y: f64,
    #[serde(default)]
    z: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GridUnit {
    #[default]
    Wavelengths,
    Meters,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    start: f64,
    stop: f64,
    step: f64,
    #[serde(default)]
    unit: GridUnit,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Rho,
    Bounds,
    Threshold,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CriterionConfig {
    /// The lower bound must be strictly positive.
    PositiveLb,
    /// The lower bound must reach at least this many bits per observation.
    LbAtLeast { bits: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct McSection {
    #[serde(default)]
    num_paths: Option<usize>,
    #[serde(default)]
    num_observations: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    mode: Option<PathMode>,
    #[serde(default)]
    displacements_wl: Option<Vec<f64>>,
}

/// Which optional column groups the sweep tables carry.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Outputs {
    pub rho: bool,
    pub bounds: bool,
    pub threshold: bool,
}

/// Monte Carlo settings after defaulting.
#[derive(Debug, Clone, Serialize)]
pub struct McSettings {
    pub num_paths: usize,
    pub num_observations: usize,
    pub seed: u64,
    pub mode: PathMode,
    pub displacements_wl: Vec<f64>,
}

/// Fully resolved sweep specification (linear units, radians, wavelengths).
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub spectra: Vec<(String, AngularSpectrum)>,
    pub spectra_config: Vec<SpectrumConfig>,
    pub axis: [f64; 3],
    pub grid_start: f64,
    pub grid_stop: f64,
    pub grid_step: f64,
    pub outputs: Outputs,
    pub criterion: CriterionConfig,
    pub mc: McSettings,
}

impl SweepSpec {
    /// Grid points in wavelengths, start to stop inclusive.
    pub fn grid(&self) -> Vec<f64> {
        grid_points(self.grid_start, self.grid_stop, self.grid_step)
    }
}

pub fn grid_points(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

fn db_to_noise(power: f64, snr_db: f64) -> f64 {
    power / 10f64.powf(snr_db / 10.0)
}

fn spectrum_label(cfg: &SpectrumConfig) -> String {
    match cfg {
        SpectrumConfig::Iso3d => "iso3d".to_string(),
        SpectrumConfig::Iso2d => "iso2d".to_string(),
        SpectrumConfig::Laplacian {
            phi_rms_deg,
            theta_rms_deg,
        } => format!("laplacian_phi{phi_rms_deg}_theta{theta_rms_deg}"),
        SpectrumConfig::Discrete { paths } => format!("discrete_{}paths", paths.len()),
    }
}

pub fn build_spectrum(cfg: &SpectrumConfig) -> Result<AngularSpectrum, CliError> {
    let deg = std::f64::consts::PI / 180.0;
    let spec = match cfg {
        SpectrumConfig::Iso3d => AngularSpectrum::isotropic_3d(),
        SpectrumConfig::Iso2d => AngularSpectrum::isotropic_2d(),
        SpectrumConfig::Laplacian {
            phi_rms_deg,
            theta_rms_deg,
        } => AngularSpectrum::laplacian(phi_rms_deg * deg, theta_rms_deg * deg)
            .map_err(|e| CliError::Config(format!("spectrum: {e}")))?,
        SpectrumConfig::Discrete { paths } => {
            let components = paths
                .iter()
                .map(|p| PathComponent {
                    relative_power: p.power,
                    azimuth: p.az_deg * deg,
                    elevation: p.el_deg * deg,
                })
                .collect();
            AngularSpectrum::discrete(components)
                .map_err(|e| CliError::Config(format!("spectrum: {e}")))?
        }
    };
    Ok(spec)
}

/// Parse and resolve a configuration file. dB→linear, degree→radian and
/// meter→wavelength conversions happen here; errors name the offending key
/// and line where the format makes that possible.
pub fn parse_config(path: &Path) -> Result<SweepSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let sc = &file.scenario;
    if !(sc.power.is_finite() && sc.power > 0.0) {
        return Err(CliError::Config("scenario.power must be > 0".into()));
    }
    let scenario = Scenario::new(
        sc.power,
        db_to_noise(sc.power, sc.snr_x_db),
        db_to_noise(sc.power, sc.snr_y_db),
        db_to_noise(sc.power, sc.snr_z_db),
        sc.wavelength_m,
    )
    .map_err(|e| CliError::Config(format!("scenario: {e}")))?;

    if file.spectra.is_empty() {
        return Err(CliError::Config("spectra must list at least one entry".into()));
    }
    let mut spectra = Vec::with_capacity(file.spectra.len());
    for cfg in &file.spectra {
        spectra.push((spectrum_label(cfg), build_spectrum(cfg)?));
    }

    let norm = (file.axis.x.powi(2) + file.axis.y.powi(2) + file.axis.z.powi(2)).sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(CliError::Config("axis must be a nonzero vector".into()));
    }
    let axis = [file.axis.x / norm, file.axis.y / norm, file.axis.z / norm];

    let g = &file.grid;
    if !(g.step.is_finite() && g.step > 0.0) {
        return Err(CliError::Config("grid.step must be > 0".into()));
    }
    if !(g.start.is_finite() && g.stop.is_finite() && g.stop >= g.start && g.start >= 0.0) {
        return Err(CliError::Config(
            "grid requires 0 <= start <= stop with finite values".into(),
        ));
    }
    let to_wl = match g.unit {
        GridUnit::Wavelengths => 1.0,
        GridUnit::Meters => 1.0 / scenario.wavelength,
    };

    let outputs = match &file.outputs {
        None => Outputs {
            rho: true,
            bounds: true,
            threshold: true,
        },
        Some(list) => Outputs {
            rho: list.contains(&OutputKind::Rho),
            bounds: list.contains(&OutputKind::Bounds),
            threshold: list.contains(&OutputKind::Threshold),
        },
    };

    let mc_cfg = file.mc;
    let mc = McSettings {
        num_paths: mc_cfg.as_ref().and_then(|m| m.num_paths).unwrap_or(64),
        num_observations: mc_cfg
            .as_ref()
            .and_then(|m| m.num_observations)
            .unwrap_or(1_000_000),
        seed: mc_cfg.as_ref().and_then(|m| m.seed).unwrap_or(1),
        mode: mc_cfg.as_ref().and_then(|m| m.mode).unwrap_or_default(),
        displacements_wl: mc_cfg
            .as_ref()
            .and_then(|m| m.displacements_wl.clone())
            .unwrap_or_else(|| vec![0.0, 0.5, 2.0]),
    };
    if mc.num_paths < 1 {
        return Err(CliError::Config("mc.num_paths must be >= 1".into()));
    }
    if mc.num_observations < 2 {
        return Err(CliError::Config("mc.num_observations must be >= 2".into()));
    }

    Ok(SweepSpec {
        scenario,
        spectra,
        spectra_config: file.spectra,
        axis,
        grid_start: g.start * to_wl,
        grid_stop: g.stop * to_wl,
        grid_step: g.step * to_wl,
        outputs,
        criterion: file
            .distance_criterion
            .unwrap_or(CriterionConfig::PositiveLb),
        mc,
    })
}

/// Provenance sidecar written next to every output file: the configuration
/// after all unit resolution, plus any command-line overrides.
#[derive(Debug, Serialize)]
pub struct ResolvedConfig {
    pub command: String,
    pub power: f64,
    pub noise_x: f64,
    pub noise_y: f64,
    pub noise_z: f64,
    pub wavelength_m: f64,
    pub spectra: Vec<SpectrumConfig>,
    pub axis: [f64; 3],
    pub grid_start_wl: f64,
    pub grid_stop_wl: f64,
    pub grid_step_wl: f64,
    pub outputs: Outputs,
    pub criterion: CriterionConfig,
    pub mc: McSettings,
}

impl ResolvedConfig {
    pub fn new(command: &str, spec: &SweepSpec) -> Self {
        Self {
            command: command.to_string(),
            power: spec.scenario.power,
            noise_x: spec.scenario.noise_x,
            noise_y: spec.scenario.noise_y,
            noise_z: spec.scenario.noise_z,
            wavelength_m: spec.scenario.wavelength,
            spectra: spec.spectra_config.clone(),
            axis: spec.axis,
            grid_start_wl: spec.grid_start,
            grid_stop_wl: spec.grid_stop,
            grid_step_wl: spec.grid_step,
            outputs: spec.outputs,
            criterion: spec.criterion,
            mc: spec.mc.clone(),
        }
    }
}
