//! Experiment configuration files (TOML).

use serde::Deserialize;

use crate::arrays::{default_d_min, RegionSpec};
use crate::error::{Error, Result};
use crate::search::OptimizerConfig;
use crate::units::{dbm_to_mw, wavelength_from_frequency};
use crate::Link;

use super::experiment::{Architecture, Scheme};
use super::sampling::UserDistribution;

/// Fully resolved simulation scenario, linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub wavelength: f64,
    /// Transmit power (mW).
    pub power: f64,
    /// Noise power (mW).
    pub noise: f64,
    pub region: RegionSpec,
    pub bs_height: f64,
    pub subarrays: usize,
    pub nx: usize,
    pub ny: usize,
    pub users: usize,
    pub distribution: UserDistribution,
    /// NLoS paths per user.
    pub nlos: usize,
    /// NLoS amplitude relative to the user's LoS amplitude.
    pub nlos_relative_amplitude: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn link(&self) -> Link {
        Link { wavelength: self.wavelength, power: self.power, noise: self.noise }
    }

    /// Total element count `MN`.
    pub fn element_count(&self) -> usize {
        self.subarrays * self.nx * self.ny
    }
}

/// Everything needed by [`super::run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub optimizer: OptimizerConfig,
    /// Side of the centered square holding the initial MA grid, as a
    /// fraction of the region side.
    pub init_scale: f64,
    pub trials: usize,
    /// Channel realizations used by the statistical MA schemes.
    pub statistical_realizations: usize,
    pub architectures: Vec<Architecture>,
    pub schemes: Vec<Scheme>,
    pub write_traces: bool,
    pub write_geometry: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    #[serde(default)]
    users: RawUsers,
    #[serde(default)]
    optimizer: RawOptimizer,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default = "default_frequency")]
    frequency_hz: f64,
    wavelength: Option<f64>,
    #[serde(default = "default_power")]
    power_dbm: f64,
    #[serde(default = "default_noise")]
    noise_dbm: f64,
    region_side_wavelengths: Option<f64>,
    region_side: Option<f64>,
    d_min: Option<f64>,
    #[serde(default = "default_bs_height")]
    bs_height: f64,
    #[serde(default = "default_subarrays")]
    subarrays: usize,
    #[serde(default = "one")]
    nx: usize,
    #[serde(default = "one")]
    ny: usize,
    #[serde(default = "default_users")]
    users: usize,
    #[serde(default)]
    nlos: usize,
    #[serde(default = "default_nlos_amplitude")]
    nlos_relative_amplitude: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUsers {
    #[serde(default = "default_distribution")]
    distribution: String,
    r_min: Option<f64>,
    r_max: Option<f64>,
    centers: Option<Vec<[f64; 2]>>,
    radius: Option<f64>,
}

impl Default for RawUsers {
    fn default() -> Self {
        Self { distribution: default_distribution(), r_min: None, r_max: None, centers: None, radius: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_step")]
    init_step_wavelengths: f64,
    #[serde(default = "default_shrink")]
    shrink: f64,
    #[serde(default = "default_armijo")]
    armijo: f64,
    #[serde(default = "default_backtracks")]
    max_backtracks: usize,
    #[serde(default = "default_init_scale")]
    init_scale: f64,
}

impl Default for RawOptimizer {
    fn default() -> Self {
        Self {
            max_iters: default_max_iters(),
            tol: default_tol(),
            init_step_wavelengths: default_step(),
            shrink: default_shrink(),
            armijo: default_armijo(),
            max_backtracks: default_backtracks(),
            init_scale: default_init_scale(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_realizations")]
    statistical_realizations: usize,
    #[serde(default = "default_architectures")]
    architectures: Vec<String>,
    #[serde(default = "default_schemes")]
    schemes: Vec<String>,
    #[serde(default)]
    write_traces: bool,
    #[serde(default)]
    write_geometry: bool,
}

impl Default for RawRun {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            trials: default_trials(),
            statistical_realizations: default_realizations(),
            architectures: default_architectures(),
            schemes: default_schemes(),
            write_traces: false,
            write_geometry: false,
        }
    }
}

fn default_frequency() -> f64 {
    30e9
}
fn default_power() -> f64 {
    20.0
}
fn default_noise() -> f64 {
    -80.0
}
fn default_bs_height() -> f64 {
    15.0
}
fn default_subarrays() -> usize {
    64
}
fn one() -> usize {
    1
}
fn default_users() -> usize {
    32
}
fn default_nlos_amplitude() -> f64 {
    0.1
}
fn default_distribution() -> String {
    "annulus".into()
}
fn default_max_iters() -> usize {
    300
}
fn default_tol() -> f64 {
    1e-5
}
fn default_step() -> f64 {
    10.0
}
fn default_shrink() -> f64 {
    0.5
}
fn default_armijo() -> f64 {
    0.1
}
fn default_backtracks() -> usize {
    30
}
fn default_init_scale() -> f64 {
    0.5
}
fn default_seed() -> u64 {
    1
}
fn default_trials() -> usize {
    500
}
fn default_realizations() -> usize {
    50
}
fn default_architectures() -> Vec<String> {
    vec!["digital".into(), "analog".into()]
}
fn default_schemes() -> Vec<String> {
    Scheme::ALL.iter().map(|s| s.name().to_string()).collect()
}

/// 1-based line of `key = ...` inside `[section]`, for diagnostics.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        } else if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Diagnostics<'a> {
    text: &'a str,
}

impl Diagnostics<'_> {
    fn error(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> Error {
        match locate(self.text, section, key) {
            Some(line) => Error::Config(format!("line {line}, field {section}.{key}: {msg}")),
            None => Error::Config(format!("field {section}.{key}: {msg}")),
        }
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(section, key, format!("must be positive, got {v}")))
        }
    }

    fn at_least_one(&self, section: &str, key: &str, v: usize) -> Result<usize> {
        if v >= 1 {
            Ok(v)
        } else {
            Err(self.error(section, key, "must be at least 1"))
        }
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let span = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        match span {
            Some(line) => Error::Config(format!("line {line}: {}", e.message())),
            None => Error::Config(e.message().to_string()),
        }
    })?;
    let d = Diagnostics { text };
    let s = &raw.scenario;

    let wavelength = match s.wavelength {
        Some(w) => d.positive("scenario", "wavelength", w)?,
        None => wavelength_from_frequency(d.positive("scenario", "frequency_hz", s.frequency_hz)?),
    };
    let side = match (s.region_side, s.region_side_wavelengths) {
        (Some(_), Some(_)) => {
            return Err(d.error(
                "scenario",
                "region_side",
                "give either region_side or region_side_wavelengths, not both",
            ))
        }
        (Some(a), None) => d.positive("scenario", "region_side", a)?,
        (None, Some(n)) => d.positive("scenario", "region_side_wavelengths", n)? * wavelength,
        (None, None) => 100.0 * wavelength,
    };
    let nx = d.at_least_one("scenario", "nx", s.nx)?;
    let ny = d.at_least_one("scenario", "ny", s.ny)?;
    let d_min = match s.d_min {
        Some(v) if v >= 0.0 && v.is_finite() => v,
        Some(v) => return Err(d.error("scenario", "d_min", format!("must be non-negative, got {v}"))),
        None => default_d_min(nx, ny, wavelength),
    };
    let region = RegionSpec::new(side, d_min).map_err(|e| d.error("scenario", "d_min", e))?;
    if !s.power_dbm.is_finite() {
        return Err(d.error("scenario", "power_dbm", "must be finite"));
    }
    if !s.noise_dbm.is_finite() {
        return Err(d.error("scenario", "noise_dbm", "must be finite"));
    }
    if !(s.nlos_relative_amplitude >= 0.0 && s.nlos_relative_amplitude.is_finite()) {
        return Err(d.error("scenario", "nlos_relative_amplitude", "must be non-negative"));
    }

    let u = &raw.users;
    let distribution = match u.distribution.as_str() {
        "annulus" => {
            UserDistribution::Annulus { r_min: u.r_min.unwrap_or(5.0), r_max: u.r_max.unwrap_or(50.0) }
        }
        "ring" => {
            UserDistribution::Annulus { r_min: u.r_min.unwrap_or(24.9), r_max: u.r_max.unwrap_or(25.1) }
        }
        "hotspots" => UserDistribution::Hotspots {
            centers: u
                .centers
                .clone()
                .unwrap_or_else(|| vec![[-25.0, 40.0], [25.0, 40.0]])
                .into_iter()
                .map(|[x, z]| (x, z))
                .collect(),
            radius: u.radius.unwrap_or(2.5),
        },
        other => {
            return Err(d.error(
                "users",
                "distribution",
                format!("unknown distribution '{other}' (annulus, ring or hotspots)"),
            ))
        }
    };
    distribution.check().map_err(|e| d.error("users", "distribution", e))?;

    let o = &raw.optimizer;
    let optimizer = OptimizerConfig {
        max_iters: o.max_iters,
        tol: o.tol,
        init_step: o.init_step_wavelengths * wavelength,
        shrink: o.shrink,
        armijo: o.armijo,
        max_backtracks: o.max_backtracks,
    };
    optimizer.validate().map_err(|e| Error::Config(format!("[optimizer]: {e}")))?;
    if !(o.init_scale > 0.0 && o.init_scale <= 1.0) {
        return Err(d.error("optimizer", "init_scale", "must lie in (0, 1]"));
    }

    let r = &raw.run;
    let architectures = r
        .architectures
        .iter()
        .map(|a| a.parse::<Architecture>().map_err(|e| d.error("run", "architectures", e)))
        .collect::<Result<Vec<_>>>()?;
    let schemes = r
        .schemes
        .iter()
        .map(|a| a.parse::<Scheme>().map_err(|e| d.error("run", "schemes", e)))
        .collect::<Result<Vec<_>>>()?;

    let scenario = Scenario {
        wavelength,
        power: dbm_to_mw(s.power_dbm),
        noise: dbm_to_mw(s.noise_dbm),
        region,
        bs_height: d.positive("scenario", "bs_height", s.bs_height)?,
        subarrays: d.at_least_one("scenario", "subarrays", s.subarrays)?,
        nx,
        ny,
        users: d.at_least_one("scenario", "users", s.users)?,
        distribution,
        nlos: s.nlos,
        nlos_relative_amplitude: s.nlos_relative_amplitude,
        seed: r.seed,
    };
    Ok(ExperimentConfig {
        scenario,
        optimizer,
        init_scale: o.init_scale,
        trials: d.at_least_one("run", "trials", r.trials)?,
        statistical_realizations: d.at_least_one(
            "run",
            "statistical_realizations",
            r.statistical_realizations,
        )?,
        architectures,
        schemes,
        write_traces: r.write_traces,
        write_geometry: r.write_geometry,
    })
}

/// Reads and parses a configuration file from disk.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
