//! Monte Carlo experiment runner.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analog::{self, optimize_analog, optimize_analog_statistical, optimize_phases};
use crate::arrays::{
    benchmark_geometry, init_subregion_grid, subarray_offsets, write_geometry, BenchmarkKind,
};
use crate::channel::{ArrayGeometry, UserChannel};
use crate::closedform::upper_bound;
use crate::digital::{self, optimize_digital, optimize_digital_statistical, zf_min_sinr};
use crate::error::{Error, Result};
use crate::units::to_db;

use super::config::ExperimentConfig;
use super::sampling::{sample_users, stream_rng, STATISTICAL_STREAM_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Architecture {
    Digital,
    Analog,
}

impl Architecture {
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Digital => "digital",
            Architecture::Analog => "analog",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "digital" => Ok(Architecture::Digital),
            "analog" => Ok(Architecture::Analog),
            _ => Err(Error::InvalidInput(format!("unknown architecture '{s}' (digital or analog)"))),
        }
    }
}

/// Array/optimization scheme compared in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// MA positions optimized per channel realization.
    MaInstant,
    /// MA positions optimized once over sampled realizations.
    MaStatistical,
    /// Fixed-position benchmark array.
    Fixed(BenchmarkKind),
    /// Closed-form upper bound.
    UpperBound,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::MaInstant,
        Scheme::MaStatistical,
        Scheme::Fixed(BenchmarkKind::DenseUpa),
        Scheme::Fixed(BenchmarkKind::SparseUpa),
        Scheme::Fixed(BenchmarkKind::HSparseUpa),
        Scheme::Fixed(BenchmarkKind::VSparseUpa),
        Scheme::Fixed(BenchmarkKind::HSparseUla),
        Scheme::Fixed(BenchmarkKind::VSparseUla),
        Scheme::UpperBound,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::MaInstant => "ma_instant",
            Scheme::MaStatistical => "ma_statistical",
            Scheme::Fixed(kind) => kind.name(),
            Scheme::UpperBound => "upper_bound",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheme '{s}'")))
    }
}

/// Outcome class of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    /// ZF was invalid (near-parallel channels); the metric counts as 0.
    IllConditioned,
    /// A user received no analog beamforming gain; the metric counts as 0.
    ZeroGain,
}

impl TrialStatus {
    pub fn name(&self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::IllConditioned => "ill_conditioned",
            TrialStatus::ZeroGain => "zero_gain",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub architecture: Architecture,
    pub scheme: Scheme,
    /// Min-SINR (digital) or min-SNR (analog), linear.
    pub value: f64,
    pub status: TrialStatus,
}

/// Aggregate of one (architecture, scheme) over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub architecture: Architecture,
    pub scheme: Scheme,
    pub trials: usize,
    pub failures: usize,
    pub mean_linear: f64,
    /// `10 log10(mean_linear)`, the headline metric.
    pub mean_db: f64,
    /// Mean of per-trial dB values over successful trials.
    pub mean_of_db: f64,
    pub std_db: f64,
    pub min_db: f64,
    pub max_db: f64,
}

/// A named text artifact (trace CSV or geometry dump).
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SchemeSummary>,
    pub artifacts: Vec<Artifact>,
}

impl ExperimentResults {
    pub fn summary(&self, architecture: Architecture, scheme: Scheme) -> Option<&SchemeSummary> {
        self.summaries.iter().find(|s| s.architecture == architecture && s.scheme == scheme)
    }

    /// Per-trial values of one (architecture, scheme), in trial order.
    pub fn values(&self, architecture: Architecture, scheme: Scheme) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.architecture == architecture && r.scheme == scheme)
            .map(|r| r.value)
            .collect()
    }
}

struct Prepared {
    ma_init: ArrayGeometry,
    benchmarks: Vec<(BenchmarkKind, ArrayGeometry)>,
    statistical: Vec<(Architecture, ArrayGeometry)>,
    artifacts: Vec<Artifact>,
}

fn classify(result: Result<f64>) -> Result<(f64, TrialStatus)> {
    match result {
        Ok(v) => Ok((v, TrialStatus::Ok)),
        Err(Error::IllConditionedChannel { .. }) => Ok((0.0, TrialStatus::IllConditioned)),
        Err(Error::ZeroGain { .. }) => Ok((0.0, TrialStatus::ZeroGain)),
        Err(e) => Err(e),
    }
}

/// Channel realizations driving the statistical schemes.
pub fn statistical_realizations(cfg: &ExperimentConfig) -> Result<Vec<Vec<UserChannel>>> {
    (0..cfg.statistical_realizations as u64)
        .map(|q| sample_users(&cfg.scenario, &mut stream_rng(cfg.scenario.seed, STATISTICAL_STREAM_BASE + q)))
        .collect()
}

/// Users of Monte Carlo trial `trial`.
pub fn trial_users(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<UserChannel>> {
    sample_users(&cfg.scenario, &mut stream_rng(cfg.scenario.seed, trial as u64))
}

/// Initial MA geometry of an experiment.
pub fn ma_initial_geometry(cfg: &ExperimentConfig) -> Result<ArrayGeometry> {
    let s = &cfg.scenario;
    init_subregion_grid(s.subarrays, s.region, cfg.init_scale, &subarray_offsets(s.nx, s.ny, s.wavelength))
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let s = &cfg.scenario;
    let link = s.link();
    let ma_init = ma_initial_geometry(cfg)?;
    let mut artifacts = Vec::new();
    if cfg.write_geometry {
        artifacts.push(Artifact { path: "geometry/ma_init.txt".into(), contents: write_geometry(&ma_init) });
    }
    let mut benchmarks = Vec::new();
    for scheme in &cfg.schemes {
        if let Scheme::Fixed(kind) = scheme {
            let g = benchmark_geometry(*kind, s.element_count(), s.region, s.wavelength)?;
            if cfg.write_geometry {
                artifacts
                    .push(Artifact { path: format!("geometry/{kind}.txt"), contents: write_geometry(&g) });
            }
            benchmarks.push((*kind, g));
        }
    }
    let mut statistical = Vec::new();
    if cfg.schemes.contains(&Scheme::MaStatistical) {
        let realizations = statistical_realizations(cfg)?;
        for arch in &cfg.architectures {
            let (geom, trace) = match arch {
                Architecture::Digital => {
                    let run = optimize_digital_statistical(&ma_init, &realizations, &link, &cfg.optimizer)?;
                    (run.geometry, digital::trace_csv(&run.trace))
                }
                Architecture::Analog => {
                    let run = optimize_analog_statistical(&ma_init, &realizations, &link, &cfg.optimizer)?;
                    (run.geometry, analog::trace_csv(&run.trace))
                }
            };
            if cfg.write_traces {
                artifacts
                    .push(Artifact { path: format!("traces/{arch}_ma_statistical.csv"), contents: trace });
            }
            if cfg.write_geometry {
                artifacts.push(Artifact {
                    path: format!("geometry/{arch}_ma_statistical.txt"),
                    contents: write_geometry(&geom),
                });
            }
            statistical.push((*arch, geom));
        }
    }
    Ok(Prepared { ma_init, benchmarks, statistical, artifacts })
}

fn run_trial(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    trial: usize,
) -> Result<(Vec<TrialRecord>, Vec<Artifact>)> {
    let s = &cfg.scenario;
    let link = s.link();
    let users = trial_users(cfg, trial)?;
    let mut records = Vec::new();
    let mut artifacts = Vec::new();
    for &arch in &cfg.architectures {
        for &scheme in &cfg.schemes {
            let result = match (scheme, arch) {
                (Scheme::UpperBound, _) => {
                    upper_bound(&users, s.subarrays, s.nx * s.ny, &link).map(|b| b.value)
                }
                (Scheme::MaInstant, Architecture::Digital) => {
                    optimize_digital(&prepared.ma_init, &users, &link, &cfg.optimizer).map(|run| {
                        if cfg.write_traces {
                            artifacts.push(Artifact {
                                path: format!("traces/digital_ma_instant_trial{trial:05}.csv"),
                                contents: digital::trace_csv(&run.trace),
                            });
                        }
                        if cfg.write_geometry {
                            artifacts.push(Artifact {
                                path: format!("geometry/digital_ma_instant_trial{trial:05}.txt"),
                                contents: write_geometry(&run.solution.geometry),
                            });
                        }
                        run.solution.min_sinr
                    })
                }
                (Scheme::MaInstant, Architecture::Analog) => {
                    optimize_analog(&prepared.ma_init, &users, &link, &cfg.optimizer).map(|run| {
                        if cfg.write_traces {
                            artifacts.push(Artifact {
                                path: format!("traces/analog_ma_instant_trial{trial:05}.csv"),
                                contents: analog::trace_csv(&run.trace),
                            });
                        }
                        if cfg.write_geometry {
                            artifacts.push(Artifact {
                                path: format!("geometry/analog_ma_instant_trial{trial:05}.txt"),
                                contents: write_geometry(&run.solution.geometry),
                            });
                        }
                        run.solution.min_snr
                    })
                }
                (Scheme::MaStatistical, _) => {
                    let geom = &prepared
                        .statistical
                        .iter()
                        .find(|(a, _)| *a == arch)
                        .expect("statistical geometry prepared for every architecture")
                        .1;
                    evaluate_fixed(geom, arch, &users, cfg)
                }
                (Scheme::Fixed(kind), _) => {
                    let geom = &prepared
                        .benchmarks
                        .iter()
                        .find(|(k, _)| *k == kind)
                        .expect("benchmark geometry prepared for every fixed scheme")
                        .1;
                    evaluate_fixed(geom, arch, &users, cfg)
                }
            };
            let (value, status) = classify(result)?;
            records.push(TrialRecord { trial, architecture: arch, scheme, value, status });
        }
    }
    Ok((records, artifacts))
}

/// Fixed geometry: ZF for digital, phase-only optimization for analog.
fn evaluate_fixed(
    geom: &ArrayGeometry,
    arch: Architecture,
    users: &[UserChannel],
    cfg: &ExperimentConfig,
) -> Result<f64> {
    let link = cfg.scenario.link();
    match arch {
        Architecture::Digital => zf_min_sinr(geom, users, &link),
        Architecture::Analog => {
            optimize_phases(geom, users, &link, &cfg.optimizer).map(|r| r.solution.min_snr)
        }
    }
}

fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SchemeSummary> {
    let mut out = Vec::new();
    for &architecture in &cfg.architectures {
        for &scheme in &cfg.schemes {
            let rows: Vec<&TrialRecord> =
                records.iter().filter(|r| r.architecture == architecture && r.scheme == scheme).collect();
            let trials = rows.len();
            let failures = rows.iter().filter(|r| r.status != TrialStatus::Ok).count();
            let mean_linear = rows.iter().map(|r| r.value).sum::<f64>() / trials as f64;
            let db: Vec<f64> = rows
                .iter()
                .filter(|r| r.status == TrialStatus::Ok && r.value > 0.0)
                .map(|r| to_db(r.value))
                .collect();
            let (mean_of_db, std_db, min_db, max_db) = if db.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let n = db.len() as f64;
                let mean = db.iter().sum::<f64>() / n;
                let var = db.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
                (
                    mean,
                    var.sqrt(),
                    db.iter().copied().fold(f64::INFINITY, f64::min),
                    db.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            out.push(SchemeSummary {
                architecture,
                scheme,
                trials,
                failures,
                mean_linear,
                mean_db: to_db(mean_linear),
                mean_of_db,
                std_db,
                min_db,
                max_db,
            });
        }
    }
    out
}

/// Runs every configured (architecture, scheme) over `cfg.trials` Monte
/// Carlo trials. Trials run concurrently, each on its own random stream, and
/// are aggregated in trial order, so results depend only on the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.optimizer.validate()?;
    let prepared = prepare(cfg)?;
    let per_trial: Vec<Result<(Vec<TrialRecord>, Vec<Artifact>)>> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, &prepared, t)).collect();
    let mut records = Vec::with_capacity(cfg.trials * cfg.schemes.len() * cfg.architectures.len());
    let mut artifacts = prepared.artifacts.clone();
    for trial in per_trial {
        let (r, a) = trial?;
        records.extend(r);
        artifacts.extend(a);
    }
    let summaries = summarize(cfg, &records);
    Ok(ExperimentResults { records, summaries, artifacts })
}

fn fmt_db(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Per-trial CSV: `trial,architecture,scheme,value_linear,value_db,status`.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,architecture,scheme,value_linear,value_db,status\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{:e},{},{}\n",
            r.trial,
            r.architecture,
            r.scheme,
            r.value,
            fmt_db(to_db(r.value)),
            r.status.name()
        ));
    }
    out
}

/// Aggregate CSV, one row per (architecture, scheme).
pub fn summary_csv(summaries: &[SchemeSummary]) -> String {
    let mut out = String::from(
        "architecture,scheme,trials,failures,mean_linear,mean_db,mean_of_db,std_db,min_db,max_db\n",
    );
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{:e},{},{},{},{},{}\n",
            s.architecture,
            s.scheme,
            s.trials,
            s.failures,
            s.mean_linear,
            fmt_db(s.mean_db),
            fmt_db(s.mean_of_db),
            fmt_db(s.std_db),
            fmt_db(s.min_db),
            fmt_db(s.max_db)
        ));
    }
    out
}

/// Writes `trials.csv`, `summary.csv` and all artifacts under `out_dir`.
pub fn write_results(results: &ExperimentResults, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |rel: &str, contents: &str| -> Result<()> {
        let path = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    put("trials.csv", &trials_csv(&results.records))?;
    put("summary.csv", &summary_csv(&results.summaries))?;
    for a in &results.artifacts {
        put(&a.path, &a.contents)?;
    }
    Ok(written)
}

/// Per-trial closed-form bound: CSV `trial,bound_linear,bound_db`.
pub fn bound_table(cfg: &ExperimentConfig) -> Result<String> {
    let s = &cfg.scenario;
    let link = s.link();
    let mut out = String::from("trial,bound_linear,bound_db\n");
    for t in 0..cfg.trials {
        let users = trial_users(cfg, t)?;
        let b = upper_bound(&users, s.subarrays, s.nx * s.ny, &link)?;
        out.push_str(&format!("{t},{:e},{}\n", b.value, fmt_db(to_db(b.value))));
    }
    Ok(out)
}
