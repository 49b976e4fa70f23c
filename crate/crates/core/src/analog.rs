//! Constant-modulus analog beamforming with OFDMA power allocation.
//!
//! One RF chain drives all `MN` elements through phase shifters,
//! `w = exp(j phi) / sqrt(MN)`, and users are separated in frequency. With
//! the max-min power split every user reaches
//! `eta = (P / sigma^2) / sum_k 1 / |h_k^H w|^2`, maximised alternately over
//! the antenna positions and the phases.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::arrays::{spacing_ok, validate};
use crate::channel::{channel_jacobian, channel_matrix, ArrayGeometry, UserChannel};
use crate::closedform;
use crate::error::{Error, Result};
use crate::search::{backtrack, project_to_region, OptimizerConfig, Termination};
use crate::units::to_db;
use crate::{Complex64, Link};

#[derive(Debug, Clone)]
pub struct AnalogSolution {
    pub geometry: ArrayGeometry,
    /// Phase-shifter settings in `[0, 2pi)`.
    pub phases: Vec<f64>,
    /// Per-user power (mW), summing to `P`.
    pub power: Vec<f64>,
    pub per_user_snr: Vec<f64>,
    pub min_snr: f64,
}

/// One row of the alternating-optimization trace. Row 0 is the start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalogIter {
    pub iter: usize,
    /// Objective after both half-steps.
    pub objective: f64,
    /// Objective after the position half-step only.
    pub after_apv: f64,
    pub apv_backtracks: usize,
    /// Summed over realizations.
    pub phase_backtracks: usize,
    /// `max_n |sqrt(MN) |w_n| - 1|` after the phase update.
    pub modulus_error: f64,
}

#[derive(Debug, Clone)]
pub struct AnalogRun {
    pub solution: AnalogSolution,
    pub trace: Vec<AnalogIter>,
    pub termination: Termination,
    pub iterations: usize,
}

/// Statistical variant: shared geometry, per-realization phases and powers.
#[derive(Debug, Clone)]
pub struct StatisticalAnalogRun {
    pub geometry: ArrayGeometry,
    pub objective: f64,
    pub phases: Vec<Vec<f64>>,
    pub power: Vec<Vec<f64>>,
    pub min_snr: Vec<f64>,
    pub trace: Vec<AnalogIter>,
    pub termination: Termination,
    pub iterations: usize,
}

/// `exp(j phi) / sqrt(MN)`.
pub fn beamformer(phases: &[f64]) -> DVector<Complex64> {
    let amp = 1.0 / (phases.len() as f64).sqrt();
    DVector::from_iterator(phases.len(), phases.iter().map(|&p| Complex64::from_polar(amp, p)))
}

/// Beamforming gains `|h_k^H w|^2`, one per column of `h`.
pub fn beam_gains(h: &DMatrix<Complex64>, w: &DVector<Complex64>) -> Result<Vec<f64>> {
    if h.nrows() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "beamformer has {} entries, channel has {} rows",
            w.len(),
            h.nrows()
        )));
    }
    Ok(h.column_iter().map(|c| c.dotc(w).norm_sqr()).collect())
}

/// Per-user SNR `|h_k^H w|^2 p_k / sigma^2`.
pub fn snr_per_user(
    geom: &ArrayGeometry,
    phases: &[f64],
    power: &[f64],
    users: &[UserChannel],
    link: &Link,
) -> Result<Vec<f64>> {
    if power.len() != users.len() {
        return Err(Error::DimensionMismatch(format!("{} powers for {} users", power.len(), users.len())));
    }
    let h = channel_matrix(geom, users, link.wavelength)?;
    let gains = beam_gains(&h, &beamformer(phases))?;
    Ok(gains.iter().zip(power).map(|(g, p)| g * p / link.noise).collect())
}

fn check_gains(gains: &[f64]) -> Result<()> {
    match gains.iter().position(|g| !(*g > 0.0 && g.is_finite())) {
        Some(user) => Err(Error::ZeroGain { user }),
        None => Ok(()),
    }
}

/// Max-min power split `p_k = P / (g_k sum_j 1/g_j)` for given gains.
pub fn power_allocation(gains: &[f64], power: f64) -> Result<Vec<f64>> {
    check_gains(gains)?;
    let inv_sum: f64 = gains.iter().map(|g| 1.0 / g).sum();
    Ok(gains.iter().map(|g| power / (g * inv_sum)).collect())
}

pub fn optimal_power_allocation(
    geom: &ArrayGeometry,
    phases: &[f64],
    users: &[UserChannel],
    link: &Link,
) -> Result<Vec<f64>> {
    let h = channel_matrix(geom, users, link.wavelength)?;
    power_allocation(&beam_gains(&h, &beamformer(phases))?, link.power)
}

/// Equalised SNR `(P / sigma^2) / sum_k 1/g_k`.
pub fn min_snr_from_gains(gains: &[f64], link: &Link) -> Result<f64> {
    check_gains(gains)?;
    Ok(link.snr() / gains.iter().map(|g| 1.0 / g).sum::<f64>())
}

fn min_snr_from_channel(h: &DMatrix<Complex64>, phases: &[f64], link: &Link) -> Result<f64> {
    min_snr_from_gains(&beam_gains(h, &beamformer(phases))?, link)
}

pub fn min_snr(geom: &ArrayGeometry, phases: &[f64], users: &[UserChannel], link: &Link) -> Result<f64> {
    min_snr_from_channel(&channel_matrix(geom, users, link.wavelength)?, phases, link)
}

/// Upper bound on the min-SNR; the same closed form as the digital bound.
pub fn min_snr_upper_bound(users: &[UserChannel], m: usize, n: usize, link: &Link) -> Result<f64> {
    closedform::upper_bound(users, m, n, link).map(|b| b.value)
}

/// `d eta / d g_k = (P / sigma^2) g_k^-2 / S^2`, `S = sum_j 1/g_j`.
fn gain_sensitivities(gains: &[f64], link: &Link) -> Result<Vec<f64>> {
    check_gains(gains)?;
    let s: f64 = gains.iter().map(|g| 1.0 / g).sum();
    let scale = link.snr() / (s * s);
    Ok(gains.iter().map(|g| scale / (g * g)).collect())
}

/// Min-SNR and its gradient w.r.t. the APV at fixed phases.
pub(crate) fn value_and_apv_gradient(
    geom: &ArrayGeometry,
    phases: &[f64],
    users: &[UserChannel],
    link: &Link,
) -> Result<(f64, Vec<f64>)> {
    let jac = channel_jacobian(geom, users, link.wavelength)?;
    let w = beamformer(phases);
    let inner: Vec<Complex64> = jac.value.column_iter().map(|c| c.dotc(&w)).collect();
    let gains: Vec<f64> = inner.iter().map(|c| c.norm_sqr()).collect();
    let value = min_snr_from_gains(&gains, link)?;
    let sens = gain_sensitivities(&gains, link)?;
    let n = geom.elements_per_subarray();
    let mut grad = Vec::with_capacity(2 * geom.subarrays());
    for m in 0..geom.subarrays() {
        let wm = w.rows(m * n, n);
        for d in [&jac.dx, &jac.dy] {
            let mut acc = 0.0;
            for (k, c) in inner.iter().enumerate() {
                let dc = d.view((m * n, k), (n, 1)).dotc(&wm);
                acc += sens[k] * 2.0 * (c.conj() * dc).re;
            }
            grad.push(acc);
        }
    }
    Ok((value, grad))
}

/// Min-SNR gradient w.r.t. the phases, for a fixed channel matrix.
fn phase_gradient_from_channel(h: &DMatrix<Complex64>, phases: &[f64], link: &Link) -> Result<Vec<f64>> {
    let w = beamformer(phases);
    let inner: Vec<Complex64> = h.column_iter().map(|c| c.dotc(&w)).collect();
    let gains: Vec<f64> = inner.iter().map(|c| c.norm_sqr()).collect();
    let sens = gain_sensitivities(&gains, link)?;
    let j = Complex64::i();
    Ok((0..phases.len())
        .map(|q| {
            inner
                .iter()
                .enumerate()
                .map(|(k, c)| sens[k] * 2.0 * (c.conj() * j * h[(q, k)].conj() * w[q]).re)
                .sum()
        })
        .collect())
}

/// Analytic gradient of the min-SNR w.r.t. the APV.
pub fn grad_min_snr_apv(
    geom: &ArrayGeometry,
    phases: &[f64],
    users: &[UserChannel],
    link: &Link,
) -> Result<Vec<f64>> {
    value_and_apv_gradient(geom, phases, users, link).map(|(_, g)| g)
}

/// Analytic gradient of the min-SNR w.r.t. the phase vector.
pub fn grad_min_snr_phase(
    geom: &ArrayGeometry,
    phases: &[f64],
    users: &[UserChannel],
    link: &Link,
) -> Result<Vec<f64>> {
    phase_gradient_from_channel(&channel_matrix(geom, users, link.wavelength)?, phases, link)
}

/// Initial phases and the entries whose angle was undefined (set to 0).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseInit {
    pub phases: Vec<f64>,
    pub undefined: Vec<usize>,
}

/// Entrywise angle of `sum_k h_k / ||h_k||`, the direction that phase-aligns
/// `w` with every user's normalised channel at once.
pub fn init_phases(geom: &ArrayGeometry, users: &[UserChannel], wavelength: f64) -> Result<PhaseInit> {
    if users.is_empty() {
        return Err(Error::DimensionMismatch("at least one user required".into()));
    }
    let h = channel_matrix(geom, users, wavelength)?;
    let mut sum = DVector::<Complex64>::zeros(h.nrows());
    for (k, col) in h.column_iter().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ZeroChannel { user: k });
        }
        sum += col / Complex64::from(norm);
    }
    let mut undefined = Vec::new();
    let phases = sum
        .iter()
        .enumerate()
        .map(|(q, z)| {
            if *z == Complex64::new(0.0, 0.0) {
                undefined.push(q);
                0.0
            } else {
                z.arg()
            }
        })
        .collect();
    Ok(PhaseInit { phases, undefined })
}

fn wrap_phases(phases: &[f64]) -> Vec<f64> {
    use std::f64::consts::TAU;
    phases
        .iter()
        .map(|p| {
            let r = p.rem_euclid(TAU);
            if r >= TAU {
                0.0
            } else {
                r
            }
        })
        .collect()
}

/// `max_n |sqrt(MN) |w_n| - 1|` of the beamformer built from `phases`.
pub fn modulus_error(phases: &[f64]) -> f64 {
    let scale = (phases.len() as f64).sqrt();
    beamformer(phases).iter().map(|w| (scale * w.norm() - 1.0).abs()).fold(0.0, f64::max)
}

fn collect_ordered<T: Send, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    if n > 1 {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

struct Alternation {
    geometry: ArrayGeometry,
    phases: Vec<Vec<f64>>,
    trace: Vec<AnalogIter>,
    termination: Termination,
    iterations: usize,
}

/// Alternating ascent: a projected-gradient APV step on the
/// realization-averaged min-SNR, then a gradient step on each realization's
/// phases. With `move_apv = false` only the phases are optimised.
///
/// A half-step whose line search exhausts its shrinks leaves its variable
/// unchanged; the run stops as stationary only when no half-step moves.
fn alternate(
    init: &ArrayGeometry,
    realizations: &[Vec<UserChannel>],
    link: &Link,
    cfg: &OptimizerConfig,
    move_apv: bool,
) -> Result<Alternation> {
    cfg.validate()?;
    if realizations.is_empty() {
        return Err(Error::InvalidInput("at least one channel realization required".into()));
    }
    let region = *init.region();
    if move_apv {
        if let Some(v) = validate(init, &region).first() {
            return Err(Error::InvalidInput(format!("initial geometry violates constraints: {v:?}")));
        }
    }
    let q_count = realizations.len();
    let mut geom = init.clone();
    let mut phases: Vec<Vec<f64>> = realizations
        .iter()
        .map(|u| init_phases(&geom, u, link.wavelength).map(|p| p.phases))
        .collect::<Result<_>>()?;
    let mut values: Vec<f64> =
        realizations.iter().zip(&phases).map(|(u, p)| min_snr(&geom, p, u, link)).collect::<Result<_>>()?;
    let mut objective = mean(&values);
    let mut trace = vec![AnalogIter {
        iter: 0,
        objective,
        after_apv: objective,
        apv_backtracks: 0,
        phase_backtracks: 0,
        modulus_error: phases.iter().map(|p| modulus_error(p)).fold(0.0, f64::max),
    }];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    for i in 1..=cfg.max_iters {
        iterations = i;
        let start = objective;

        // "moved" means the line search accepted a step
        let mut apv_moved = false;
        let mut apv_backtracks = 0;
        if move_apv {
            let parts = collect_ordered(q_count, |q| {
                value_and_apv_gradient(&geom, &phases[q], &realizations[q], link)
            });
            let mut grad = vec![0.0; 2 * geom.subarrays()];
            for part in parts {
                let (_, g) = part?;
                grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            }
            grad.iter_mut().for_each(|g| *g /= q_count as f64);
            let apv = geom.apv();
            let step = backtrack(
                &apv,
                objective,
                &grad,
                cfg,
                |v| project_to_region(&v, &region),
                |v| spacing_ok(v, region.d_min),
                |cand| {
                    let g = geom.with_apv(cand).ok()?;
                    let vals = collect_ordered(q_count, |q| min_snr(&g, &phases[q], &realizations[q], link));
                    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>().ok()?;
                    Some((mean(&vals), (g, vals)))
                },
            );
            match step {
                Ok(step) => {
                    apv_moved = true;
                    apv_backtracks = step.backtracks;
                    if step.value > objective {
                        (geom, values) = step.state;
                        objective = step.value;
                    }
                }
                Err(tries) => apv_backtracks = tries,
            }
        }
        let after_apv = objective;

        let phase_steps = collect_ordered(q_count, |q| -> Result<_> {
            let h = channel_matrix(&geom, &realizations[q], link.wavelength)?;
            let grad = phase_gradient_from_channel(&h, &phases[q], link)?;
            let step = backtrack(
                &phases[q],
                values[q],
                &grad,
                cfg,
                |v| v,
                |_| true,
                |cand| min_snr_from_channel(&h, cand, link).ok().map(|v| (v, ())),
            );
            Ok(step.map(|s| (s.point, s.value, s.backtracks)))
        });
        let mut phase_moved = false;
        let mut phase_backtracks = 0;
        for (q, step) in phase_steps.into_iter().enumerate() {
            match step? {
                Ok((p, v, b)) => {
                    phase_moved = true;
                    phase_backtracks += b;
                    if v > values[q] {
                        phases[q] = p;
                        values[q] = v;
                    }
                }
                Err(tries) => phase_backtracks += tries,
            }
        }
        if phase_moved {
            objective = mean(&values);
        }

        if !apv_moved && !phase_moved {
            termination = Termination::Stationary;
            break;
        }
        trace.push(AnalogIter {
            iter: i,
            objective,
            after_apv,
            apv_backtracks,
            phase_backtracks,
            modulus_error: phases.iter().map(|p| modulus_error(p)).fold(0.0, f64::max),
        });
        if objective - start < cfg.tol {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(Alternation { geometry: geom, phases, trace, termination, iterations })
}

fn solution(
    geom: ArrayGeometry,
    phases: &[f64],
    users: &[UserChannel],
    link: &Link,
) -> Result<AnalogSolution> {
    let power = optimal_power_allocation(&geom, phases, users, link)?;
    let per_user_snr = snr_per_user(&geom, phases, &power, users, link)?;
    let min_snr = per_user_snr.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AnalogSolution { geometry: geom, phases: wrap_phases(phases), power, per_user_snr, min_snr })
}

fn single_run(
    init: &ArrayGeometry,
    users: &[UserChannel],
    link: &Link,
    cfg: &OptimizerConfig,
    move_apv: bool,
) -> Result<AnalogRun> {
    let run = alternate(init, std::slice::from_ref(&users.to_vec()), link, cfg, move_apv)?;
    Ok(AnalogRun {
        solution: solution(run.geometry, &run.phases[0], users, link)?,
        trace: run.trace,
        termination: run.termination,
        iterations: run.iterations,
    })
}

/// Alternating optimization of the APV and the phases for instantaneous CSI,
/// with max-min power allocation at the end.
pub fn optimize_analog(
    init: &ArrayGeometry,
    users: &[UserChannel],
    link: &Link,
    cfg: &OptimizerConfig,
) -> Result<AnalogRun> {
    single_run(init, users, link, cfg, true)
}

/// Phase-only optimization on a fixed geometry (fixed-array benchmarks).
pub fn optimize_phases(
    geom: &ArrayGeometry,
    users: &[UserChannel],
    link: &Link,
    cfg: &OptimizerConfig,
) -> Result<AnalogRun> {
    single_run(geom, users, link, cfg, false)
}

/// Two-timescale variant: APV steps follow the realization-averaged
/// gradient while phases and powers are tuned per realization.
pub fn optimize_analog_statistical(
    init: &ArrayGeometry,
    realizations: &[Vec<UserChannel>],
    link: &Link,
    cfg: &OptimizerConfig,
) -> Result<StatisticalAnalogRun> {
    let run = alternate(init, realizations, link, cfg, true)?;
    let mut phases = Vec::with_capacity(realizations.len());
    let mut power = Vec::with_capacity(realizations.len());
    let mut min_snr = Vec::with_capacity(realizations.len());
    for (users, p) in realizations.iter().zip(&run.phases) {
        let s = solution(run.geometry.clone(), p, users, link)?;
        phases.push(s.phases);
        power.push(s.power);
        min_snr.push(s.min_snr);
    }
    let objective = run.trace.last().map(|t| t.objective).unwrap_or(f64::NAN);
    Ok(StatisticalAnalogRun {
        geometry: run.geometry,
        objective,
        phases,
        power,
        min_snr,
        trace: run.trace,
        termination: run.termination,
        iterations: run.iterations,
    })
}

/// Trace as CSV with header
/// `iter,objective_linear,objective_db,apv_backtracks,phase_backtracks`.
pub fn trace_csv(trace: &[AnalogIter]) -> String {
    let mut out = String::from("iter,objective_linear,objective_db,apv_backtracks,phase_backtracks\n");
    for r in trace {
        out.push_str(&format!(
            "{},{:e},{:.6},{},{}\n",
            r.iter,
            r.objective,
            to_db(r.objective),
            r.apv_backtracks,
            r.phase_backtracks
        ));
    }
    out
}
