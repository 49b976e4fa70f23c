//! Zero-forcing digital beamforming and APV optimization.
//!
//! With the ZF precoder every user sees the same SINR
//! `gamma(t) = P / (sigma^2 tr(Z^-1))`, `Z = H^H H`, which is the objective
//! maximised over the antenna position vector.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrays::{spacing_ok, validate};
use crate::channel::{channel_jacobian, channel_matrix, ArrayGeometry, UserChannel};
use crate::closedform::{self, Bound};
use crate::error::{Error, Result};
use crate::linalg::hpd_inverse;
use crate::search::{backtrack, project_to_region, OptimizerConfig, Termination};
use crate::units::to_db;
use crate::{Complex64, Link};

/// Optimized (or evaluated) digital beamforming configuration.
#[derive(Debug, Clone)]
pub struct DigitalSolution {
    pub geometry: ArrayGeometry,
    /// ZF precoder `W`, `MN x K`.
    pub precoder: DMatrix<Complex64>,
    pub per_user_sinr: Vec<f64>,
    pub min_sinr: f64,
}

/// One row of the optimizer trace. Row 0 is the initial point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DigitalIter {
    pub iter: usize,
    pub objective: f64,
    pub step_size: f64,
    pub backtracks: usize,
}

#[derive(Debug, Clone)]
pub struct DigitalRun {
    pub solution: DigitalSolution,
    pub trace: Vec<DigitalIter>,
    pub termination: Termination,
    pub iterations: usize,
}

/// Result of the statistical (two-timescale) optimizer: one geometry
/// shared by all realizations and a ZF precoder per realization.
#[derive(Debug, Clone)]
pub struct StatisticalDigitalRun {
    pub geometry: ArrayGeometry,
    /// Averaged min-SINR at the returned geometry.
    pub objective: f64,
    pub precoders: Vec<DMatrix<Complex64>>,
    pub min_sinr: Vec<f64>,
    pub trace: Vec<DigitalIter>,
    pub termination: Termination,
    pub iterations: usize,
}

/// Per-user SINR `|h_k^H w_k|^2 / (sum_{j != k} |h_k^H w_j|^2 + sigma^2)`
/// for a given channel matrix.
pub fn sinr_from_channel(h: &DMatrix<Complex64>, w: &DMatrix<Complex64>, noise: f64) -> Result<Vec<f64>> {
    if w.nrows() != h.nrows() || w.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "precoder is {}x{}, channel is {}x{}",
            w.nrows(),
            w.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    let hw = h.adjoint() * w;
    Ok((0..h.ncols())
        .map(|k| {
            let signal = hw[(k, k)].norm_sqr();
            let interference: f64 = (0..h.ncols()).filter(|&j| j != k).map(|j| hw[(k, j)].norm_sqr()).sum();
            signal / (interference + noise)
        })
        .collect())
}

pub fn sinr_per_user(
    geom: &ArrayGeometry,
    w: &DMatrix<Complex64>,
    users: &[UserChannel],
    link: &Link,
) -> Result<Vec<f64>> {
    let h = channel_matrix(geom, users, link.wavelength)?;
    sinr_from_channel(&h, w, link.noise)
}

fn check_zf_shape(h: &DMatrix<Complex64>) -> Result<()> {
    if h.nrows() < h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "zero-forcing needs MN >= K, got MN = {} and K = {}",
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(())
}

/// ZF precoder `sqrt(P) H Z^-1 / sqrt(tr Z^-1)`, so that `||W||_F^2 = P`
/// and `H^H W = c I`.
pub fn zf_precoder(h: &DMatrix<Complex64>, power: f64) -> Result<DMatrix<Complex64>> {
    check_zf_shape(h)?;
    let z = h.adjoint() * h;
    let (z_inv, _) = hpd_inverse(&z)?;
    let trace = z_inv.trace().re;
    Ok(h * z_inv * Complex64::from((power / trace).sqrt()))
}

/// Common ZF SINR from a channel matrix.
pub fn zf_min_sinr_from_channel(h: &DMatrix<Complex64>, link: &Link) -> Result<f64> {
    check_zf_shape(h)?;
    let (z_inv, _) = hpd_inverse(&(h.adjoint() * h))?;
    Ok(link.snr() / z_inv.trace().re)
}

/// ZF min-SINR `P / (sigma^2 tr(Z^-1))` at a geometry.
pub fn zf_min_sinr(geom: &ArrayGeometry, users: &[UserChannel], link: &Link) -> Result<f64> {
    zf_min_sinr_from_channel(&channel_matrix(geom, users, link.wavelength)?, link)
}

/// Evaluates the ZF precoder and per-user SINRs at a geometry.
pub fn zf_solution(geom: &ArrayGeometry, users: &[UserChannel], link: &Link) -> Result<DigitalSolution> {
    let h = channel_matrix(geom, users, link.wavelength)?;
    let precoder = zf_precoder(&h, link.power)?;
    let per_user_sinr = sinr_from_channel(&h, &precoder, link.noise)?;
    let min_sinr = per_user_sinr.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DigitalSolution { geometry: geom.clone(), precoder, per_user_sinr, min_sinr })
}

/// Upper bound on the min-SINR and the power split attaining it.
pub fn min_sinr_upper_bound(users: &[UserChannel], m: usize, n: usize, link: &Link) -> Result<Bound> {
    closedform::upper_bound(users, m, n, link)
}

/// ZF min-SINR and its gradient w.r.t. the APV `(x_1, y_1, ..., x_M, y_M)`.
///
/// `d gamma / d x_m = P / (sigma^2 T^2) tr(Z^-1 dZ Z^-1)` with `T = tr Z^-1`
/// and `dZ = dH_m^H H_m + H_m^H dH_m`, where `H_m` holds the rows of
/// subarray `m` and `dH_m` their derivative w.r.t. the subarray shift.
pub(crate) fn value_and_gradient(
    geom: &ArrayGeometry,
    users: &[UserChannel],
    link: &Link,
) -> Result<(f64, Vec<f64>)> {
    let jac = channel_jacobian(geom, users, link.wavelength)?;
    let h = &jac.value;
    check_zf_shape(h)?;
    let (z_inv, _) = hpd_inverse(&(h.adjoint() * h))?;
    let trace = z_inv.trace().re;
    let z_inv2 = &z_inv * &z_inv;
    let scale = link.snr() / (trace * trace);
    let n = geom.elements_per_subarray();
    let mut grad = Vec::with_capacity(2 * geom.subarrays());
    for m in 0..geom.subarrays() {
        let hm = h.rows(m * n, n);
        for d in [&jac.dx, &jac.dy] {
            let dm = d.rows(m * n, n);
            let dz = dm.adjoint() * hm + hm.adjoint() * dm;
            grad.push(scale * (&z_inv2 * dz).trace().re);
        }
    }
    Ok((link.snr() / trace, grad))
}

/// Analytic gradient of the ZF min-SINR w.r.t. the APV.
pub fn grad_min_sinr_apv(geom: &ArrayGeometry, users: &[UserChannel], link: &Link) -> Result<Vec<f64>> {
    value_and_gradient(geom, users, link).map(|(_, g)| g)
}

fn mean_value(geom: &ArrayGeometry, realizations: &[Vec<UserChannel>], link: &Link) -> Result<f64> {
    let values: Vec<Result<f64>> = if realizations.len() > 1 {
        realizations.par_iter().map(|u| zf_min_sinr(geom, u, link)).collect()
    } else {
        realizations.iter().map(|u| zf_min_sinr(geom, u, link)).collect()
    };
    let mut sum = 0.0;
    for v in values {
        sum += v?;
    }
    Ok(sum / realizations.len() as f64)
}

fn mean_value_and_gradient(
    geom: &ArrayGeometry,
    realizations: &[Vec<UserChannel>],
    link: &Link,
) -> Result<(f64, Vec<f64>)> {
    let parts: Vec<Result<(f64, Vec<f64>)>> = if realizations.len() > 1 {
        realizations.par_iter().map(|u| value_and_gradient(geom, u, link)).collect()
    } else {
        realizations.iter().map(|u| value_and_gradient(geom, u, link)).collect()
    };
    let q = realizations.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![0.0; 2 * geom.subarrays()];
    for part in parts {
        let (v, g) = part?;
        value += v;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    grad.iter_mut().for_each(|g| *g /= q);
    Ok((value / q, grad))
}

struct Ascent {
    geometry: ArrayGeometry,
    trace: Vec<DigitalIter>,
    termination: Termination,
    iterations: usize,
}

/// Projected gradient ascent on the realization-averaged ZF min-SINR.
fn ascend(
    init: &ArrayGeometry,
    realizations: &[Vec<UserChannel>],
    link: &Link,
    cfg: &OptimizerConfig,
) -> Result<Ascent> {
    cfg.validate()?;
    if realizations.is_empty() {
        return Err(Error::InvalidInput("at least one channel realization required".into()));
    }
    let region = *init.region();
    if let Some(v) = validate(init, &region).first() {
        return Err(Error::InvalidInput(format!("initial geometry violates constraints: {v:?}")));
    }
    let mut geom = init.clone();
    let mut apv = geom.apv();
    let (mut value, mut grad) = mean_value_and_gradient(&geom, realizations, link)?;
    let mut trace = vec![DigitalIter { iter: 0, objective: value, step_size: 0.0, backtracks: 0 }];
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    for i in 1..=cfg.max_iters {
        iterations = i;
        let step = backtrack(
            &apv,
            value,
            &grad,
            cfg,
            |v| project_to_region(&v, &region),
            |v| spacing_ok(v, region.d_min),
            |cand| {
                let g = geom.with_apv(cand).ok()?;
                let v = mean_value(&g, realizations, link).ok()?;
                Some((v, g))
            },
        );
        let Ok(step) = step else {
            termination = Termination::Stationary;
            break;
        };
        let increment = step.value - value;
        trace.push(DigitalIter {
            iter: i,
            objective: step.value,
            step_size: step.tau,
            backtracks: step.backtracks,
        });
        // a step that passes the test without raising the objective (a
        // vanishing gradient) is not taken
        if step.value > value {
            geom = step.state;
            apv = step.point;
            value = step.value;
        }
        if increment < cfg.tol {
            termination = Termination::Converged;
            break;
        }
        if i < cfg.max_iters {
            grad = mean_value_and_gradient(&geom, realizations, link)?.1;
        }
    }
    Ok(Ascent { geometry: geom, trace, termination, iterations })
}

/// Algorithm: projected gradient ascent of the ZF min-SINR over the APV
/// with Armijo backtracking, for instantaneous CSI.
pub fn optimize_digital(
    init: &ArrayGeometry,
    users: &[UserChannel],
    link: &Link,
    cfg: &OptimizerConfig,
) -> Result<DigitalRun> {
    let run = ascend(init, std::slice::from_ref(&users.to_vec()), link, cfg)?;
    let solution = zf_solution(&run.geometry, users, link)?;
    Ok(DigitalRun { solution, trace: run.trace, termination: run.termination, iterations: run.iterations })
}

/// Two-timescale variant: one APV maximising the min-SINR averaged over
/// the given channel realizations, with a ZF precoder per realization.
pub fn optimize_digital_statistical(
    init: &ArrayGeometry,
    realizations: &[Vec<UserChannel>],
    link: &Link,
    cfg: &OptimizerConfig,
) -> Result<StatisticalDigitalRun> {
    let run = ascend(init, realizations, link, cfg)?;
    let mut precoders = Vec::with_capacity(realizations.len());
    let mut min_sinr = Vec::with_capacity(realizations.len());
    for users in realizations {
        let s = zf_solution(&run.geometry, users, link)?;
        precoders.push(s.precoder);
        min_sinr.push(s.min_sinr);
    }
    let objective = run.trace.last().map(|t| t.objective).unwrap_or(f64::NAN);
    Ok(StatisticalDigitalRun {
        geometry: run.geometry,
        objective,
        precoders,
        min_sinr,
        trace: run.trace,
        termination: run.termination,
        iterations: run.iterations,
    })
}

/// Trace as CSV with header `iter,objective_linear,objective_db,step_size,backtracks`.
pub fn trace_csv(trace: &[DigitalIter]) -> String {
    let mut out = String::from("iter,objective_linear,objective_db,step_size,backtracks\n");
    for r in trace {
        out.push_str(&format!(
            "{},{:e},{:.6},{:e},{}\n",
            r.iter,
            r.objective,
            to_db(r.objective),
            r.step_size,
            r.backtracks
        ));
    }
    out
}
