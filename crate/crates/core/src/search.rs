//! Backtracking line search for projected gradient ascent.
//!
//! Both optimizers step along the analytic gradient, project onto the box
//! `[-A/2, A/2]^2` and shrink the step until the Armijo-Goldstein sufficient
//! increase condition and any extra feasibility test (minimum spacing) hold:
//!
//! ```text
//! f(x_new) >= f(x) + xi * tau * ||grad f(x)||^2
//! ```

use serde::{Deserialize, Serialize};

use crate::arrays::RegionSpec;
use crate::error::{Error, Result};

/// Step-size and termination parameters shared by both algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Maximum outer iterations.
    pub max_iters: usize,
    /// Stop once the objective increment (linear scale) drops below this.
    pub tol: f64,
    /// Initial step size of every line search.
    pub init_step: f64,
    /// Step shrink factor `mu` in (0, 1).
    pub shrink: f64,
    /// Armijo parameter `xi` in (0, 1).
    pub armijo: f64,
    /// Maximum number of shrinks per line search.
    pub max_backtracks: usize,
}

impl OptimizerConfig {
    /// Defaults with the initial step set to ten wavelengths.
    pub fn for_wavelength(wavelength: f64) -> Self {
        Self {
            max_iters: 300,
            tol: 1e-5,
            init_step: 10.0 * wavelength,
            shrink: 0.5,
            armijo: 0.1,
            max_backtracks: 30,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInput(what));
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!("shrink factor {} not in (0, 1)", self.shrink));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad(format!("armijo parameter {} not in (0, 1)", self.armijo));
        }
        if !(self.init_step > 0.0 && self.init_step.is_finite()) {
            return bad(format!("initial step {}", self.init_step));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return bad(format!("tolerance {}", self.tol));
        }
        Ok(())
    }
}

/// Why an optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Objective increment fell below the tolerance.
    Converged,
    /// Iteration budget exhausted.
    MaxIterations,
    /// No step passed the line search within the shrink budget.
    Stationary,
}

/// Clamps every coordinate of an APV into `[-A/2, A/2]`.
///
/// The minimum-spacing constraint is left to the line search.
pub fn project_to_region(apv: &[f64], region: &RegionSpec) -> Vec<f64> {
    let h = region.half();
    apv.iter().map(|v| v.clamp(-h, h)).collect()
}

/// Accepted line-search step.
#[derive(Debug, Clone)]
pub(crate) struct Step<S> {
    pub point: Vec<f64>,
    pub value: f64,
    pub tau: f64,
    pub backtracks: usize,
    /// Evaluation payload of the accepted point.
    pub state: S,
}

/// Backtracking line search along `grad` from `x` (objective `fx`).
///
/// `project` maps a raw candidate onto the feasible box, `feasible` checks
/// the remaining constraints, and `eval` returns the objective and payload
/// (or `None` when the objective is undefined there, which counts as a
/// failed Armijo test). Returns `Err(tries)` when every step fails.
pub(crate) fn backtrack<S>(
    x: &[f64],
    fx: f64,
    grad: &[f64],
    cfg: &OptimizerConfig,
    project: impl Fn(Vec<f64>) -> Vec<f64>,
    feasible: impl Fn(&[f64]) -> bool,
    mut eval: impl FnMut(&[f64]) -> Option<(f64, S)>,
) -> std::result::Result<Step<S>, usize> {
    let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
    let mut tau = cfg.init_step;
    for j in 0..=cfg.max_backtracks {
        let raw: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi + tau * gi).collect();
        let cand = project(raw);
        if feasible(&cand) {
            if let Some((value, state)) = eval(&cand) {
                if value >= fx + cfg.armijo * tau * gnorm2 {
                    return Ok(Step { point: cand, value, tau, backtracks: j, state });
                }
            }
        }
        tau *= cfg.shrink;
    }
    Err(cfg.max_backtracks + 1)
}
