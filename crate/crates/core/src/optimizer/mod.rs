//! Search over measurement parameters for the lowest critical visibility:
//! Nelder-Mead descent from random starts, run in parallel.

mod nelder_mead;

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::born::NoiseModel;
use crate::error::{Error, Result};
use crate::lhv::critical_visibility;
use crate::observables::{MeasurementFamily, ParameterLayout, Sharing};
use crate::states::{ghz_state, PureState};

pub use nelder_mead::{minimize, NelderMeadOutcome};

/// Side of the initial simplex, in radians.
pub const INITIAL_STEP: f64 = 0.5;

/// Objective assigned to settings whose LP the solver could not certify;
/// worse than any visibility.
pub const FAILED_EVAL_VALUE: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationConfig {
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    /// Convergence threshold on the spread of values across the simplex.
    pub tolerance: f64,
    pub seed: u64,
    pub sharing: Sharing,
}

impl OptimizationConfig {
    /// Default evaluation budget per restart for the given setting count.
    pub fn default_evals(settings: usize) -> usize {
        if settings >= 3 {
            2000
        } else {
            5000
        }
    }

    pub fn new(settings: usize, sharing: Sharing) -> Self {
        OptimizationConfig {
            restarts: 10,
            max_evals: Self::default_evals(settings),
            tolerance: 1e-9,
            seed: 0,
            sharing,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::domain("at least one restart is required"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    /// Whether this restart began from a supplied point rather than a
    /// random one.
    pub seeded: bool,
    pub initial: Vec<f64>,
    pub v_crit: f64,
    pub params: Vec<f64>,
    pub evals: usize,
    /// Evaluations at which the LP could not be solved; they score
    /// [`FAILED_EVAL_VALUE`].
    pub failed_evals: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub v_crit: f64,
    /// Parameters of the best restart, unwrapped.
    pub params: Vec<f64>,
    pub traces: Vec<RestartTrace>,
    /// Total objective evaluations (one LP solve each).
    pub evals: usize,
}

impl OptimizationResult {
    /// Best parameters reduced to `[0, 2pi)`.
    pub fn wrapped_params(&self) -> Vec<f64> {
        wrap_angles(&self.params)
    }
}

pub fn wrap_angles(params: &[f64]) -> Vec<f64> {
    params.iter().map(|p| p.rem_euclid(TAU)).collect()
}

/// Uniform start in `[0, 2pi)^dim` for restart `restart`; each restart has
/// its own stream so adding restarts never changes earlier ones.
pub fn random_start(seed: u64, restart: usize, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect()
}

fn run_restart(
    state: &PureState,
    layout: &ParameterLayout,
    noise: NoiseModel,
    cfg: &OptimizationConfig,
    restart: usize,
    start: Option<&[f64]>,
) -> Result<RestartTrace> {
    let initial = match start {
        Some(x) => x.to_vec(),
        None => random_start(cfg.seed, restart, layout.dimension()),
    };
    let mut failed_evals = 0;
    let objective = |x: &[f64]| -> Result<f64> {
        let bank = layout.bank(x)?;
        match critical_visibility(state, &bank, noise) {
            Ok(r) => Ok(r.v_crit),
            Err(Error::Solver { .. }) => {
                failed_evals += 1;
                Ok(FAILED_EVAL_VALUE)
            }
            Err(e) => Err(e),
        }
    };
    let out = minimize(objective, &initial, INITIAL_STEP, cfg.max_evals, cfg.tolerance)?;
    if out.value >= FAILED_EVAL_VALUE {
        return Err(Error::contract(format!("restart {restart}: the solver failed at every point visited")));
    }
    Ok(RestartTrace {
        restart,
        seeded: start.is_some(),
        initial,
        v_crit: out.value,
        params: out.x,
        evals: out.evals,
        failed_evals,
        converged: out.converged,
    })
}

/// Minimizes the critical visibility of `state` over the parameters of
/// `family` with `settings` settings per party, from `cfg.restarts` random
/// starts.
pub fn optimize_settings(
    state: &PureState,
    family: MeasurementFamily,
    settings: usize,
    noise: NoiseModel,
    cfg: &OptimizationConfig,
) -> Result<OptimizationResult> {
    optimize_settings_from(state, family, settings, noise, cfg, &[], &|_| {})
}

/// Like [`optimize_settings`], with extra starting points run after the
/// random restarts and a callback invoked as each restart completes.
///
/// Restarts run in parallel; the callback may fire in any order but the
/// result lists traces by restart index and breaks ties in value by the
/// lower index, so it does not depend on scheduling.
pub fn optimize_settings_from(
    state: &PureState,
    family: MeasurementFamily,
    settings: usize,
    noise: NoiseModel,
    cfg: &OptimizationConfig,
    extra_starts: &[Vec<f64>],
    progress: &(dyn Fn(&RestartTrace) + Sync),
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let layout = ParameterLayout::new(family, settings, cfg.sharing)?;
    if let Some(bad) = extra_starts.iter().find(|x| x.len() != layout.dimension()) {
        return Err(Error::contract(format!(
            "starting point has {} parameters, layout needs {}",
            bad.len(),
            layout.dimension()
        )));
    }
    let jobs: Vec<(usize, Option<&[f64]>)> = (0..cfg.restarts)
        .map(|r| (r, None))
        .chain(extra_starts.iter().enumerate().map(|(i, x)| (cfg.restarts + i, Some(x.as_slice()))))
        .collect();
    let traces: Vec<RestartTrace> = jobs
        .into_par_iter()
        .map(|(restart, start)| {
            let trace = run_restart(state, &layout, noise, cfg, restart, start)?;
            progress(&trace);
            Ok(trace)
        })
        .collect::<Result<_>>()?;

    let best = traces
        .iter()
        .min_by(|a, b| a.v_crit.total_cmp(&b.v_crit).then(a.restart.cmp(&b.restart)))
        .expect("at least one restart");
    Ok(OptimizationResult {
        v_crit: best.v_crit,
        params: best.params.clone(),
        evals: traces.iter().map(|t| t.evals).sum(),
        traces,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub alpha_deg: f64,
    /// `None` when the optimization at this angle failed.
    pub v_crit: Option<f64>,
    pub params: Vec<f64>,
    pub evals: usize,
    pub error: Option<String>,
}

/// Optimizes every generalized GHZ state on the grid (angles in degrees).
/// Each point after the first also restarts from the previous point's
/// optimum. Failures are recorded in their row and the scan moves on.
pub fn scan_alpha(
    alpha_grid_deg: &[f64],
    family: MeasurementFamily,
    settings: usize,
    noise: NoiseModel,
    cfg: &OptimizationConfig,
    progress: &(dyn Fn(f64, &RestartTrace) + Sync),
) -> Result<Vec<ScanRow>> {
    if alpha_grid_deg.is_empty() {
        return Err(Error::domain("alpha grid is empty"));
    }
    let mut rows = Vec::with_capacity(alpha_grid_deg.len());
    let mut previous: Option<Vec<f64>> = None;
    for &alpha in alpha_grid_deg {
        let state = ghz_state(alpha.to_radians());
        let extra: Vec<Vec<f64>> = previous.iter().cloned().collect();
        let report = |t: &RestartTrace| progress(alpha, t);
        match optimize_settings_from(&state, family, settings, noise, cfg, &extra, &report) {
            Ok(res) => {
                previous = Some(res.params.clone());
                rows.push(ScanRow {
                    alpha_deg: alpha,
                    v_crit: Some(res.v_crit),
                    params: res.wrapped_params(),
                    evals: res.evals,
                    error: None,
                });
            }
            Err(e) => rows.push(ScanRow {
                alpha_deg: alpha,
                v_crit: None,
                params: Vec::new(),
                evals: 0,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(rows)
}
