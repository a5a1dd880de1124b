//! Minibatch SGD on asynchronous batch collection:
//! `xᵏ⁺¹ = xᵏ − γ · compute_batch(S, xᵏ)`.
//!
//! Two reporting names share this loop. The flagship configuration picks
//! `(γ, S)` from the variance/iteration schedule below; the aligned
//! prior method is the same recursion raced under its own tuning, so the
//! code paths are deliberately identical and only the report label differs.
//!
//! Auto schedule for target accuracy `ε`, initial gap `δ⁰`, and mean
//! optimality spread `Δ* = f* − (1/m) Σ fᵢ*`:
//!
//! ```text
//! K = (12 δ⁰ L / ε) · max{ 1 − 1/S, 12 L_max δ⁰/(S ε), 4 L_max Δ*/(S ε) }
//! γ = min{ √S/√(L L_max K), 1/(L (1 − 1/S)), S ε/(4 L L_max Δ*) }
//! S* = ⌈(L_max/ε)(δ⁰ + Δ*)⌉
//! ```

use crate::collectors::compute_batch;
use crate::error::{Error, Result};
use crate::objectives::FiniteSumObjective;
use crate::rng::WorkerRngs;
use crate::simclock::{IterationRecord, RunTrace, WorkerTimeModel};
use crate::theory::{self, SgdSchedule};

use super::{Budgets, OptimizerReport, Recorder, RunOptions, StopReason};

/// Stepsize policy.
#[derive(Debug, Clone, Copy)]
pub enum SgdStepsize {
    Fixed(f64),
    /// Theory schedule; needs smoothness hints on the objective.
    Auto {
        eps: f64,
        delta0: f64,
        delta_star: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct SgdParams {
    pub stepsize: SgdStepsize,
    /// `None` defaults to the variance-optimal `S*` (auto stepsize only).
    pub batch_size: Option<usize>,
}

/// Parameters after applying defaults.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedSgdParams {
    pub gamma: f64,
    pub batch_size: usize,
    /// The full schedule when the stepsize was auto-derived.
    pub schedule: Option<SgdSchedule>,
}

impl SgdParams {
    pub fn resolve<O: FiniteSumObjective + ?Sized>(&self, obj: &O) -> Result<ResolvedSgdParams> {
        match self.stepsize {
            SgdStepsize::Fixed(gamma) => {
                if !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "stepsize must be positive and finite, got {gamma}"
                    )));
                }
                let batch_size = self.batch_size.ok_or_else(|| {
                    Error::InvalidParameter(
                        "batch size is required with a fixed stepsize".into(),
                    )
                })?;
                if batch_size == 0 {
                    return Err(Error::InvalidParameter("batch size must be >= 1".into()));
                }
                Ok(ResolvedSgdParams {
                    gamma,
                    batch_size,
                    schedule: None,
                })
            }
            SgdStepsize::Auto {
                eps,
                delta0,
                delta_star,
            } => {
                let hints = obj.smoothness().ok_or(Error::MissingSmoothnessHints)?;
                let batch_size = match self.batch_size {
                    Some(s) if s >= 1 => s,
                    Some(_) => {
                        return Err(Error::InvalidParameter("batch size must be >= 1".into()))
                    }
                    None => theory::sgd_optimal_batch(hints.l_max, eps, delta0, delta_star)?,
                };
                let schedule = theory::sgd_schedule(
                    delta0,
                    eps,
                    batch_size,
                    hints.l_minus,
                    hints.l_max,
                    delta_star,
                )?;
                Ok(ResolvedSgdParams {
                    gamma: schedule.gamma,
                    batch_size,
                    schedule: Some(schedule),
                })
            }
        }
    }
}

fn run_sgd_inner<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    params: &SgdParams,
    budgets: &Budgets,
    options: &RunOptions,
    seed: u64,
    algorithm: &str,
) -> Result<OptimizerReport> {
    let resolved = params.resolve(obj)?;
    let mut recorder = Recorder::new(budgets, options, obj.dim())?;
    let mut rngs = WorkerRngs::new(seed, model.n_workers());
    let mut trace = options
        .record_trace
        .then(|| RunTrace::new(model.n_workers()));

    let mut x = obj.initial_point();
    let mut k: u64 = 0;
    let mut time = 0.0f64;

    let mut stop = recorder
        .observe(obj, &x, 0, 0.0)?
        .unwrap_or(StopReason::IterationBudget);
    let mut stopped_early = !matches!(stop, StopReason::IterationBudget);
    while !stopped_early {
        if k >= budgets.max_iterations {
            stop = StopReason::IterationBudget;
            break;
        }
        if time >= budgets.max_sim_time {
            stop = StopReason::TimeBudget;
            break;
        }
        let res = compute_batch(
            obj,
            model,
            k as i64,
            resolved.batch_size,
            &x,
            &mut rngs,
        )?;
        for (xi, gi) in x.iter_mut().zip(&res.vector) {
            *xi -= resolved.gamma * gi;
        }
        if let Some(t) = trace.as_mut() {
            t.push(IterationRecord {
                k: k as i64,
                t_start: time,
                t_end: time + res.simulated_duration,
                dispatched: res.dispatched,
                completed: res.completed,
                oracle_calls: res.oracle_calls.clone(),
            });
        }
        time += res.simulated_duration;
        k += 1;
        if recorder.due(k as i64) {
            if let Some(s) = recorder.observe(obj, &x, k as i64, time)? {
                stop = s;
                stopped_early = true;
            }
        }
    }
    if !recorder.already_observed(k as i64) {
        if let Some(s) = recorder.observe(obj, &x, k as i64, time)? {
            stop = s;
        }
    }
    Ok(recorder.finish(algorithm, stop, k, time, trace, None))
}

/// Minibatch SGD with asynchronous batch collection.
pub fn run_freya_sgd<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    params: &SgdParams,
    budgets: &Budgets,
    options: &RunOptions,
    seed: u64,
) -> Result<OptimizerReport> {
    run_sgd_inner(obj, model, params, budgets, options, seed, "freya_sgd")
}

/// Same recursion and collection, reported under the aligned prior method's
/// name for comparison tables.
pub fn run_rennala_sgd<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    params: &SgdParams,
    budgets: &Budgets,
    options: &RunOptions,
    seed: u64,
) -> Result<OptimizerReport> {
    run_sgd_inner(obj, model, params, budgets, options, seed, "rennala_sgd")
}
