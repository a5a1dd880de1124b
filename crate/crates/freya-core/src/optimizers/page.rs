//! Variance-reduced loop on asynchronous collectors.
//!
//! The recursion keeps a gradient estimate `g` alongside the iterate:
//!
//! ```text
//! xᵏ⁺¹ = xᵏ − γ gᵏ
//! cᵏ ~ Bernoulli(p):   heads → gᵏ⁺¹ = ∇f(xᵏ⁺¹)            (full collection)
//!                      tails → gᵏ⁺¹ = gᵏ + (1/S) Σ_{j∈𝒮} (∇fⱼ(xᵏ⁺¹) − ∇fⱼ(xᵏ))
//! ```
//!
//! with `g⁰ = ∇f(x⁰)` collected up front (charged as iteration `−1`). Every
//! phase runs on the asynchronous worker pool, so the time a step costs is
//! the collector's simulated duration, not a per-worker sum.
//!
//! The Bernoulli coin has its own RNG stream: changing `S`, the sampler, or
//! the worker pool never perturbs the refresh schedule, which makes
//! controlled comparisons possible.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::collectors::{
    compute_batch_difference, compute_batch_difference_any_sampling, compute_gradient,
    CollectionResult, PreparedSampler, SamplerKind,
};
use crate::error::{Error, Result};
use crate::objectives::FiniteSumObjective;
use crate::rng::{self, WorkerRngs};
use crate::simclock::{IterationRecord, RunTrace, WorkerTimeModel};
use crate::theory;

use super::{Budgets, OptimizerReport, Recorder, RunOptions, StopReason};

/// Tunable knobs; `None` means "use the theory default".
#[derive(Debug, Clone, Copy)]
pub struct FreyaPageParams {
    /// Stepsize; defaults to the sampler's theoretical stepsize, which
    /// needs smoothness hints.
    pub gamma: Option<f64>,
    /// Minibatch size `S`; defaults to `⌈√m⌉`.
    pub batch_size: Option<usize>,
    /// Full-refresh probability `p`; defaults to `1/√m`.
    pub refresh_prob: Option<f64>,
    pub sampler: SamplerKind,
}

impl Default for FreyaPageParams {
    fn default() -> Self {
        FreyaPageParams {
            gamma: None,
            batch_size: None,
            refresh_prob: None,
            sampler: SamplerKind::Uniform,
        }
    }
}

/// Fully-determined parameters after applying defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPageParams {
    pub gamma: f64,
    pub batch_size: usize,
    pub refresh_prob: f64,
}

impl FreyaPageParams {
    /// Apply the defaults against a concrete objective.
    pub fn resolve<O: FiniteSumObjective + ?Sized>(&self, obj: &O) -> Result<ResolvedPageParams> {
        let m = obj.num_components();
        let auto = theory::large_scale_params(m)?;
        let batch_size = self.batch_size.unwrap_or(auto.s);
        if batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        if self.sampler == SamplerKind::Nice && batch_size > m {
            return Err(Error::InvalidParameter(format!(
                "nice sampling needs batch size <= m = {m}, got {batch_size}"
            )));
        }
        let refresh_prob = self.refresh_prob.unwrap_or(auto.p);
        if !(refresh_prob > 0.0 && refresh_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "refresh probability must lie in (0, 1], got {refresh_prob}"
            )));
        }
        let gamma = match self.gamma {
            Some(g) => {
                if !(g > 0.0) || !g.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "stepsize must be positive and finite, got {g}"
                    )));
                }
                g
            }
            None => {
                let hints = obj.smoothness().ok_or(Error::MissingSmoothnessHints)?;
                match self.sampler {
                    SamplerKind::Uniform => theory::page_stepsize(
                        refresh_prob,
                        batch_size,
                        hints.l_minus,
                        hints.l_pm,
                    )?,
                    SamplerKind::Nice => theory::nice_stepsize(
                        refresh_prob,
                        batch_size,
                        m,
                        hints.l_minus,
                        hints.l_pm,
                    )?,
                    SamplerKind::Importance => theory::importance_stepsize(
                        refresh_prob,
                        batch_size,
                        hints.l_minus,
                        hints.l_bar,
                    )?,
                }
            }
        };
        Ok(ResolvedPageParams {
            gamma,
            batch_size,
            refresh_prob,
        })
    }
}

/// Live optimizer state.
#[derive(Debug, Clone)]
pub struct PageState {
    pub x: Vec<f64>,
    /// Gradient estimate `gᵏ` (exact right after a refresh).
    pub g: Vec<f64>,
    /// Completed steps.
    pub k: i64,
    /// Accumulated simulated seconds, initialization included.
    pub time: f64,
}

/// A stepping handle exposing the per-step mechanics (tests drive the coin
/// by hand; [`run_freya_page`] drives it from the coin stream).
pub struct FreyaPage<'a, O: FiniteSumObjective + ?Sized> {
    obj: &'a O,
    model: &'a WorkerTimeModel,
    resolved: ResolvedPageParams,
    sampler: PreparedSampler,
    state: PageState,
    init: CollectionResult,
    rngs: WorkerRngs,
    coin_rng: ChaCha8Rng,
    sampler_rng: ChaCha8Rng,
}

impl<'a, O: FiniteSumObjective + ?Sized> FreyaPage<'a, O> {
    /// Collect `g⁰ = ∇f(x⁰)` (iteration index `−1`) and stand ready to step.
    pub fn new(
        obj: &'a O,
        model: &'a WorkerTimeModel,
        params: &FreyaPageParams,
        seed: u64,
    ) -> Result<Self> {
        let resolved = params.resolve(obj)?;
        let sampler = PreparedSampler::prepare(params.sampler, obj)?;
        let mut rngs = WorkerRngs::new(seed, model.n_workers());
        let x0 = obj.initial_point();
        let init = compute_gradient(obj, model, -1, &x0, &mut rngs)?;
        let state = PageState {
            x: x0,
            g: init.vector.clone(),
            k: 0,
            time: init.simulated_duration,
        };
        Ok(FreyaPage {
            obj,
            model,
            resolved,
            sampler,
            state,
            init,
            rngs,
            coin_rng: rng::coin_stream(seed),
            sampler_rng: rng::sampler_stream(seed),
        })
    }

    pub fn state(&self) -> &PageState {
        &self.state
    }

    pub fn resolved_params(&self) -> &ResolvedPageParams {
        &self.resolved
    }

    /// The initialization collection (`g⁰`).
    pub fn init_collection(&self) -> &CollectionResult {
        &self.init
    }

    /// One step with the coin drawn from the coin stream. Returns the coin
    /// and the phase's collection.
    pub fn step(&mut self) -> Result<(bool, CollectionResult)> {
        let heads = self.coin_rng.gen_bool(self.resolved.refresh_prob);
        let res = self.step_with_coin(heads)?;
        Ok((heads, res))
    }

    /// One step with the coin forced, for controlled experiments.
    pub fn step_with_coin(&mut self, heads: bool) -> Result<CollectionResult> {
        let gamma = self.resolved.gamma;
        let x_new: Vec<f64> = self
            .state
            .x
            .iter()
            .zip(&self.state.g)
            .map(|(xi, gi)| xi - gamma * gi)
            .collect();
        let k = self.state.k;
        let result = if heads {
            let res = compute_gradient(self.obj, self.model, k, &x_new, &mut self.rngs)?;
            self.state.g.copy_from_slice(&res.vector);
            res
        } else {
            let res = match self.sampler.kind() {
                SamplerKind::Uniform => compute_batch_difference(
                    self.obj,
                    self.model,
                    k,
                    self.resolved.batch_size,
                    &x_new,
                    &self.state.x,
                    &mut self.rngs,
                )?,
                SamplerKind::Nice | SamplerKind::Importance => {
                    let multiset = self
                        .sampler
                        .draw_multiset(self.resolved.batch_size, &mut self.sampler_rng)?;
                    compute_batch_difference_any_sampling(
                        self.obj,
                        self.model,
                        k,
                        &multiset,
                        &x_new,
                        &self.state.x,
                        &mut self.rngs,
                    )?
                }
            };
            for (gi, di) in self.state.g.iter_mut().zip(&res.vector) {
                *gi += di;
            }
            res
        };
        self.state.x = x_new;
        self.state.k += 1;
        self.state.time += result.simulated_duration;
        Ok(result)
    }
}

fn trace_record(k: i64, t_start: f64, t_end: f64, res: &CollectionResult) -> IterationRecord {
    IterationRecord {
        k,
        t_start,
        t_end,
        dispatched: res.dispatched,
        completed: res.completed,
        oracle_calls: res.oracle_calls.clone(),
    }
}

/// Full optimization run.
pub fn run_freya_page<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    params: &FreyaPageParams,
    budgets: &Budgets,
    options: &RunOptions,
    seed: u64,
) -> Result<OptimizerReport> {
    let mut recorder = Recorder::new(budgets, options, obj.dim())?;
    let mut driver = FreyaPage::new(obj, model, params, seed)?;
    let mut trace = options.record_trace.then(|| {
        let mut t = RunTrace::new(model.n_workers());
        t.push(trace_record(
            -1,
            0.0,
            driver.init_collection().simulated_duration,
            driver.init_collection(),
        ));
        t
    });

    let mut stop = recorder
        .observe(obj, &driver.state().x, 0, driver.state().time)?
        .unwrap_or(StopReason::IterationBudget);
    let mut stopped_early = matches!(
        stop,
        StopReason::GradTargetReached | StopReason::FTargetReached | StopReason::Diverged
    );
    while !stopped_early {
        if driver.state().k as u64 >= budgets.max_iterations {
            stop = StopReason::IterationBudget;
            break;
        }
        if driver.state().time >= budgets.max_sim_time {
            stop = StopReason::TimeBudget;
            break;
        }
        let t_start = driver.state().time;
        let (_, res) = driver.step()?;
        if let Some(t) = trace.as_mut() {
            t.push(trace_record(
                driver.state().k - 1,
                t_start,
                driver.state().time,
                &res,
            ));
        }
        let k = driver.state().k;
        if recorder.due(k) {
            if let Some(s) = recorder.observe(obj, &driver.state().x, k, driver.state().time)? {
                stop = s;
                stopped_early = true;
            }
        }
    }
    let k = driver.state().k;
    if !recorder.already_observed(k) {
        if let Some(s) = recorder.observe(obj, &driver.state().x, k, driver.state().time)? {
            stop = s;
        }
    }
    Ok(recorder.finish(
        "freya_page",
        stop,
        k as u64,
        driver.state().time,
        trace,
        None,
    ))
}
