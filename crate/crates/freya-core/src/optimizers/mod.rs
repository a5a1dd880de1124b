//! Optimization loops over the simulated worker pool.
//!
//! Every optimizer here follows the same shape: advance the iterate, charge
//! the simulated clock for whatever collection the step needed, and record
//! the trajectory `(k, time, ‖∇f(xᵏ)‖², f(xᵏ))` measured with the *exact*
//! gradient oracle — never the stochastic estimator — so that runs with
//! different estimators are comparable. Evaluation is server-side
//! bookkeeping and costs no simulated time.
//!
//! The methods:
//!
//! * [`page::run_freya_page`] — variance-reduced loop with asynchronous
//!   collectors; the flagship method.
//! * [`sgd::run_freya_sgd`] / [`sgd::run_rennala_sgd`] — minibatch SGD on
//!   asynchronous batch collection (one loop, two reporting names).
//! * [`baselines::run_soviet_page`], [`baselines::run_gd`],
//!   [`baselines::run_asynchronous_sgd`] — the synchronous equal-allocation
//!   and fully-asynchronous baselines the main methods are raced against.

pub mod baselines;
pub mod page;
pub mod sgd;

pub use baselines::{
    run_asynchronous_sgd, run_gd, run_soviet_page, AsyncSgdParams, GdParams, GdVariant,
    SovietPageParams,
};
pub use page::{run_freya_page, FreyaPage, FreyaPageParams, PageState, ResolvedPageParams};
pub use sgd::{run_freya_sgd, run_rennala_sgd, SgdParams, SgdStepsize};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use crate::objectives::FiniteSumObjective;
use crate::simclock::RunTrace;

/// Iterate values above this magnitude count as divergence.
const DIVERGENCE_THRESHOLD: f64 = 1e100;

/// Stopping criteria. A run halts at whichever trips first; targets are
/// only checked at evaluation points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Budgets {
    /// Maximum optimizer steps.
    pub max_iterations: u64,
    /// Maximum simulated seconds (checked after each step).
    pub max_sim_time: f64,
    /// Stop once `min_k ‖∇f(xᵏ)‖² ≤` this.
    pub grad_target: Option<f64>,
    /// Stop once `f(xᵏ) ≤` this.
    pub f_target: Option<f64>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_iterations: 1000,
            max_sim_time: f64::INFINITY,
            grad_target: None,
            f_target: None,
        }
    }
}

impl Budgets {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_sim_time.is_nan() || self.max_sim_time < 0.0 {
            return Err(Error::InvalidParameter(
                "time budget must be nonnegative".into(),
            ));
        }
        for (name, t) in [("grad", self.grad_target), ("f", self.f_target)] {
            if let Some(v) = t {
                if v.is_nan() {
                    return Err(Error::InvalidParameter(format!(
                        "{name} target must not be NaN"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    IterationBudget,
    TimeBudget,
    GradTargetReached,
    FTargetReached,
    Diverged,
}

/// One evaluated point of a run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint {
    pub k: i64,
    /// Simulated seconds from run start (including initialization).
    pub time: f64,
    pub grad_norm_sq: f64,
    pub f_value: f64,
}

/// Everything a run produces.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizerReport {
    pub algorithm: String,
    pub trajectory: Vec<TrajectoryPoint>,
    pub stop: StopReason,
    /// Optimizer steps taken.
    pub iterations: u64,
    /// Total simulated seconds, initialization included.
    pub total_time: f64,
    /// Smallest exact squared gradient norm among evaluated iterates.
    pub min_grad_norm_sq: f64,
    /// Objective value at the last evaluated iterate.
    pub final_f: f64,
    /// Per-iteration timing trace, when requested.
    pub trace: Option<RunTrace>,
    /// Largest iterate staleness observed (asynchronous SGD only).
    pub max_delay: Option<u64>,
}

impl OptimizerReport {
    /// CSV of the evaluated trajectory: `k,time,grad_norm_sq,f_value`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "time", "grad_norm_sq", "f_value"])
            .map_err(|e| Error::CsvFormat {
                line: 0,
                message: e.to_string(),
            })?;
        for p in &self.trajectory {
            w.write_record(&[
                p.k.to_string(),
                format!("{:.17e}", p.time),
                format!("{:.17e}", p.grad_norm_sq),
                format!("{:.17e}", p.f_value),
            ])
            .map_err(|e| Error::CsvFormat {
                line: 0,
                message: e.to_string(),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Knobs that do not change the optimization path, only what is recorded.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Evaluate the exact oracle every this many steps (step 0 and the final
    /// step are always evaluated).
    pub eval_every: u64,
    /// Keep the per-iteration timing trace in the report.
    pub record_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            eval_every: 1,
            record_trace: false,
        }
    }
}

/// Shared evaluation/recording state for all optimizer loops.
pub(crate) struct Recorder<'a> {
    budgets: &'a Budgets,
    eval_every: u64,
    grad_buf: Vec<f64>,
    trajectory: Vec<TrajectoryPoint>,
    min_grad_norm_sq: f64,
    final_f: f64,
    last_eval_k: Option<i64>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(budgets: &'a Budgets, options: &RunOptions, dim: usize) -> Result<Self> {
        budgets.validate()?;
        if options.eval_every == 0 {
            return Err(Error::InvalidParameter(
                "eval_every must be at least 1".into(),
            ));
        }
        Ok(Recorder {
            budgets,
            eval_every: options.eval_every,
            grad_buf: vec![0.0; dim],
            trajectory: Vec::new(),
            min_grad_norm_sq: f64::INFINITY,
            final_f: f64::NAN,
            last_eval_k: None,
        })
    }

    pub(crate) fn due(&self, k: i64) -> bool {
        k >= 0 && (k as u64) % self.eval_every == 0
    }

    /// Evaluate the exact oracle at `x`, record the point, and report a stop
    /// reason if a target tripped or the run diverged.
    pub(crate) fn observe<O: FiniteSumObjective + ?Sized>(
        &mut self,
        obj: &O,
        x: &[f64],
        k: i64,
        time: f64,
    ) -> Result<Option<StopReason>> {
        let f = obj.value(x)?;
        obj.full_gradient(x, &mut self.grad_buf)?;
        let g2 = norm_sq(&self.grad_buf);
        self.trajectory.push(TrajectoryPoint {
            k,
            time,
            grad_norm_sq: g2,
            f_value: f,
        });
        self.min_grad_norm_sq = self.min_grad_norm_sq.min(g2);
        self.final_f = f;
        self.last_eval_k = Some(k);
        if !f.is_finite() || !g2.is_finite() || f.abs() > DIVERGENCE_THRESHOLD {
            return Ok(Some(StopReason::Diverged));
        }
        if let Some(target) = self.budgets.grad_target {
            if self.min_grad_norm_sq <= target {
                return Ok(Some(StopReason::GradTargetReached));
            }
        }
        if let Some(target) = self.budgets.f_target {
            if f <= target {
                return Ok(Some(StopReason::FTargetReached));
            }
        }
        Ok(None)
    }

    pub(crate) fn already_observed(&self, k: i64) -> bool {
        self.last_eval_k == Some(k)
    }

    pub(crate) fn finish(
        self,
        algorithm: &str,
        stop: StopReason,
        iterations: u64,
        total_time: f64,
        trace: Option<RunTrace>,
        max_delay: Option<u64>,
    ) -> OptimizerReport {
        OptimizerReport {
            algorithm: algorithm.to_string(),
            trajectory: self.trajectory,
            stop,
            iterations,
            total_time,
            min_grad_norm_sq: self.min_grad_norm_sq,
            final_f: self.final_f,
            trace,
            max_delay,
        }
    }
}
