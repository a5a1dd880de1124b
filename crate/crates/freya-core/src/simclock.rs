//! Discrete-event simulation of heterogeneous workers.
//!
//! Time is simulated seconds in `f64`. A [`SimClock`] owns `n` workers;
//! each worker is either idle or busy with exactly one task, and completed
//! tasks are delivered strictly in `(completion_time, sequence_number)`
//! order, so runs are bit-for-bit reproducible. A task time of `∞` is the
//! straggler sentinel: the worker accepts the assignment, stays busy
//! forever, and never produces a completion. A task time of `0` is legal
//! and completes at the current instant, ahead of any later-submitted work.
//!
//! [`WorkerTimeModel`] decides how long worker `i`'s next task takes:
//! a fixed `τᵢ`, a per-iteration schedule `τᵢᵏ` (iteration `−1` is
//! preprocessing), or a random draw bounded above by `τᵢ`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::WorkerRngs;

/// Task-time model for a pool of workers.
#[derive(Debug, Clone)]
pub enum WorkerTimeModel {
    /// Worker `i` always takes `taus[i]` seconds.
    Static { taus: Vec<f64> },
    /// Worker `i` takes `schedules[i][k+1]` seconds during optimizer
    /// iteration `k` (entry 0 covers the preprocessing phase `k = −1`).
    Dynamic { schedules: Vec<Vec<f64>> },
    /// Worker `i` takes a uniform draw from `[min_fraction·τᵢ, τᵢ]`,
    /// sampled from its own time stream.
    Stochastic { bounds: Vec<f64>, min_fraction: f64 },
}

fn validate_times(times: &[f64], what: &str) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} must be nonempty")));
    }
    if times.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} must be nonnegative (infinity allowed, NaN not)"
        )));
    }
    Ok(())
}

impl WorkerTimeModel {
    /// Fixed per-worker times. At least one must be finite — a pool of pure
    /// stragglers can never finish any collection.
    pub fn fixed(taus: Vec<f64>) -> Result<Self> {
        validate_times(&taus, "task times")?;
        if !taus.iter().any(|t| t.is_finite()) {
            return Err(Error::InvalidParameter(
                "at least one worker must have finite task time".into(),
            ));
        }
        Ok(WorkerTimeModel::Static { taus })
    }

    /// Per-iteration schedules, one row per worker, all rows the same
    /// length; row entry `k+1` applies to iteration `k ≥ −1`.
    pub fn dynamic(schedules: Vec<Vec<f64>>) -> Result<Self> {
        if schedules.is_empty() {
            return Err(Error::InvalidParameter("schedules must be nonempty".into()));
        }
        let len = schedules[0].len();
        if len == 0 {
            return Err(Error::InvalidParameter(
                "schedules must cover at least the preprocessing phase".into(),
            ));
        }
        for (w, row) in schedules.iter().enumerate() {
            validate_times(row, "schedule entries")?;
            if row.len() != len {
                return Err(Error::InvalidParameter(format!(
                    "schedule for worker {w} has {} entries, expected {len}",
                    row.len()
                )));
            }
        }
        Ok(WorkerTimeModel::Dynamic { schedules })
    }

    /// Bounded random task times: uniform on `[min_fraction·τᵢ, τᵢ]`.
    pub fn stochastic(bounds: Vec<f64>, min_fraction: f64) -> Result<Self> {
        validate_times(&bounds, "task-time bounds")?;
        if !bounds.iter().any(|t| t.is_finite()) {
            return Err(Error::InvalidParameter(
                "at least one worker must have a finite task-time bound".into(),
            ));
        }
        if !(0.0..=1.0).contains(&min_fraction) {
            return Err(Error::InvalidParameter(
                "min_fraction must lie in [0, 1]".into(),
            ));
        }
        Ok(WorkerTimeModel::Stochastic {
            bounds,
            min_fraction,
        })
    }

    pub fn n_workers(&self) -> usize {
        match self {
            WorkerTimeModel::Static { taus } => taus.len(),
            WorkerTimeModel::Dynamic { schedules } => schedules.len(),
            WorkerTimeModel::Stochastic { bounds, .. } => bounds.len(),
        }
    }

    /// Upper bound on the next task time of `worker` at iteration `k`
    /// (for the static and dynamic models this is the exact time).
    pub fn bound(&self, worker: usize, iteration: i64) -> Result<f64> {
        self.check_worker(worker)?;
        match self {
            WorkerTimeModel::Static { taus } => Ok(taus[worker]),
            WorkerTimeModel::Dynamic { schedules } => {
                let idx = iteration + 1;
                if idx < 0 || idx as usize >= schedules[worker].len() {
                    return Err(Error::MissingScheduleEntry { worker, iteration });
                }
                Ok(schedules[worker][idx as usize])
            }
            WorkerTimeModel::Stochastic { bounds, .. } => Ok(bounds[worker]),
        }
    }

    /// Duration of the next task of `worker` at iteration `k`. Only the
    /// stochastic model consumes randomness, and only from the worker's own
    /// time stream.
    pub fn task_duration(
        &self,
        worker: usize,
        iteration: i64,
        rngs: &mut WorkerRngs,
    ) -> Result<f64> {
        self.check_worker(worker)?;
        match self {
            WorkerTimeModel::Static { .. } | WorkerTimeModel::Dynamic { .. } => {
                self.bound(worker, iteration)
            }
            WorkerTimeModel::Stochastic {
                bounds,
                min_fraction,
            } => {
                let b = bounds[worker];
                if !b.is_finite() || b == 0.0 {
                    return Ok(b);
                }
                let lo = min_fraction * b;
                Ok(lo + rngs.times[worker].gen::<f64>() * (b - lo))
            }
        }
    }

    fn check_worker(&self, worker: usize) -> Result<()> {
        let n = self.n_workers();
        if worker >= n {
            return Err(Error::IndexOutOfRange {
                what: "worker",
                index: worker,
                size: n,
            });
        }
        Ok(())
    }
}

/// A delivered task completion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion<P> {
    pub time: f64,
    pub worker: usize,
    pub payload: P,
}

#[derive(Debug)]
struct Event<P> {
    time: f64,
    seq: u64,
    worker: usize,
    payload: P,
}

impl<P> PartialEq for Event<P> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<P> Eq for Event<P> {}

impl<P> Ord for Event<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: invert so the earliest (time, seq) pops first. Times are
        // finite non-NaN by construction.
        other
            .time
            .partial_cmp(&self.time)
            .unwrap()
            .then(other.seq.cmp(&self.seq))
    }
}
impl<P> PartialOrd for Event<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Deterministic event queue over `n` workers.
pub struct SimClock<P> {
    now: f64,
    next_seq: u64,
    queue: BinaryHeap<Event<P>>,
    busy: Vec<bool>,
}

impl<P> SimClock<P> {
    pub fn new(n_workers: usize) -> Result<Self> {
        if n_workers == 0 {
            return Err(Error::InvalidParameter(
                "simulation needs at least one worker".into(),
            ));
        }
        Ok(SimClock {
            now: 0.0,
            next_seq: 0,
            queue: BinaryHeap::new(),
            busy: vec![false; n_workers],
        })
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn n_workers(&self) -> usize {
        self.busy.len()
    }

    pub fn is_busy(&self, worker: usize) -> bool {
        self.busy[worker]
    }

    /// Hand `worker` a task that takes `duration` seconds. An infinite
    /// duration parks the worker as busy forever (no completion event).
    pub fn assign(&mut self, worker: usize, duration: f64, payload: P) -> Result<()> {
        if worker >= self.busy.len() {
            return Err(Error::IndexOutOfRange {
                what: "worker",
                index: worker,
                size: self.busy.len(),
            });
        }
        if duration.is_nan() || duration < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "task duration must be nonnegative, got {duration}"
            )));
        }
        if self.busy[worker] {
            return Err(Error::WorkerBusy { worker });
        }
        self.busy[worker] = true;
        if duration.is_finite() {
            self.queue.push(Event {
                time: self.now + duration,
                seq: self.next_seq,
                worker,
                payload,
            });
        }
        self.next_seq += 1;
        Ok(())
    }

    /// Deliver the next completion, advancing the clock to it. Equal-time
    /// completions arrive in assignment order. Returns `None` when no
    /// pending task can ever finish.
    pub fn next_completion(&mut self) -> Option<Completion<P>> {
        let event = self.queue.pop()?;
        debug_assert!(event.time >= self.now);
        self.now = event.time;
        self.busy[event.worker] = false;
        Some(Completion {
            time: event.time,
            worker: event.worker,
            payload: event.payload,
        })
    }

    /// Drop all in-flight work and mark every worker idle. The clock does
    /// not move: a phase boundary frees the pool instantly, discarding
    /// results that would have arrived later.
    pub fn release_all(&mut self) {
        self.queue.clear();
        self.busy.iter_mut().for_each(|b| *b = false);
    }
}

/// Per-iteration accounting of one optimizer run.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    /// Optimizer iteration (`−1` for preprocessing).
    pub k: i64,
    pub t_start: f64,
    pub t_end: f64,
    /// Tasks handed to workers during this iteration.
    pub dispatched: u64,
    /// Task completions processed during this iteration.
    pub completed: u64,
    /// Completions per worker (gradient-oracle calls actually finished).
    pub oracle_calls: Vec<u64>,
}

/// Full timing trace of a run: one record per iteration plus totals.
#[derive(Debug, Clone, Serialize)]
pub struct RunTrace {
    pub n_workers: usize,
    pub records: Vec<IterationRecord>,
}

impl RunTrace {
    pub fn new(n_workers: usize) -> Self {
        RunTrace {
            n_workers,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: IterationRecord) {
        debug_assert_eq!(record.oracle_calls.len(), self.n_workers);
        self.records.push(record);
    }

    /// Total simulated time covered by the trace.
    pub fn total_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t_end)
            - self.records.first().map_or(0.0, |r| r.t_start)
    }

    /// Total oracle calls per worker across all iterations.
    pub fn per_worker_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.n_workers];
        for rec in &self.records {
            for (t, c) in totals.iter_mut().zip(&rec.oracle_calls) {
                *t += c;
            }
        }
        totals
    }

    /// One CSV row per iteration: `k,t_start,t_end,dispatched,completed`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "t_start", "t_end", "dispatched", "completed"])
            .map_err(|e| Error::CsvFormat {
                line: 0,
                message: e.to_string(),
            })?;
        for r in &self.records {
            w.write_record(&[
                r.k.to_string(),
                format!("{:.17e}", r.t_start),
                format!("{:.17e}", r.t_end),
                r.dispatched.to_string(),
                r.completed.to_string(),
            ])
            .map_err(|e| Error::CsvFormat {
                line: 0,
                message: e.to_string(),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Full trace (including per-worker tallies) as JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
