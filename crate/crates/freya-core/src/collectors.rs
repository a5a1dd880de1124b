//! Asynchronous gradient collection over heterogeneous workers.
//!
//! Two disciplines cover every collector here:
//!
//! * **Count-driven** ([`compute_batch`], [`compute_batch_difference`]):
//!   each worker is handed a fresh uniform index on every (re)assignment,
//!   the server folds in the first `S` completions with weight `1/S`, and
//!   nothing is ever discarded. The duration obeys a *deterministic* bound
//!   (`2 t*(S)` for gradients, `4 t*(S)` for differences) because the `j`
//!   fastest workers alone finish `S` tasks by then.
//!
//! * **Multiset-driven** ([`compute_gradient`],
//!   [`compute_batch_any_sampling`],
//!   [`compute_batch_difference_any_sampling`]): a fixed multiset of
//!   indices must each be collected exactly once. Workers draw uniformly
//!   from the copies still outstanding; a completion whose copy was
//!   meanwhile collected by someone else is wasted. The full gradient is
//!   the special case `multiset = [m]`, which is why its output matches
//!   the sequential reference oracle exactly up to summation order.
//!
//! Index draws come from per-worker RNG streams ([`crate::rng`]), so adding
//! a straggler with `τ = ∞` leaves every other worker's draw sequence — and
//! therefore the entire collection — bit-for-bit unchanged.
//!
//! A difference task (`∇fⱼ(x) − ∇fⱼ(y)`) occupies a worker for twice its
//! task time and counts two oracle calls; a plain gradient task costs one.

use std::collections::{BTreeSet, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::FiniteSumObjective;
use crate::rng::WorkerRngs;
use crate::simclock::{SimClock, WorkerTimeModel};

/// Outcome of one collection phase.
#[derive(Debug, Clone)]
pub struct CollectionResult {
    /// The aggregated vector (already divided by the batch weight).
    pub vector: Vec<f64>,
    /// Simulated seconds from phase start to the completion that met the
    /// collection goal.
    pub simulated_duration: f64,
    /// Gradient-oracle calls that finished, per worker (a difference task
    /// counts two).
    pub oracle_calls: Vec<u64>,
    /// Completions whose index had already been collected (multiset
    /// discipline only; always 0 for count-driven collectors).
    pub wasted_calls: u64,
    /// Terms folded into `vector`.
    pub aggregated_calls: u64,
    /// Tasks handed to workers, including in-flight work discarded when the
    /// phase ended.
    pub dispatched: u64,
    /// Completions processed (`aggregated_calls + wasted_calls`).
    pub completed: u64,
}

/// What each task computes.
enum Term<'a> {
    /// `∇fⱼ(x)` — one oracle call per task.
    Gradient { x: &'a [f64] },
    /// `∇fⱼ(x) − ∇fⱼ(y)` — two oracle calls, twice the task time.
    Difference { x: &'a [f64], y: &'a [f64] },
}

impl Term<'_> {
    fn time_factor(&self) -> f64 {
        match self {
            Term::Gradient { .. } => 1.0,
            Term::Difference { .. } => 2.0,
        }
    }

    fn calls(&self) -> u64 {
        match self {
            Term::Gradient { .. } => 1,
            Term::Difference { .. } => 2,
        }
    }

    /// `accum += term_j`, evaluated lazily at completion time. Evaluating
    /// both gradients through the same pure oracle makes `x = y` cancel to
    /// exactly zero.
    fn accumulate<O: FiniteSumObjective + ?Sized>(
        &self,
        obj: &O,
        j: usize,
        accum: &mut [f64],
        scratch: &mut [f64],
    ) -> Result<()> {
        match self {
            Term::Gradient { x } => {
                obj.component_gradient(j, x, scratch)?;
                for (a, s) in accum.iter_mut().zip(scratch.iter()) {
                    *a += s;
                }
            }
            Term::Difference { x, y } => {
                obj.component_gradient(j, x, scratch)?;
                for (a, s) in accum.iter_mut().zip(scratch.iter()) {
                    *a += s;
                }
                obj.component_gradient(j, y, scratch)?;
                for (a, s) in accum.iter_mut().zip(scratch.iter()) {
                    *a -= s;
                }
            }
        }
        Ok(())
    }
}

/// Multiset of component indices with O(log) uniform sampling bookkeeping.
///
/// Copies are distinct: `{1, 1}` holds two collectible items. Removal takes
/// the lowest-positioned copy so the layout (and thus every subsequent
/// uniform draw) is deterministic.
struct IndexMultiset {
    items: Vec<usize>,
    positions: HashMap<usize, BTreeSet<usize>>,
}

impl IndexMultiset {
    fn new(items: Vec<usize>) -> Self {
        let mut positions: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        for (pos, &v) in items.iter().enumerate() {
            positions.entry(v).or_default().insert(pos);
        }
        IndexMultiset { items, positions }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform draw over the remaining copies. Panics if empty — callers
    /// check the exit condition first.
    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        self.items[rng.gen_range(0..self.items.len())]
    }

    /// Remove one copy of `value` if present.
    fn remove_one(&mut self, value: usize) -> bool {
        let Some(set) = self.positions.get_mut(&value) else {
            return false;
        };
        let p = *set.iter().next().expect("position sets are never empty");
        set.remove(&p);
        if set.is_empty() {
            self.positions.remove(&value);
        }
        let last = self.items.len() - 1;
        if p != last {
            let moved = self.items[last];
            self.items[p] = moved;
            let moved_set = self
                .positions
                .get_mut(&moved)
                .expect("moved value must be tracked");
            moved_set.remove(&last);
            moved_set.insert(p);
        }
        self.items.pop();
        true
    }
}

fn check_pool(model: &WorkerTimeModel, rngs: &WorkerRngs) -> Result<usize> {
    let n = model.n_workers();
    if rngs.n_workers() != n {
        return Err(Error::InvalidParameter(format!(
            "worker RNG pool has {} streams but the time model has {n} workers",
            rngs.n_workers()
        )));
    }
    Ok(n)
}

/// First-`S`-completions discipline: every completion aggregates, indices
/// are fresh uniform draws per assignment.
fn run_count_driven<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    iteration: i64,
    s: usize,
    term: Term<'_>,
    rngs: &mut WorkerRngs,
) -> Result<CollectionResult> {
    if s == 0 {
        return Err(Error::InvalidParameter("batch size must be at least 1".into()));
    }
    let n = check_pool(model, rngs)?;
    let m = obj.num_components();
    let dim = obj.dim();
    let mut clock: SimClock<usize> = SimClock::new(n)?;
    let mut accum = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut oracle_calls = vec![0u64; n];
    let (mut dispatched, mut aggregated) = (0u64, 0u64);

    for w in 0..n {
        let j = rngs.draws[w].gen_range(0..m);
        let d = model.task_duration(w, iteration, rngs)?;
        clock.assign(w, term.time_factor() * d, j)?;
        dispatched += 1;
    }

    while aggregated < s as u64 {
        let Some(c) = clock.next_completion() else {
            return Err(Error::NoFiniteWorker);
        };
        oracle_calls[c.worker] += term.calls();
        term.accumulate(obj, c.payload, &mut accum, &mut scratch)?;
        aggregated += 1;
        if aggregated == s as u64 {
            break;
        }
        let j = rngs.draws[c.worker].gen_range(0..m);
        let d = model.task_duration(c.worker, iteration, rngs)?;
        clock.assign(c.worker, term.time_factor() * d, j)?;
        dispatched += 1;
    }

    for a in accum.iter_mut() {
        *a /= s as f64;
    }
    Ok(CollectionResult {
        vector: accum,
        simulated_duration: clock.now(),
        oracle_calls,
        wasted_calls: 0,
        aggregated_calls: aggregated,
        dispatched,
        completed: aggregated,
    })
}

/// Collect-each-copy-once discipline: workers draw uniformly from the
/// outstanding copies; duplicates in flight are wasted on arrival.
fn run_multiset_driven<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    iteration: i64,
    indices: &[usize],
    term: Term<'_>,
    rngs: &mut WorkerRngs,
) -> Result<CollectionResult> {
    if indices.is_empty() {
        return Err(Error::InvalidParameter(
            "collection multiset must be nonempty".into(),
        ));
    }
    let m = obj.num_components();
    for &j in indices {
        if j >= m {
            return Err(Error::IndexOutOfRange {
                what: "component",
                index: j,
                size: m,
            });
        }
    }
    let n = check_pool(model, rngs)?;
    let dim = obj.dim();
    let weight = indices.len() as f64;
    let mut outstanding = IndexMultiset::new(indices.to_vec());
    let mut clock: SimClock<usize> = SimClock::new(n)?;
    let mut accum = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut oracle_calls = vec![0u64; n];
    let (mut dispatched, mut aggregated, mut wasted) = (0u64, 0u64, 0u64);

    // Initial broadcast: everyone draws from the full multiset, so two
    // workers may start on the same copy.
    for w in 0..n {
        let j = outstanding.sample(&mut rngs.draws[w]);
        let d = model.task_duration(w, iteration, rngs)?;
        clock.assign(w, term.time_factor() * d, j)?;
        dispatched += 1;
    }

    while !outstanding.is_empty() {
        let Some(c) = clock.next_completion() else {
            return Err(Error::NoFiniteWorker);
        };
        oracle_calls[c.worker] += term.calls();
        if outstanding.remove_one(c.payload) {
            term.accumulate(obj, c.payload, &mut accum, &mut scratch)?;
            aggregated += 1;
        } else {
            wasted += 1;
        }
        if outstanding.is_empty() {
            break;
        }
        let j = outstanding.sample(&mut rngs.draws[c.worker]);
        let d = model.task_duration(c.worker, iteration, rngs)?;
        clock.assign(c.worker, term.time_factor() * d, j)?;
        dispatched += 1;
    }

    for a in accum.iter_mut() {
        *a /= weight;
    }
    Ok(CollectionResult {
        vector: accum,
        simulated_duration: clock.now(),
        oracle_calls,
        wasted_calls: wasted,
        aggregated_calls: aggregated,
        dispatched,
        completed: aggregated + wasted,
    })
}

/// Exact full gradient `∇f(x)`: every component collected exactly once.
pub fn compute_gradient<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    iteration: i64,
    x: &[f64],
    rngs: &mut WorkerRngs,
) -> Result<CollectionResult> {
    let all: Vec<usize> = (0..obj.num_components()).collect();
    run_multiset_driven(obj, model, iteration, &all, Term::Gradient { x }, rngs)
}

/// Minibatch gradient estimate `(1/S) Σ ∇fⱼ(x)` over the first `S`
/// completed uniform draws.
pub fn compute_batch<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    iteration: i64,
    s: usize,
    x: &[f64],
    rngs: &mut WorkerRngs,
) -> Result<CollectionResult> {
    run_count_driven(obj, model, iteration, s, Term::Gradient { x }, rngs)
}

/// Minibatch difference estimate `(1/S) Σ (∇fⱼ(x) − ∇fⱼ(y))` over the first
/// `S` completed uniform draws.
pub fn compute_batch_difference<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    iteration: i64,
    s: usize,
    x: &[f64],
    y: &[f64],
    rngs: &mut WorkerRngs,
) -> Result<CollectionResult> {
    run_count_driven(obj, model, iteration, s, Term::Difference { x, y }, rngs)
}

/// `(1/|𝒮|) Σ_{j∈𝒮} ∇fⱼ(x)` for a fixed multiset `𝒮`, each copy collected
/// exactly once. With `𝒮 = [m]` this is [`compute_gradient`].
pub fn compute_batch_any_sampling<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    iteration: i64,
    multiset: &[usize],
    x: &[f64],
    rngs: &mut WorkerRngs,
) -> Result<CollectionResult> {
    run_multiset_driven(obj, model, iteration, multiset, Term::Gradient { x }, rngs)
}

/// `(1/|𝒮|) Σ_{j∈𝒮} (∇fⱼ(x) − ∇fⱼ(y))` for a fixed multiset `𝒮`.
pub fn compute_batch_difference_any_sampling<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    model: &WorkerTimeModel,
    iteration: i64,
    multiset: &[usize],
    x: &[f64],
    y: &[f64],
    rngs: &mut WorkerRngs,
) -> Result<CollectionResult> {
    run_multiset_driven(obj, model, iteration, multiset, Term::Difference { x, y }, rngs)
}

/// Sampling scheme for building minibatch index multisets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Independent uniform draws (copies may repeat).
    #[default]
    Uniform,
    /// `S` distinct indices, all subsets equiprobable.
    Nice,
    /// Independent draws with probability proportional to `Lⱼ`.
    Importance,
}

/// A sampler bound to a problem, ready to draw index multisets from the
/// server's sampler stream.
#[derive(Debug, Clone)]
pub enum PreparedSampler {
    Uniform { m: usize },
    Nice { m: usize },
    Importance { m: usize, dist: WeightedIndex<f64> },
}

impl PreparedSampler {
    /// Bind `kind` to an objective. Importance sampling needs per-component
    /// smoothness constants and fails loudly without them.
    pub fn prepare<O: FiniteSumObjective + ?Sized>(kind: SamplerKind, obj: &O) -> Result<Self> {
        let m = obj.num_components();
        if m == 0 {
            return Err(Error::InvalidParameter(
                "objective has no components to sample".into(),
            ));
        }
        match kind {
            SamplerKind::Uniform => Ok(PreparedSampler::Uniform { m }),
            SamplerKind::Nice => Ok(PreparedSampler::Nice { m }),
            SamplerKind::Importance => {
                let hints = obj.smoothness().ok_or(Error::MissingSmoothnessHints)?;
                if hints.per_component.len() != m {
                    return Err(Error::InvalidParameter(format!(
                        "smoothness hints list {} components, objective has {m}",
                        hints.per_component.len()
                    )));
                }
                let dist = WeightedIndex::new(hints.per_component.iter().cloned())
                    .map_err(|e| Error::InvalidParameter(format!("importance weights: {e}")))?;
                Ok(PreparedSampler::Importance { m, dist })
            }
        }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            PreparedSampler::Uniform { .. } => SamplerKind::Uniform,
            PreparedSampler::Nice { .. } => SamplerKind::Nice,
            PreparedSampler::Importance { .. } => SamplerKind::Importance,
        }
    }

    /// Draw an index multiset of cardinality `s`.
    pub fn draw_multiset(&self, s: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        if s == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        match self {
            PreparedSampler::Uniform { m } => {
                Ok((0..s).map(|_| rng.gen_range(0..*m)).collect())
            }
            PreparedSampler::Nice { m } => {
                if s > *m {
                    return Err(Error::InvalidParameter(format!(
                        "nice sampling needs batch size ≤ {m}, got {s}"
                    )));
                }
                Ok(rand::seq::index::sample(rng, *m, s).into_vec())
            }
            PreparedSampler::Importance { dist, .. } => {
                Ok((0..s).map(|_| dist.sample(rng)).collect())
            }
        }
    }
}
