//! Deterministic random-number streams.
//!
//! Every run is keyed by a single `u64` seed. Independent *streams* are
//! derived from that seed with ChaCha's stream counter so that logically
//! separate random decisions never share state:
//!
//! * one index-draw stream **per worker** (stream id = worker id + offset),
//! * one task-time noise stream per worker (stochastic time models),
//! * a driver stream for pre-drawn multisets (nice/importance sampling),
//! * a coin stream for the Bernoulli branch of PAGE-style methods.
//!
//! The per-worker decoupling is load-bearing: adding a worker with infinite
//! task time must leave every other worker's draw sequence untouched, which
//! makes straggler-indifference checks exact instead of statistical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream id for the Bernoulli coin used by PAGE-style optimizers.
const STREAM_COIN: u64 = 1;
/// Stream id for driver-level sampling (nice/importance multisets,
/// baseline minibatch draws).
const STREAM_SAMPLER: u64 = 2;
/// Stream id used by problem generators.
const STREAM_GENERATOR: u64 = 3;
/// First per-worker index-draw stream.
const STREAM_WORKER_DRAW_BASE: u64 = 1 << 8;
/// First per-worker task-time stream (stochastic time models).
const STREAM_WORKER_TIME_BASE: u64 = 1 << 40;

/// A ChaCha generator pinned to `(seed, stream)`.
pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// The coin stream for a run.
pub fn coin_stream(seed: u64) -> ChaCha8Rng {
    stream(seed, STREAM_COIN)
}

/// The driver-level sampler stream for a run.
pub fn sampler_stream(seed: u64) -> ChaCha8Rng {
    stream(seed, STREAM_SAMPLER)
}

/// The generator stream used when synthesizing problem instances.
pub fn generator_stream(seed: u64) -> ChaCha8Rng {
    stream(seed, STREAM_GENERATOR)
}

/// Per-worker random streams for one run.
///
/// `draws[w]` feeds component-index draws made on behalf of worker `w`;
/// `times[w]` feeds its stochastic task-time noise. Cloning snapshots the
/// exact stream state, which the trace-comparison tests rely on.
#[derive(Debug, Clone)]
pub struct WorkerRngs {
    pub draws: Vec<ChaCha8Rng>,
    pub times: Vec<ChaCha8Rng>,
}

impl WorkerRngs {
    pub fn new(seed: u64, n_workers: usize) -> Self {
        let draws = (0..n_workers)
            .map(|w| stream(seed, STREAM_WORKER_DRAW_BASE + w as u64))
            .collect();
        let times = (0..n_workers)
            .map(|w| stream(seed, STREAM_WORKER_TIME_BASE + w as u64))
            .collect();
        WorkerRngs { draws, times }
    }

    pub fn n_workers(&self) -> usize {
        self.draws.len()
    }
}

/// One standard-normal deviate via the Box–Muller transform.
///
/// The transform is spelled out (rather than relying on a library sampler)
/// so that regenerating a problem from its recorded seed reproduces the
/// same instance regardless of sampler implementation details.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    // u1 in (0, 1] so the log is finite; u2 in [0, 1).
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
