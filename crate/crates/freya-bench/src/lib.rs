//! Shared fixtures for the engine benchmarks.

use freya_core::objectives::{QuadraticProblem, QuadraticSpec};
use freya_core::simclock::WorkerTimeModel;

/// The heterogeneous pool used throughout: worker `i` takes `√i` seconds.
pub fn sqrt_pool(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64).sqrt()).collect()
}

pub fn bench_problem(m: usize, d: usize) -> QuadraticProblem {
    QuadraticProblem::generate(QuadraticSpec {
        m,
        d,
        lambda: 0.1,
        s: 1.0,
        seed: 71,
    })
    .expect("bench problem generates")
}

pub fn bench_model(n: usize) -> WorkerTimeModel {
    WorkerTimeModel::fixed(sqrt_pool(n)).expect("bench model builds")
}
