//! Asynchronous finite-sum optimization engine with a heterogeneous-worker
//! discrete-event simulator.
//!
//! The crate simulates `n` parallel workers with arbitrary (fixed,
//! per-iteration, or random-but-bounded) task times computing component
//! gradients of `f(x) = (1/m) Σᵢ fᵢ(x)`, and builds optimizers on top of
//! asynchronous gradient-collection subroutines. Everything is
//! deterministic given a seed, and the [`theory`] module carries the
//! closed-form time-complexity calculus (equilibrium times, duration
//! bounds, stepsizes, iteration counts) that the simulations are checked
//! against.
//!
//! Layout:
//!
//! * [`objectives`] — finite-sum problems (synthetic quadratics, logistic
//!   regression from CSV) behind one trait, plus reference oracles.
//! * [`simclock`] — worker time models and the deterministic event queue.
//! * [`collectors`] — asynchronous full-gradient and minibatch assembly.
//! * [`optimizers`] — the main methods and the baselines they race against.
//! * [`theory`] — equilibrium-time calculus and parameter rules.
//! * [`harness`] — experiment configs, grid runner, and result emission.

pub mod collectors;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod objectives;
pub mod optimizers;
pub mod rng;
pub mod simclock;
pub mod theory;

pub use collectors::{CollectionResult, PreparedSampler, SamplerKind};
pub use error::{Error, Result};
pub use objectives::{FiniteSumObjective, SmoothnessHints};
pub use optimizers::{Budgets, OptimizerReport, StopReason, TrajectoryPoint};
pub use simclock::{RunTrace, SimClock, WorkerTimeModel};
pub use theory::EquilibriumTime;
