//! Experiment configuration: one JSON document describing the problem, the
//! worker pool, an algorithm list with stepsize grids, seeds, and budgets.
//!
//! ```json
//! {
//!   "problem": {"kind": "quadratic", "m": 1000, "d": 50, "lambda": 0.001, "s": 1.0, "seed": 42},
//!   "workers": {"n": 100, "tau": "sqrt(i)"},
//!   "algorithms": [
//!     {"name": "freya_page", "gamma": {"pow2": [-10, 10]}},
//!     {"name": "soviet_page", "gamma": {"pow2": [-10, 10]}}
//!   ],
//!   "seeds": [1, 2, 3],
//!   "budgets": {"max_iterations": 20000},
//!   "output_dir": "out/race"
//! }
//! ```
//!
//! Relative paths (`csv` datasets, τ files, schedule files, the output
//! directory) are resolved against the directory the config file lives in.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::collectors::SamplerKind;
use crate::error::{Error, Result};
use crate::objectives::{
    FiniteSumObjective, LogisticProblem, QuadraticProblem, QuadraticSpec,
};
use crate::optimizers::Budgets;
use crate::simclock::WorkerTimeModel;

/// Algorithm names `run_experiment` can dispatch.
pub const REGISTERED_ALGORITHMS: [&str; 7] = [
    "freya_page",
    "freya_sgd",
    "rennala_sgd",
    "soviet_page",
    "async_sgd",
    "hero_gd",
    "soviet_gd",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemConfig {
    /// Synthetic tridiagonal quadratic, regenerated from its spec.
    Quadratic(QuadraticSpec),
    /// Logistic regression over a CSV dataset.
    Csv {
        path: PathBuf,
        #[serde(default)]
        label_column: usize,
        #[serde(default)]
        has_header: bool,
        #[serde(default)]
        l2: f64,
    },
}

/// A constructed problem, keeping the concrete type around for the
/// closed-form optimum where one exists.
pub enum BuiltProblem {
    Quadratic(QuadraticProblem),
    Logistic(LogisticProblem),
}

impl BuiltProblem {
    pub fn objective(&self) -> &dyn FiniteSumObjective {
        match self {
            BuiltProblem::Quadratic(p) => p,
            BuiltProblem::Logistic(p) => p,
        }
    }

    /// `f(x*)` when the problem admits one (the quadratic's mean system is
    /// solvable in closed form; logistic losses have no such expression).
    pub fn closed_form_floor(&self) -> Option<f64> {
        match self {
            BuiltProblem::Quadratic(p) => p.optimal_value().ok(),
            BuiltProblem::Logistic(_) => None,
        }
    }
}

impl ProblemConfig {
    pub fn build(&self, base_dir: &Path) -> Result<BuiltProblem> {
        match self {
            ProblemConfig::Quadratic(spec) => {
                Ok(BuiltProblem::Quadratic(QuadraticProblem::generate(*spec)?))
            }
            ProblemConfig::Csv {
                path,
                label_column,
                has_header,
                l2,
            } => Ok(BuiltProblem::Logistic(LogisticProblem::from_csv(
                &resolve_path(base_dir, path),
                *label_column,
                *has_header,
                *l2,
            )?)),
        }
    }
}

/// Per-worker task times: a shared constant, a formula over the 1-based
/// worker index, an explicit list, or a file of whitespace-separated values.
/// `"inf"` entries park a worker.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Constant(f64),
    /// `"sqrt(i)"`, `"linear(i)"`, or `"const(c)"`.
    Formula(String),
    List(Vec<TauEntry>),
    File { file: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauEntry {
    Number(f64),
    Token(String),
}

fn parse_tau_token(token: &str) -> Result<f64> {
    let t = token.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    t.parse().map_err(|_| {
        Error::Config(format!(
            "cannot parse task time '{token}' (expected a number or \"inf\")"
        ))
    })
}

impl TauSpec {
    pub fn resolve(&self, n: usize, base_dir: &Path) -> Result<Vec<f64>> {
        let taus = match self {
            TauSpec::Constant(c) => vec![*c; n],
            TauSpec::Formula(f) => tau_formula(f, n)?,
            TauSpec::List(entries) => entries
                .iter()
                .map(|e| match e {
                    TauEntry::Number(v) => Ok(*v),
                    TauEntry::Token(t) => parse_tau_token(t),
                })
                .collect::<Result<Vec<f64>>>()?,
            TauSpec::File { file } => {
                let path = resolve_path(base_dir, file);
                let text = fs::read_to_string(&path)?;
                text.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(parse_tau_token)
                    .collect::<Result<Vec<f64>>>()?
            }
        };
        if taus.len() != n {
            return Err(Error::Config(format!(
                "τ spec yields {} entries for {} workers",
                taus.len(),
                n
            )));
        }
        Ok(taus)
    }
}

fn tau_formula(formula: &str, n: usize) -> Result<Vec<f64>> {
    let f = formula.trim();
    if f == "sqrt(i)" {
        return Ok((1..=n).map(|i| (i as f64).sqrt()).collect());
    }
    if f == "linear(i)" {
        return Ok((1..=n).map(|i| i as f64).collect());
    }
    if let Some(arg) = f.strip_prefix("const(").and_then(|r| r.strip_suffix(')')) {
        let c = parse_tau_token(arg)?;
        return Ok(vec![c; n]);
    }
    Err(Error::Config(format!(
        "unknown τ formula '{formula}'; supported: sqrt(i), linear(i), const(c)"
    )))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkerMode {
    #[default]
    Static,
    /// Task times uniform on `[min_fraction·τᵢ, τᵢ]`.
    Stochastic,
    /// Per-iteration times from a schedule file.
    Dynamic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkerConfig {
    pub n: usize,
    #[serde(default)]
    pub mode: WorkerMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<TauSpec>,
    /// Dynamic mode: one row per worker, comma- or space-separated; the
    /// first entry covers the preprocessing collection, entry `k+1` covers
    /// iteration `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_file: Option<PathBuf>,
    /// Stochastic mode only; defaults to 0.5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fraction: Option<f64>,
}

impl WorkerConfig {
    pub fn build(&self, base_dir: &Path) -> Result<WorkerTimeModel> {
        if self.n == 0 {
            return Err(Error::Config("worker pool must be nonempty".into()));
        }
        if self.mode != WorkerMode::Stochastic && self.min_fraction.is_some() {
            return Err(Error::Config(
                "min_fraction only applies to stochastic workers".into(),
            ));
        }
        match self.mode {
            WorkerMode::Static | WorkerMode::Stochastic => {
                if self.schedule_file.is_some() {
                    return Err(Error::Config(
                        "schedule_file only applies to dynamic workers".into(),
                    ));
                }
                let tau = self.tau.as_ref().ok_or_else(|| {
                    Error::Config("static/stochastic workers need a τ spec".into())
                })?;
                let taus = tau.resolve(self.n, base_dir)?;
                if self.mode == WorkerMode::Static {
                    WorkerTimeModel::fixed(taus)
                } else {
                    WorkerTimeModel::stochastic(taus, self.min_fraction.unwrap_or(0.5))
                }
            }
            WorkerMode::Dynamic => {
                if self.tau.is_some() {
                    return Err(Error::Config(
                        "dynamic workers take a schedule_file, not a τ spec".into(),
                    ));
                }
                let file = self.schedule_file.as_ref().ok_or_else(|| {
                    Error::Config("dynamic workers need a schedule_file".into())
                })?;
                let text = fs::read_to_string(resolve_path(base_dir, file))?;
                let mut rows = Vec::new();
                for line in text.lines() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    rows.push(
                        line.split(|c: char| c.is_whitespace() || c == ',')
                            .filter(|t| !t.is_empty())
                            .map(parse_tau_token)
                            .collect::<Result<Vec<f64>>>()?,
                    );
                }
                if rows.len() != self.n {
                    return Err(Error::Config(format!(
                        "schedule file has {} rows for {} workers",
                        rows.len(),
                        self.n
                    )));
                }
                WorkerTimeModel::dynamic(rows)
            }
        }
    }
}

/// Stepsize specification: each method's theoretical default, one value, an
/// explicit grid, or `{"pow2": [lo, hi]}` for `{2^lo, …, 2^hi}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    #[default]
    Auto,
    Fixed(f64),
    Grid(Vec<f64>),
    Pow2([i32; 2]),
}

impl GammaSpec {
    /// The grid as resolved stepsizes; `None` means "use the theoretical
    /// default".
    pub fn values(&self) -> Result<Vec<Option<f64>>> {
        let check = |g: f64| -> Result<f64> {
            if g.is_finite() && g > 0.0 {
                Ok(g)
            } else {
                Err(Error::Config(format!(
                    "stepsizes must be positive and finite, got {g}"
                )))
            }
        };
        match self {
            GammaSpec::Auto => Ok(vec![None]),
            GammaSpec::Fixed(g) => Ok(vec![Some(check(*g)?)]),
            GammaSpec::Grid(values) => {
                if values.is_empty() {
                    return Err(Error::Config("stepsize grid must be nonempty".into()));
                }
                let mut seen = Vec::new();
                for &g in values {
                    let g = check(g)?;
                    if seen.contains(&g) {
                        return Err(Error::Config(format!("duplicate stepsize {g} in grid")));
                    }
                    seen.push(g);
                }
                Ok(seen.into_iter().map(Some).collect())
            }
            GammaSpec::Pow2([lo, hi]) => {
                if lo > hi {
                    return Err(Error::Config(format!(
                        "pow2 grid bounds must satisfy lo <= hi, got [{lo}, {hi}]"
                    )));
                }
                if *lo < -1021 || *hi > 1023 {
                    return Err(Error::Config(format!(
                        "pow2 exponents must lie in [-1021, 1023], got [{lo}, {hi}]"
                    )));
                }
                Ok((*lo..=*hi).map(|i| Some(2f64.powi(i))).collect())
            }
        }
    }
}

/// Constants for the SGD theoretical schedule when `gamma` is `"auto"`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SgdAutoConfig {
    pub eps: f64,
    pub delta0: f64,
    pub delta_star: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    /// One of [`REGISTERED_ALGORITHMS`].
    pub name: String,
    /// Output label; defaults to the name. Must be unique across the list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub gamma: GammaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refresh_prob: Option<f64>,
    #[serde(default)]
    pub sampler: SamplerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sgd_auto: Option<SgdAutoConfig>,
}

impl AlgorithmConfig {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetConfig {
    pub max_iterations: Option<u64>,
    pub max_sim_time: Option<f64>,
    pub grad_target: Option<f64>,
    pub f_target: Option<f64>,
}

impl BudgetConfig {
    pub fn to_budgets(&self) -> Budgets {
        let base = Budgets::default();
        Budgets {
            max_iterations: self.max_iterations.unwrap_or(base.max_iterations),
            max_sim_time: self.max_sim_time.unwrap_or(base.max_sim_time),
            grad_target: self.grad_target,
            f_target: self.f_target,
        }
    }
}

/// How the best run of each algorithm is picked for the plot series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BestRule {
    /// Lowest terminal `f`.
    #[default]
    MinTerminalF,
    /// First to reach suboptimality `f − f_floor ≤ ε`.
    FirstToTarget(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub workers: WorkerConfig,
    pub algorithms: Vec<AlgorithmConfig>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub budgets: BudgetConfig,
    /// Trajectory sampling stride; `None` picks 1 when `m·d ≤ 10⁵`, else 10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_every: Option<u64>,
    #[serde(default)]
    pub best_rule: BestRule,
    /// Trailing window (simulated seconds) for the mean/variance summary of
    /// each best run; omit to skip that table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trailing_window: Option<f64>,
    /// Also emit per-run iteration traces as JSON.
    #[serde(default)]
    pub record_traces: bool,
    pub output_dir: PathBuf,
}

pub fn resolve_path(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Structural checks that need no file I/O; path contents are checked
    /// when the problem and worker model are built.
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("algorithm list must be nonempty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds list must be nonempty".into()));
        }
        let budgets = self.budgets.to_budgets();
        if budgets.max_iterations == 0 {
            return Err(Error::Config("iteration budget must be >= 1".into()));
        }
        if !(budgets.max_sim_time > 0.0) {
            return Err(Error::Config("time budget must be positive".into()));
        }
        if self.eval_every == Some(0) {
            return Err(Error::Config("eval_every must be >= 1".into()));
        }
        if let Some(w) = self.trailing_window {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::Config(
                    "trailing_window must be finite and nonnegative".into(),
                ));
            }
        }
        if let BestRule::FirstToTarget(eps) = self.best_rule {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::Config(
                    "first_to_target threshold must be positive and finite".into(),
                ));
            }
        }
        let mut labels: Vec<&str> = Vec::new();
        for algo in &self.algorithms {
            if !REGISTERED_ALGORITHMS.contains(&algo.name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown algorithm '{}'; registered: {}",
                    algo.name,
                    REGISTERED_ALGORITHMS.join(", ")
                )));
            }
            let label = algo.label();
            if labels.contains(&label) {
                return Err(Error::Config(format!("duplicate algorithm label '{label}'")));
            }
            labels.push(label);
            algo.gamma.values()?;
            if algo.batch_size == Some(0) {
                return Err(Error::Config(format!("{label}: batch size must be >= 1")));
            }
            if let Some(p) = algo.refresh_prob {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::Config(format!(
                        "{label}: refresh probability must lie in (0, 1]"
                    )));
                }
            }
            let is_page = algo.name.ends_with("page");
            let is_sgd = algo.name.ends_with("sgd") && algo.name != "async_sgd";
            if algo.refresh_prob.is_some() && !is_page {
                return Err(Error::Config(format!(
                    "{label}: refresh_prob only applies to the PAGE methods"
                )));
            }
            if algo.sampler != SamplerKind::Uniform && algo.name != "freya_page" {
                return Err(Error::Config(format!(
                    "{label}: non-uniform sampling is only implemented for freya_page"
                )));
            }
            if algo.batch_size.is_some() && !(is_page || is_sgd) {
                return Err(Error::Config(format!(
                    "{label}: batch_size only applies to the PAGE/SGD methods"
                )));
            }
            if let Some(auto) = &algo.sgd_auto {
                if !is_sgd {
                    return Err(Error::Config(format!(
                        "{label}: sgd_auto only applies to the SGD methods"
                    )));
                }
                for (what, v) in [
                    ("eps", auto.eps),
                    ("delta0", auto.delta0),
                    ("delta_star", auto.delta_star),
                ] {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::Config(format!(
                            "{label}: sgd_auto.{what} must be positive and finite"
                        )));
                    }
                }
            }
            if algo.gamma == GammaSpec::Auto {
                if algo.name == "async_sgd" {
                    return Err(Error::Config(format!(
                        "{label}: async_sgd has no theoretical stepsize; give gamma"
                    )));
                }
                if is_sgd && algo.sgd_auto.is_none() {
                    return Err(Error::Config(format!(
                        "{label}: auto SGD stepsize needs sgd_auto constants"
                    )));
                }
            } else if is_sgd && algo.batch_size.is_none() {
                return Err(Error::Config(format!(
                    "{label}: an explicit SGD stepsize needs batch_size"
                )));
            }
        }
        Ok(())
    }

    /// Evaluation stride: every iteration at desk scale, sparser beyond.
    pub fn effective_eval_every(&self, m: usize, d: usize) -> u64 {
        self.eval_every
            .unwrap_or(if m.saturating_mul(d) <= 100_000 { 1 } else { 10 })
    }
}
