//! Grid runner: executes every (algorithm, γ, seed) cell with an isolated
//! clock and RNG, picks each algorithm's best run, and emits plot-ready
//! series.
//!
//! Output layout under the config's `output_dir`:
//!
//! * `trajectory_{label}_{γ}_{seed}.csv` — every cell, `k,time,grad_norm_sq,f_value`;
//! * `trace_{label}_{γ}_{seed}.json` — per-iteration traces when requested;
//! * `best_{label}.csv` — the selected run as raw `(time, f − f_floor)`
//!   pairs, no smoothing;
//! * `summary.json` — the floor convention, the selection rule, and the
//!   per-algorithm best-run/trailing-window table.
//!
//! Every cell derives its RNG streams from its seed alone, so permuting the
//! algorithm list or the grid order cannot change any individual run, and
//! rerunning a config reproduces every output file byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objectives::FiniteSumObjective;
use crate::optimizers::{
    run_asynchronous_sgd, run_freya_page, run_freya_sgd, run_gd, run_rennala_sgd,
    run_soviet_page, AsyncSgdParams, Budgets, FreyaPageParams, GdParams, GdVariant,
    OptimizerReport, RunOptions, SgdParams, SgdStepsize, SovietPageParams, StopReason,
    TrajectoryPoint,
};

use super::config::{AlgorithmConfig, BestRule, ExperimentConfig};

/// One executed (algorithm, γ, seed) cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub algorithm: String,
    pub label: String,
    /// `None` means the method's theoretical stepsize was used.
    pub gamma: Option<f64>,
    pub gamma_label: String,
    pub seed: u64,
    pub trajectory_file: String,
    pub report: OptimizerReport,
}

#[derive(Debug)]
pub struct RaceResult {
    /// The value suboptimality is measured against.
    pub f_floor: f64,
    pub floor_convention: &'static str,
    pub cells: Vec<CellOutcome>,
    /// Algorithm label → index of its best cell in `cells`.
    pub best: BTreeMap<String, usize>,
    pub output_dir: PathBuf,
}

impl RaceResult {
    pub fn best_cell(&self, label: &str) -> Option<&CellOutcome> {
        self.best.get(label).map(|&i| &self.cells[i])
    }
}

/// First trajectory time at which `f ≤ target_f`, if ever reached.
pub fn time_to_target(trajectory: &[TrajectoryPoint], target_f: f64) -> Option<f64> {
    trajectory
        .iter()
        .find(|p| p.f_value <= target_f)
        .map(|p| p.time)
}

/// Index of the best run: lowest terminal `f`, or earliest to reach
/// `f_floor + ε`. Ties break to the smallest (γ, seed), with the
/// theoretical stepsize ordering before any explicit value.
pub fn best_run_select(cells: &[CellOutcome], rule: BestRule, f_floor: f64) -> Result<usize> {
    if cells.is_empty() {
        return Err(Error::InvalidParameter(
            "best-run selection needs at least one run".into(),
        ));
    }
    let score = |cell: &CellOutcome| -> f64 {
        match rule {
            BestRule::MinTerminalF => cell.report.final_f,
            BestRule::FirstToTarget(eps) => {
                time_to_target(&cell.report.trajectory, f_floor + eps)
                    .unwrap_or(f64::INFINITY)
            }
        }
    };
    let key = |i: usize| {
        let cell = &cells[i];
        (
            score(cell),
            cell.gamma.unwrap_or(f64::NEG_INFINITY),
            cell.seed,
        )
    };
    let mut best = 0;
    for i in 1..cells.len() {
        let (s_i, g_i, seed_i) = key(i);
        let (s_b, g_b, seed_b) = key(best);
        let better = match s_i.total_cmp(&s_b) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => match g_i.total_cmp(&g_b) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => seed_i < seed_b,
            },
        };
        if better {
            best = i;
        }
    }
    Ok(best)
}

/// Population mean and variance of `f` over the samples inside the trailing
/// `window` simulated seconds (variance divides by the sample count, so a
/// two-point series {a, b} gives ((a−b)/2)²).
pub fn summarize_variance(trajectory: &[TrajectoryPoint], window: f64) -> Result<(f64, f64)> {
    if trajectory.is_empty() {
        return Err(Error::InvalidParameter(
            "variance summary needs a nonempty trajectory".into(),
        ));
    }
    if !(window.is_finite() && window >= 0.0) {
        return Err(Error::InvalidParameter(
            "trailing window must be finite and nonnegative".into(),
        ));
    }
    let first = trajectory.first().unwrap().time;
    let last = trajectory.last().unwrap().time;
    if window > last - first {
        return Err(Error::InvalidParameter(format!(
            "trailing window {window} exceeds the run length {}",
            last - first
        )));
    }
    let cutoff = last - window;
    let samples: Vec<f64> = trajectory
        .iter()
        .filter(|p| p.time >= cutoff)
        .map(|p| p.f_value)
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, variance))
}

fn run_cell(
    obj: &dyn FiniteSumObjective,
    model: &crate::simclock::WorkerTimeModel,
    algo: &AlgorithmConfig,
    gamma: Option<f64>,
    budgets: &Budgets,
    options: &RunOptions,
    seed: u64,
) -> Result<OptimizerReport> {
    match algo.name.as_str() {
        "freya_page" => run_freya_page(
            obj,
            model,
            &FreyaPageParams {
                gamma,
                batch_size: algo.batch_size,
                refresh_prob: algo.refresh_prob,
                sampler: algo.sampler,
            },
            budgets,
            options,
            seed,
        ),
        "soviet_page" => run_soviet_page(
            obj,
            model,
            &SovietPageParams {
                gamma,
                batch_size: algo.batch_size,
                refresh_prob: algo.refresh_prob,
            },
            budgets,
            options,
            seed,
        ),
        "freya_sgd" | "rennala_sgd" => {
            let stepsize = match (gamma, &algo.sgd_auto) {
                (Some(g), _) => SgdStepsize::Fixed(g),
                (None, Some(auto)) => SgdStepsize::Auto {
                    eps: auto.eps,
                    delta0: auto.delta0,
                    delta_star: auto.delta_star,
                },
                (None, None) => {
                    return Err(Error::Config(format!(
                        "{}: auto SGD stepsize needs sgd_auto constants",
                        algo.label()
                    )))
                }
            };
            let params = SgdParams {
                stepsize,
                batch_size: algo.batch_size,
            };
            if algo.name == "freya_sgd" {
                run_freya_sgd(obj, model, &params, budgets, options, seed)
            } else {
                run_rennala_sgd(obj, model, &params, budgets, options, seed)
            }
        }
        "async_sgd" => {
            let gamma = gamma.ok_or_else(|| {
                Error::Config(format!(
                    "{}: async_sgd has no theoretical stepsize; give gamma",
                    algo.label()
                ))
            })?;
            run_asynchronous_sgd(obj, model, &AsyncSgdParams { gamma }, budgets, options, seed)
        }
        "hero_gd" => run_gd(
            obj,
            model,
            GdVariant::Hero,
            &GdParams { gamma },
            budgets,
            options,
            seed,
        ),
        "soviet_gd" => run_gd(
            obj,
            model,
            GdVariant::Soviet,
            &GdParams { gamma },
            budgets,
            options,
            seed,
        ),
        other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
    }
}

#[derive(Serialize)]
struct BestSummary {
    gamma: Option<f64>,
    gamma_label: String,
    seed: u64,
    stop: StopReason,
    iterations: u64,
    total_time: f64,
    final_f: f64,
    min_grad_norm_sq: f64,
    final_suboptimality: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_to_target: Option<f64>,
    trajectory_file: String,
}

#[derive(Serialize)]
struct TrailingSummary {
    window: f64,
    mean: f64,
    variance: f64,
}

#[derive(Serialize)]
struct AlgorithmSummary {
    runs: usize,
    best: BestSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    trailing: Option<TrailingSummary>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    f_floor: f64,
    floor_convention: &'static str,
    best_rule: BestRule,
    eval_every: u64,
    algorithms: BTreeMap<&'a str, AlgorithmSummary>,
}

fn gamma_label(gamma: Option<f64>) -> String {
    match gamma {
        None => "auto".to_string(),
        Some(g) => format!("{g}"),
    }
}

/// Execute every cell of the experiment, write all output files, and return
/// the in-memory results. Relative paths resolve against `base_dir`.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<RaceResult> {
    config.validate()?;
    let problem = config.problem.build(base_dir)?;
    let obj = problem.objective();
    let model = config.workers.build(base_dir)?;
    let budgets = config.budgets.to_budgets();
    let options = RunOptions {
        eval_every: config.effective_eval_every(obj.num_components(), obj.dim()),
        record_trace: config.record_traces,
    };
    let out_dir = super::config::resolve_path(base_dir, &config.output_dir);
    fs::create_dir_all(&out_dir)?;

    let mut cells: Vec<CellOutcome> = Vec::new();
    for algo in &config.algorithms {
        for gamma in algo.gamma.values()? {
            for &seed in &config.seeds {
                let report = run_cell(obj, &model, algo, gamma, &budgets, &options, seed)?;
                let glabel = gamma_label(gamma);
                let stem = format!("{}_{}_{}", algo.label(), glabel, seed);
                let trajectory_file = format!("trajectory_{stem}.csv");
                let file = fs::File::create(out_dir.join(&trajectory_file))?;
                report.write_csv(BufWriter::new(file))?;
                if let Some(trace) = &report.trace {
                    fs::write(out_dir.join(format!("trace_{stem}.json")), trace.to_json()?)?;
                }
                cells.push(CellOutcome {
                    algorithm: algo.name.clone(),
                    label: algo.label().to_string(),
                    gamma,
                    gamma_label: glabel,
                    seed,
                    trajectory_file,
                    report,
                });
            }
        }
    }

    let (f_floor, floor_convention) = match problem.closed_form_floor() {
        Some(v) => (v, "quadratic_closed_form"),
        None => {
            let min = cells
                .iter()
                .flat_map(|c| &c.report.trajectory)
                .map(|p| p.f_value)
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            if !min.is_finite() {
                return Err(Error::Config(
                    "no finite objective value observed; cannot anchor suboptimality".into(),
                ));
            }
            (min, "min_observed")
        }
    };

    let mut best: BTreeMap<String, usize> = BTreeMap::new();
    let mut summaries: BTreeMap<&str, AlgorithmSummary> = BTreeMap::new();
    for algo in &config.algorithms {
        let label = algo.label();
        let group: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].label == label).collect();
        let group_cells: Vec<CellOutcome> = group.iter().map(|&i| cells[i].clone()).collect();
        let local = best_run_select(&group_cells, config.best_rule, f_floor)?;
        let winner = group[local];
        best.insert(label.to_string(), winner);

        let cell = &cells[winner];
        let mut series = fs::File::create(out_dir.join(format!("best_{label}.csv")))
            .map(BufWriter::new)?;
        writeln!(series, "time,suboptimality")?;
        for p in &cell.report.trajectory {
            writeln!(series, "{:.17e},{:.17e}", p.time, p.f_value - f_floor)?;
        }
        series.flush()?;

        let trailing = match config.trailing_window {
            Some(window) => {
                let (mean, variance) = summarize_variance(&cell.report.trajectory, window)?;
                Some(TrailingSummary {
                    window,
                    mean,
                    variance,
                })
            }
            None => None,
        };
        let time_to = match config.best_rule {
            BestRule::FirstToTarget(eps) => {
                time_to_target(&cell.report.trajectory, f_floor + eps)
            }
            BestRule::MinTerminalF => None,
        };
        summaries.insert(
            label,
            AlgorithmSummary {
                runs: group.len(),
                best: BestSummary {
                    gamma: cell.gamma,
                    gamma_label: cell.gamma_label.clone(),
                    seed: cell.seed,
                    stop: cell.report.stop,
                    iterations: cell.report.iterations,
                    total_time: cell.report.total_time,
                    final_f: cell.report.final_f,
                    min_grad_norm_sq: cell.report.min_grad_norm_sq,
                    final_suboptimality: cell.report.final_f - f_floor,
                    time_to_target: time_to,
                    trajectory_file: cell.trajectory_file.clone(),
                },
                trailing,
            },
        );
    }

    let doc = SummaryDoc {
        f_floor,
        floor_convention,
        best_rule: config.best_rule,
        eval_every: options.eval_every,
        algorithms: summaries,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(out_dir.join("summary.json"), text)?;

    Ok(RaceResult {
        f_floor,
        floor_convention,
        cells,
        best,
        output_dir: out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{
        BudgetConfig, GammaSpec, ProblemConfig, TauSpec, WorkerConfig, WorkerMode,
    };
    use crate::objectives::QuadraticSpec;

    fn quadratic_problem() -> ProblemConfig {
        ProblemConfig::Quadratic(QuadraticSpec {
            m: 20,
            d: 3,
            lambda: 0.2,
            s: 1.0,
            seed: 11,
        })
    }

    fn workers(n: usize) -> WorkerConfig {
        WorkerConfig {
            n,
            mode: WorkerMode::Static,
            tau: Some(TauSpec::Formula("sqrt(i)".into())),
            schedule_file: None,
            min_fraction: None,
        }
    }

    fn algo(name: &str, gamma: GammaSpec) -> AlgorithmConfig {
        AlgorithmConfig {
            name: name.into(),
            label: None,
            gamma,
            batch_size: None,
            refresh_prob: None,
            sampler: Default::default(),
            sgd_auto: None,
        }
    }

    fn base_config(out: &Path) -> ExperimentConfig {
        ExperimentConfig {
            problem: quadratic_problem(),
            workers: workers(3),
            algorithms: vec![
                algo("freya_page", GammaSpec::Pow2([-3, -2])),
                algo("soviet_page", GammaSpec::Fixed(0.125)),
            ],
            seeds: vec![1, 2],
            budgets: BudgetConfig {
                max_iterations: Some(30),
                ..BudgetConfig::default()
            },
            eval_every: None,
            best_rule: BestRule::MinTerminalF,
            trailing_window: None,
            record_traces: false,
            output_dir: out.to_path_buf(),
        }
    }

    fn synthetic_cell(gamma: Option<f64>, seed: u64, fs: &[f64]) -> CellOutcome {
        let trajectory: Vec<TrajectoryPoint> = fs
            .iter()
            .enumerate()
            .map(|(k, &f)| TrajectoryPoint {
                k: k as i64,
                time: k as f64,
                grad_norm_sq: f,
                f_value: f,
            })
            .collect();
        let final_f = *fs.last().unwrap();
        CellOutcome {
            algorithm: "hero_gd".into(),
            label: "hero_gd".into(),
            gamma,
            gamma_label: gamma_label(gamma),
            seed,
            trajectory_file: String::new(),
            report: OptimizerReport {
                algorithm: "hero_gd".into(),
                trajectory,
                stop: StopReason::IterationBudget,
                iterations: fs.len() as u64 - 1,
                total_time: fs.len() as f64 - 1.0,
                min_grad_norm_sq: final_f,
                final_f,
                trace: None,
                max_delay: None,
            },
        }
    }

    #[test]
    fn single_gd_cell_produces_a_monotone_trajectory() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig {
            problem: ProblemConfig::Quadratic(QuadraticSpec {
                m: 10,
                d: 3,
                lambda: 0.1,
                s: 1.0,
                seed: 3,
            }),
            workers: WorkerConfig {
                n: 1,
                mode: WorkerMode::Static,
                tau: Some(TauSpec::Constant(1.0)),
                schedule_file: None,
                min_fraction: None,
            },
            algorithms: vec![algo("hero_gd", GammaSpec::Auto)],
            seeds: vec![1],
            budgets: BudgetConfig {
                max_iterations: Some(40),
                ..BudgetConfig::default()
            },
            eval_every: None,
            best_rule: BestRule::MinTerminalF,
            trailing_window: None,
            record_traces: false,
            output_dir: PathBuf::from("out"),
        };
        let result = run_experiment(&config, dir.path()).unwrap();
        assert_eq!(result.cells.len(), 1);
        assert_eq!(result.floor_convention, "quadratic_closed_form");

        let csv = fs::read_to_string(
            result.output_dir.join(&result.cells[0].trajectory_file),
        )
        .unwrap();
        let fs_column: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(fs_column.len(), 41);
        for w in fs_column.windows(2) {
            assert!(w[1] <= w[0], "f must not increase under 1/L gradient descent");
        }
        assert!(result.output_dir.join("best_hero_gd.csv").exists());
        assert!(result.output_dir.join("summary.json").exists());
    }

    #[test]
    fn best_run_selection_rules_and_ties() {
        let a = synthetic_cell(Some(0.5), 1, &[10.0, 5.0, 1.0]);
        let b = synthetic_cell(Some(0.25), 1, &[10.0, 2.0, 2.0]);
        // Lowest terminal f.
        assert_eq!(
            best_run_select(&[a.clone(), b.clone()], BestRule::MinTerminalF, 0.0).unwrap(),
            0
        );
        // First to reach floor + ε, even though its terminal f is worse.
        assert_eq!(
            best_run_select(&[a.clone(), b.clone()], BestRule::FirstToTarget(2.0), 0.0).unwrap(),
            1
        );
        // Terminal tie → smaller γ wins.
        let c = synthetic_cell(Some(0.125), 2, &[10.0, 3.0, 1.0]);
        let d = synthetic_cell(Some(0.5), 1, &[10.0, 3.0, 1.0]);
        assert_eq!(
            best_run_select(&[d.clone(), c.clone()], BestRule::MinTerminalF, 0.0).unwrap(),
            1
        );
        // γ tie → smaller seed wins.
        let e = synthetic_cell(Some(0.5), 3, &[10.0, 3.0, 1.0]);
        assert_eq!(
            best_run_select(&[e, d], BestRule::MinTerminalF, 0.0).unwrap(),
            1
        );
        // Single run selects itself; empty input is an error.
        assert_eq!(
            best_run_select(&[a.clone()], BestRule::MinTerminalF, 0.0).unwrap(),
            0
        );
        assert!(best_run_select(&[], BestRule::MinTerminalF, 0.0).is_err());
        // A run that never reaches the target loses to one that does.
        let never = synthetic_cell(Some(0.0625), 1, &[10.0, 9.0, 8.0]);
        assert_eq!(
            best_run_select(&[never, a], BestRule::FirstToTarget(2.0), 0.0).unwrap(),
            1
        );
    }

    #[test]
    fn variance_summary_matches_the_population_convention() {
        let constant = synthetic_cell(Some(0.5), 1, &[4.0, 4.0, 4.0]);
        let (mean, var) = summarize_variance(&constant.report.trajectory, 2.0).unwrap();
        assert_eq!((mean, var), (4.0, 0.0));

        // Two samples a, b in the window → variance ((a−b)/2)².
        let two = synthetic_cell(Some(0.5), 1, &[9.0, 3.0, 7.0]);
        let (mean, var) = summarize_variance(&two.report.trajectory, 1.0).unwrap();
        assert_eq!(mean, 5.0);
        assert_eq!(var, 4.0);

        // Window zero keeps only the final sample.
        let (mean, var) = summarize_variance(&two.report.trajectory, 0.0).unwrap();
        assert_eq!((mean, var), (7.0, 0.0));

        // Window longer than the run is an error.
        assert!(summarize_variance(&two.report.trajectory, 2.5).is_err());
    }

    #[test]
    fn rerunning_a_config_reproduces_every_byte() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(Path::new("run_a"));
        config.trailing_window = Some(1.0);
        let first = run_experiment(&config, dir.path()).unwrap();
        config.output_dir = PathBuf::from("run_b");
        let second = run_experiment(&config, dir.path()).unwrap();

        let list = |p: &Path| -> Vec<String> {
            let mut names: Vec<String> = fs::read_dir(p)
                .unwrap()
                .map(|e| e.unwrap().file_name().into_string().unwrap())
                .collect();
            names.sort();
            names
        };
        let names = list(&first.output_dir);
        assert_eq!(names, list(&second.output_dir));
        assert!(names.contains(&"summary.json".to_string()));
        for name in names {
            let a = fs::read(first.output_dir.join(&name)).unwrap();
            let b = fs::read(second.output_dir.join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn permuting_the_algorithm_list_changes_no_trajectory() {
        let dir = tempfile::tempdir().unwrap();
        let config = base_config(Path::new("fwd"));
        let fwd = run_experiment(&config, dir.path()).unwrap();
        let mut reversed = base_config(Path::new("rev"));
        reversed.algorithms.reverse();
        let rev = run_experiment(&reversed, dir.path()).unwrap();

        assert_eq!(fwd.cells.len(), rev.cells.len());
        for cell in &fwd.cells {
            let a = fs::read(fwd.output_dir.join(&cell.trajectory_file)).unwrap();
            let b = fs::read(rev.output_dir.join(&cell.trajectory_file)).unwrap();
            assert_eq!(a, b, "{} depends on execution order", cell.trajectory_file);
        }
    }

    #[test]
    fn race_emits_best_series_anchored_at_the_closed_form_floor() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(Path::new("race"));
        config.best_rule = BestRule::FirstToTarget(1e-2);
        let result = run_experiment(&config, dir.path()).unwrap();

        assert_eq!(result.cells.len(), 2 * 2 + 2); // pow2 grid ×2 seeds + fixed ×2 seeds
        for label in ["freya_page", "soviet_page"] {
            let best = result.best_cell(label).unwrap();
            assert_eq!(best.label, label);
            let series =
                fs::read_to_string(result.output_dir.join(format!("best_{label}.csv"))).unwrap();
            let mut prev_time = f64::NEG_INFINITY;
            for line in series.lines().skip(1) {
                let (t, sub) = line.split_once(',').unwrap();
                let t: f64 = t.parse().unwrap();
                let sub: f64 = sub.parse().unwrap();
                assert!(t >= prev_time);
                assert!(sub.is_finite());
                prev_time = t;
            }
        }
        let summary =
            fs::read_to_string(result.output_dir.join("summary.json")).unwrap();
        assert!(summary.contains("\"floor_convention\": \"quadratic_closed_form\""));
        assert!(summary.contains("first_to_target"));
    }

    #[test]
    fn csv_problems_fall_back_to_the_observed_floor() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("tiny.csv"),
            "1,0.8,-0.4\n0,-0.5,0.3\n1,0.2,0.9\n0,-0.7,-0.6\n",
        )
        .unwrap();
        let config = ExperimentConfig {
            problem: ProblemConfig::Csv {
                path: PathBuf::from("tiny.csv"),
                label_column: 0,
                has_header: false,
                l2: 0.05,
            },
            workers: workers(2),
            algorithms: vec![algo("hero_gd", GammaSpec::Auto)],
            seeds: vec![4],
            budgets: BudgetConfig {
                max_iterations: Some(20),
                ..BudgetConfig::default()
            },
            eval_every: None,
            best_rule: BestRule::MinTerminalF,
            trailing_window: None,
            record_traces: false,
            output_dir: PathBuf::from("out"),
        };
        let result = run_experiment(&config, dir.path()).unwrap();
        assert_eq!(result.floor_convention, "min_observed");
        // The floor is the best value this experiment ever saw, so the best
        // run's terminal suboptimality is exactly zero under 1/L descent.
        let best = result.best_cell("hero_gd").unwrap();
        assert_eq!(best.report.final_f, result.f_floor);
    }
}
