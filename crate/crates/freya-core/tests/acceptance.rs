//! Release gate for the whole engine: twelve end-to-end criteria, one test
//! each, every test printing a single `PASS criterion N` line with the
//! measured quantity (run with `--nocapture` to see them).
//!
//! Tolerances are part of the contract and are deliberately not tunable:
//! deterministic duration bounds are checked with zero slack, expectation
//! bounds get a one-sided 99% allowance over fixed seed sets, and algebraic
//! identities must hold bit-for-bit. Nothing here may be weakened to make a
//! failing criterion pass; a failure means the engine (or the calculus) is
//! wrong.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use freya_core::collectors::{
    compute_batch, compute_batch_difference, compute_gradient, SamplerKind,
};
use freya_core::harness::{
    run_experiment, time_to_target, AlgorithmConfig, BestRule, BudgetConfig, ExperimentConfig,
    GammaSpec, ProblemConfig, RaceResult, TauSpec, WorkerConfig, WorkerMode,
};
use freya_core::objectives::{
    full_gradient_reference, FiniteSumObjective, QuadraticProblem, QuadraticSpec,
};
use freya_core::optimizers::{
    run_freya_page, run_soviet_page, Budgets, FreyaPage, FreyaPageParams, RunOptions,
    SovietPageParams,
};
use freya_core::rng::WorkerRngs;
use freya_core::simclock::WorkerTimeModel;
use freya_core::theory;

/// One-sided 99% normal quantile, used wherever a criterion bounds an
/// expectation rather than a single draw.
const Z_99: f64 = 2.3263478740408408;

fn quadratic(m: usize, d: usize, lambda: f64, s: f64, seed: u64) -> QuadraticProblem {
    QuadraticProblem::generate(QuadraticSpec {
        m,
        d,
        lambda,
        s,
        seed,
    })
    .expect("valid quadratic spec")
}

fn sqrt_pool(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64).sqrt()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.max(0.0).sqrt())
}

/// Independent re-derivation of the equilibrium scan, written directly from
/// the definition: sort ascending, accumulate harmonic rates, take the first
/// prefix length minimizing `(s + j) / rate`.
fn scan_by_definition(s: f64, taus: &[f64]) -> (f64, usize) {
    let mut sorted = taus.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rate = 0.0f64;
    let mut best = f64::INFINITY;
    let mut best_j = 1usize;
    for (idx, tau) in sorted.iter().enumerate() {
        rate += 1.0 / tau;
        let j = idx + 1;
        let candidate = (s + j as f64) / rate;
        if candidate < best {
            best = candidate;
            best_j = j;
        }
    }
    (best, best_j)
}

// --- criterion 1: the equilibrium scan matches a brute-force evaluation ----

#[test]
fn criterion_01_equilibrium_scan_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for case in 0..10_000 {
        let n = rng.gen_range(1..=20);
        let s = if case % 3 == 0 {
            rng.gen_range(0..=500) as f64
        } else {
            rng.gen_range(0.0..1000.0)
        };
        let mut taus: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
            .collect();
        // Force duplicates into a third of the cases so ties are exercised.
        if case % 3 == 1 && n > 1 {
            let v = taus[0];
            let idx = rng.gen_range(1..n);
            taus[idx] = v;
        }
        let got = theory::equilibrium_time(s, &taus).unwrap();
        let (want, want_j) = scan_by_definition(s, &taus);
        assert_eq!(got.value.to_bits(), want.to_bits(), "case {case}");
        assert_eq!(got.j_star, want_j, "case {case}");
    }

    // Limit cases: an instantaneous worker, an all-unavailable pool, and a
    // straggler so slow it cannot change the optimum.
    let zero = theory::equilibrium_time(12.0, &[0.0, 3.0, 7.0]).unwrap();
    assert_eq!(zero.value, 0.0);
    let stuck = theory::equilibrium_time(5.0, &[f64::INFINITY, f64::INFINITY]).unwrap();
    assert!(stuck.value.is_infinite());
    let base: Vec<f64> = (1..=9).map(|i| i as f64).collect();
    let t9 = theory::equilibrium_time(20.0, &base).unwrap().value;
    let mut with_straggler = base.clone();
    with_straggler.push(1e9);
    let t10 = theory::equilibrium_time(20.0, &with_straggler).unwrap().value;
    assert!(
        ((t10 - t9) / t9).abs() <= 1e-9,
        "straggler shifted the scan: {t9} vs {t10}"
    );

    println!("PASS criterion 1: equilibrium scan == brute force on 10000 fuzz cases + limits");
}

// --- criteria 2 and 3: deterministic collector duration bounds ------------

struct BatchCase {
    s: usize,
    taus: Vec<f64>,
    seed: u64,
}

fn batch_corpus() -> Vec<BatchCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2C3);
    (0..500)
        .map(|i| {
            let n = rng.gen_range(1..=64);
            let s = rng.gen_range(1..=512);
            let taus = (0..n)
                .map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
                .collect();
            BatchCase {
                s,
                taus,
                seed: 1000 + i,
            }
        })
        .collect()
}

#[test]
fn criterion_02_batch_difference_duration_within_four_t_star() {
    let problem = quadratic(64, 2, 0.1, 1.0, 7);
    let x = vec![0.4, -0.9];
    let y = vec![-0.2, 0.6];
    let mut worst = 0.0f64;
    for case in batch_corpus() {
        let model = WorkerTimeModel::fixed(case.taus.clone()).unwrap();
        let mut rngs = WorkerRngs::new(case.seed, case.taus.len());
        let res =
            compute_batch_difference(&problem, &model, 0, case.s, &x, &y, &mut rngs).unwrap();
        let bound = theory::batch_difference_bound(case.s, &case.taus).unwrap();
        assert!(
            res.simulated_duration <= bound,
            "S={} n={} duration {} exceeds 4t* = {}",
            case.s,
            case.taus.len(),
            res.simulated_duration,
            bound
        );
        worst = worst.max(res.simulated_duration / bound);
    }
    println!(
        "PASS criterion 2: batch-difference duration <= 4t*(S) on 500 pools (worst ratio {worst:.3})"
    );
}

#[test]
fn criterion_03_batch_duration_within_two_t_star() {
    let problem = quadratic(64, 2, 0.1, 1.0, 7);
    let x = vec![0.4, -0.9];
    let mut worst = 0.0f64;
    for case in batch_corpus() {
        let model = WorkerTimeModel::fixed(case.taus.clone()).unwrap();
        let mut rngs = WorkerRngs::new(case.seed, case.taus.len());
        let res = compute_batch(&problem, &model, 0, case.s, &x, &mut rngs).unwrap();
        let bound = theory::batch_bound(case.s, &case.taus).unwrap();
        assert!(
            res.simulated_duration <= bound,
            "S={} n={} duration {} exceeds 2t* = {}",
            case.s,
            case.taus.len(),
            res.simulated_duration,
            bound
        );
        worst = worst.max(res.simulated_duration / bound);
    }
    println!("PASS criterion 3: batch duration <= 2t*(S) on 500 pools (worst ratio {worst:.3})");
}

// --- criterion 4: full-gradient expected duration ---------------------------

#[test]
fn criterion_04_gradient_collection_mean_duration_within_bound() {
    let ms = [20usize, 50, 100, 200, 400];
    let ns = [2usize, 5, 8, 16, 32];
    let shapes: [fn(usize) -> Vec<f64>; 4] = [
        |n| vec![1.0; n],
        sqrt_pool,
        |n| (1..=n).map(|i| i as f64).collect(),
        |n| (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 10.0 }).collect(),
    ];
    let mut worst_margin = f64::NEG_INFINITY;
    for (mi, &m) in ms.iter().enumerate() {
        for (si, shape) in shapes.iter().enumerate() {
            let n = ns[(mi + si) % ns.len()];
            let taus = shape(n);
            let problem = quadratic(m, 2, 0.1, 1.0, 40 + mi as u64);
            let model = WorkerTimeModel::fixed(taus.clone()).unwrap();
            let x = vec![0.8, -0.3];
            let durations: Vec<f64> = (0..200)
                .map(|seed| {
                    let mut rngs = WorkerRngs::new(seed, n);
                    compute_gradient(&problem, &model, 0, &x, &mut rngs)
                        .unwrap()
                        .simulated_duration
                })
                .collect();
            let (mean, sd) = mean_sd(&durations);
            let bound = theory::gradient_collection_bound(m, &taus).unwrap();
            let allowance = Z_99 * sd / (durations.len() as f64).sqrt();
            assert!(
                mean <= bound + allowance,
                "m={m} n={n} shape {si}: mean {mean} vs bound {bound} (+{allowance})"
            );
            worst_margin = worst_margin.max((mean - bound) / bound);
        }
    }
    println!(
        "PASS criterion 4: mean gradient-collection duration within the expected-time bound \
         on 20 configs x 200 seeds (worst (mean-bound)/bound = {worst_margin:.3})"
    );
}

// --- criterion 5: collected gradients are exact ----------------------------

#[test]
fn criterion_05_gradient_collection_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    for case in 0..100 {
        let m = rng.gen_range(1..=60);
        let d = rng.gen_range(2..=6);
        let n = rng.gen_range(1..=10);
        let problem = quadratic(m, d, 0.05, 1.0, 500 + case);
        let mut taus: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                if u < 0.15 {
                    f64::INFINITY
                } else if u < 0.25 {
                    0.0
                } else {
                    10f64.powf(rng.gen_range(-1.0..1.0))
                }
            })
            .collect();
        if !taus.iter().any(|t| t.is_finite()) {
            taus[0] = 1.0;
        }
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let model = WorkerTimeModel::fixed(taus).unwrap();
        let mut rngs = WorkerRngs::new(case, n);
        let got = compute_gradient(&problem, &model, 0, &x, &mut rngs).unwrap();
        let want = full_gradient_reference(&problem, &x).unwrap();
        let tol = 1e-12 * dot(&want, &want).sqrt().max(1.0);
        assert!(
            l2_dist(&got.vector, &want) <= tol,
            "case {case}: exactness violated by {}",
            l2_dist(&got.vector, &want)
        );
    }
    println!(
        "PASS criterion 5: collected full gradients match the sequential reference to 1e-12 \
         on 100 pools with unavailable and instantaneous workers"
    );
}

// --- criterion 6: the batch-difference estimator is unbiased ---------------

#[test]
fn criterion_06_batch_difference_is_unbiased() {
    let problem = quadratic(200, 10, 0.1, 1.0, 31);
    let d = problem.dim();
    let model = WorkerTimeModel::fixed(sqrt_pool(6)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = x.iter().map(|v| v + rng.gen_range(-0.2..0.2)).collect();
    let gx = full_gradient_reference(&problem, &x).unwrap();
    let gy = full_gradient_reference(&problem, &y).unwrap();
    let truth: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a - b).collect();

    let n_draws = 100_000usize;
    let s = 8;
    let mut sums = vec![0.0f64; d];
    let mut sq_sums = vec![0.0f64; d];
    for seed in 0..n_draws {
        let mut rngs = WorkerRngs::new(seed as u64, model.n_workers());
        let est = compute_batch_difference(&problem, &model, 0, s, &x, &y, &mut rngs)
            .unwrap()
            .vector;
        for (j, v) in est.iter().enumerate() {
            sums[j] += v;
            sq_sums[j] += v * v;
        }
    }
    let nf = n_draws as f64;
    let mut worst_z = 0.0f64;
    for j in 0..d {
        let mean = sums[j] / nf;
        let var = (sq_sums[j] - nf * mean * mean) / (nf - 1.0);
        let se = var.max(0.0).sqrt() / nf.sqrt();
        let z = (mean - truth[j]).abs() / se;
        assert!(
            z <= 3.0,
            "coordinate {j}: |mean - truth| = {} exceeds 3 se = {}",
            (mean - truth[j]).abs(),
            3.0 * se
        );
        worst_z = worst_z.max(z);
    }
    println!(
        "PASS criterion 6: batch-difference estimator unbiased at S=8, N=100000 \
         (worst |z| = {worst_z:.2})"
    );
}

// --- criterion 7: the iteration guarantee at optimal parameters ------------

#[test]
fn criterion_07_page_hits_stationarity_within_predicted_iterations() {
    let problem = quadratic(1000, 50, 1e-3, 1.0, 2024);
    let taus = sqrt_pool(100);
    let model = WorkerTimeModel::fixed(taus.clone()).unwrap();
    let hints = problem.smoothness().expect("quadratics carry hints");
    let (l_minus, l_pm) = (hints.l_minus, hints.l_pm);

    let x0 = problem.initial_point();
    let f0 = problem.value(&x0).unwrap();
    let fstar = problem.optimal_value().unwrap();
    let delta0 = f0 - fstar;
    let g0 = full_gradient_reference(&problem, &x0).unwrap();
    let eps = 1e-3 * dot(&g0, &g0);

    let opt = theory::optimal_params(1000, &taus, l_minus, l_pm).unwrap();
    let k_page = theory::page_iterations(delta0, eps, opt.p, opt.s, l_minus, l_pm).unwrap();
    assert!(k_page >= 1.0, "degenerate iteration budget {k_page}");

    let params = FreyaPageParams {
        gamma: None, // the stepsize rule at (S*, p*)
        batch_size: Some(opt.s),
        refresh_prob: Some(opt.p),
        sampler: SamplerKind::default(),
    };
    let budgets = Budgets {
        max_iterations: k_page.ceil() as u64,
        max_sim_time: f64::INFINITY,
        // Well below eps: stopping early can only make the recorded minimum
        // an overestimate of the true one, never an underestimate.
        grad_target: Some(eps / 10.0),
        f_target: None,
    };
    let options = RunOptions {
        eval_every: 1,
        record_trace: false,
    };

    let seeds: Vec<u64> = (0..20).collect();
    let mut mins = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let report = run_freya_page(&problem, &model, &params, &budgets, &options, seed).unwrap();
        let min_before_k = report
            .trajectory
            .iter()
            .filter(|p| (p.k as f64) < k_page)
            .map(|p| p.grad_norm_sq)
            .fold(f64::INFINITY, f64::min);
        mins.push(min_before_k);
    }
    let mean = mins.iter().sum::<f64>() / mins.len() as f64;
    assert!(
        mean <= eps,
        "mean min grad norm^2 {mean} exceeds eps {eps} (S*={}, p*={}, K={k_page:.0})",
        opt.s,
        opt.p
    );
    println!(
        "PASS criterion 7: mean over 20 seeds of min grad norm^2 = {mean:.3e} <= eps = {eps:.3e} \
         within K = {k_page:.0} iterations at S* = {}, p* = {:.4}",
        opt.s, opt.p
    );
}

// --- criterion 8: the race against the equal-allocation baseline -----------

fn race_config(
    spec: QuadraticSpec,
    n: usize,
    eps_abs: f64,
    target_f: f64,
    out: PathBuf,
) -> ExperimentConfig {
    let page_arm = |name: &str| AlgorithmConfig {
        name: name.to_string(),
        label: None,
        gamma: GammaSpec::Pow2([-10, 10]),
        batch_size: None,
        refresh_prob: None,
        sampler: SamplerKind::default(),
        sgd_auto: None,
    };
    ExperimentConfig {
        problem: ProblemConfig::Quadratic(spec),
        workers: WorkerConfig {
            n,
            mode: WorkerMode::Static,
            tau: Some(TauSpec::Formula("sqrt(i)".to_string())),
            schedule_file: None,
            min_fraction: None,
        },
        algorithms: vec![page_arm("freya_page"), page_arm("soviet_page")],
        seeds: vec![11],
        budgets: BudgetConfig {
            max_iterations: Some(20_000),
            max_sim_time: None,
            grad_target: None,
            f_target: Some(target_f),
        },
        eval_every: Some(10),
        best_rule: BestRule::FirstToTarget(eps_abs),
        trailing_window: None,
        record_traces: false,
        output_dir: out,
    }
}

fn best_time_to_target(race: &RaceResult, label: &str, eps_abs: f64) -> f64 {
    race.cells
        .iter()
        .filter(|c| c.label == label)
        .filter_map(|c| time_to_target(&c.report.trajectory, race.f_floor + eps_abs))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn criterion_08_freya_beats_equal_allocation_and_scales_better() {
    let spec = QuadraticSpec {
        m: 1000,
        d: 10,
        lambda: 1e-2,
        s: 1.0,
        seed: 2024,
    };
    let problem = QuadraticProblem::generate(spec).unwrap();
    let f0 = problem.value(&problem.initial_point()).unwrap();
    let fstar = problem.optimal_value().unwrap();
    let eps_abs = 1e-4 * (f0 - fstar);
    let target_f = fstar + eps_abs;

    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut ratios = Vec::new();
    let mut first_times = None;
    for &n in &[100usize, 1000] {
        let out = tmp.join(format!("acceptance_race_n{n}"));
        let config = race_config(spec, n, eps_abs, target_f, out);
        let race = run_experiment(&config, Path::new(".")).unwrap();
        let t_freya = best_time_to_target(&race, "freya_page", eps_abs);
        let t_soviet = best_time_to_target(&race, "soviet_page", eps_abs);
        assert!(
            t_freya.is_finite() && t_soviet.is_finite(),
            "n={n}: a method never reached the target (freya {t_freya}, soviet {t_soviet})"
        );
        ratios.push(t_freya / t_soviet);
        if first_times.is_none() {
            first_times = Some((t_freya, t_soviet));
        }
    }
    let (t_freya_100, t_soviet_100) = first_times.unwrap();
    assert!(
        t_freya_100 < t_soviet_100,
        "expected a strict win at n=100: {t_freya_100} vs {t_soviet_100}"
    );
    assert!(
        ratios[1] < ratios[0],
        "speedup should grow with the pool: ratios {ratios:?}"
    );
    println!(
        "PASS criterion 8: time-to-target {t_freya_100:.1} < {t_soviet_100:.1} at n=100, \
         and the freya/soviet ratio improves from {:.3} to {:.3} at n=1000",
        ratios[0], ratios[1]
    );
}

// --- criterion 9: straggler indifference ------------------------------------

#[test]
fn criterion_09_one_straggler_is_free_for_freya_and_fatal_for_soviet() {
    let problem = quadratic(1000, 50, 1e-3, 1.0, 2024);
    let params = FreyaPageParams {
        gamma: None,
        batch_size: Some(32),
        refresh_prob: None,
        sampler: SamplerKind::default(),
    };
    let budgets = Budgets {
        max_iterations: 40,
        max_sim_time: f64::INFINITY,
        grad_target: None,
        f_target: None,
    };
    let options = RunOptions {
        eval_every: 1,
        record_trace: true,
    };
    let seed = 3;

    let uniform = WorkerTimeModel::fixed(vec![1.0; 50]).unwrap();
    let mut slowed_taus = vec![1.0; 49];
    slowed_taus.push(1e9);
    let slowed = WorkerTimeModel::fixed(slowed_taus).unwrap();
    let dropped = WorkerTimeModel::fixed(vec![1.0; 49]).unwrap();

    let run_a = run_freya_page(&problem, &uniform, &params, &budgets, &options, seed).unwrap();
    let run_b = run_freya_page(&problem, &slowed, &params, &budgets, &options, seed).unwrap();
    let run_c = run_freya_page(&problem, &dropped, &params, &budgets, &options, seed).unwrap();

    let shift = (run_b.total_time - run_a.total_time).abs() / run_a.total_time;
    assert!(
        shift < 0.05,
        "straggler moved total time by {:.1}%",
        100.0 * shift
    );

    // Against the 49-worker pool the run is identical except that every
    // broadcast hands the straggler one task it never finishes.
    assert_eq!(run_b.total_time.to_bits(), run_c.total_time.to_bits());
    assert_eq!(run_b.trajectory.len(), run_c.trajectory.len());
    for (pb, pc) in run_b.trajectory.iter().zip(&run_c.trajectory) {
        assert_eq!(pb.time.to_bits(), pc.time.to_bits());
        assert_eq!(pb.f_value.to_bits(), pc.f_value.to_bits());
        assert_eq!(pb.grad_norm_sq.to_bits(), pc.grad_norm_sq.to_bits());
    }
    let trace_b = run_b.trace.as_ref().unwrap();
    let trace_c = run_c.trace.as_ref().unwrap();
    assert_eq!(trace_b.records.len(), trace_c.records.len());
    for (rb, rc) in trace_b.records.iter().zip(&trace_c.records) {
        assert_eq!(rb.k, rc.k);
        let dur_b = rb.t_end - rb.t_start;
        let dur_c = rc.t_end - rc.t_start;
        assert_eq!(dur_b.to_bits(), dur_c.to_bits(), "iteration {}", rb.k);
        assert_eq!(rb.dispatched, rc.dispatched + 1, "iteration {}", rb.k);
    }

    let soviet_params = SovietPageParams {
        gamma: None,
        batch_size: Some(32),
        refresh_prob: None,
    };
    let sov_a = run_soviet_page(&problem, &uniform, &soviet_params, &budgets, &options, seed)
        .unwrap()
        .total_time;
    let sov_b = run_soviet_page(&problem, &slowed, &soviet_params, &budgets, &options, seed)
        .unwrap()
        .total_time;
    assert!(
        sov_b / sov_a >= 1e6,
        "equal allocation should stall: {sov_a} -> {sov_b}"
    );

    println!(
        "PASS criterion 9: one 1e9-slow worker shifts freya total time by {:.2}% \
         (phase durations bit-equal to the 49-worker pool) while soviet slows {:.1e}x",
        100.0 * shift,
        sov_b / sov_a
    );
}

// --- criterion 10: per-iteration speed changes take effect immediately -----

#[test]
fn criterion_10_dynamic_speed_swap_is_honored_per_iteration() {
    let problem = quadratic(40, 3, 0.1, 1.0, 5);
    let s = 8usize;
    let x = vec![0.3, -0.2, 0.5];

    // Worker 2 runs at full speed for the preprocessing phase and iteration
    // 0, then takes 1e9 seconds per task during iteration 1.
    let two = WorkerTimeModel::dynamic(vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1e9]]).unwrap();
    let one = WorkerTimeModel::dynamic(vec![vec![1.0, 1.0, 1.0]]).unwrap();

    // Direct collector check: gradient tasks take tau each, so one worker
    // serves S tasks in S seconds while two share them in S/2.
    let mut rngs_two = WorkerRngs::new(9, 2);
    let mut rngs_one = WorkerRngs::new(9, 1);
    let both_fast = compute_batch(&problem, &two, 0, s, &x, &mut rngs_two).unwrap();
    let one_fast = compute_batch(&problem, &two, 1, s, &x, &mut rngs_two).unwrap();
    let solo = compute_batch(&problem, &one, 1, s, &x, &mut rngs_one).unwrap();
    assert_eq!(both_fast.simulated_duration, 4.0);
    assert_eq!(one_fast.simulated_duration.to_bits(), solo.simulated_duration.to_bits());
    assert_eq!(one_fast.simulated_duration, 8.0);

    // Same effect inside the optimizer: difference tasks cost two oracle
    // calls, so the solo iteration takes 2 S tau = 16 seconds exactly.
    let params = FreyaPageParams {
        gamma: Some(0.01),
        batch_size: Some(s),
        refresh_prob: Some(0.5),
        sampler: SamplerKind::default(),
    };
    let mut driver_two = FreyaPage::new(&problem, &two, &params, 77).unwrap();
    let mut driver_one = FreyaPage::new(&problem, &one, &params, 77).unwrap();
    let two_k0 = driver_two.step_with_coin(false).unwrap();
    let one_k0 = driver_one.step_with_coin(false).unwrap();
    let two_k1 = driver_two.step_with_coin(false).unwrap();
    let one_k1 = driver_one.step_with_coin(false).unwrap();
    assert_eq!(two_k0.simulated_duration, 8.0);
    assert_eq!(one_k0.simulated_duration, 16.0);
    assert_eq!(
        two_k1.simulated_duration.to_bits(),
        one_k1.simulated_duration.to_bits(),
        "with worker 2 parked, iteration 1 must cost exactly what the solo pool costs"
    );
    assert_eq!(two_k1.simulated_duration, 16.0);

    println!(
        "PASS criterion 10: a worker slowed at iteration 1 leaves that iteration's duration \
         equal to the one-worker pool (16.0) while iteration 0 still used both (8.0)"
    );
}

// --- criterion 11: bracketing inequalities and exact homogeneity -----------

#[test]
fn criterion_11_sandwich_bounds_and_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC11);
    for case in 0..10_000 {
        let n = rng.gen_range(1..=32);
        let taus: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
            .collect();
        let s = 10f64.powf(rng.gen_range(-1.0..3.3));
        let sandwich = theory::lemma_sandwich(s, &taus).unwrap();
        assert!(sandwich.holds, "case {case}: sandwich violated");
        let simple = theory::simple_upper_bounds_check(s, &taus).unwrap();
        assert!(simple.holds, "case {case}: closed-form upper bound violated");
    }
    for case in 0..1_000 {
        let n = rng.gen_range(1..=16);
        let taus: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-2.0..2.0)))
            .collect();
        let s = rng.gen_range(0.0..500.0);
        let c = 2f64.powi(rng.gen_range(-20..=20));
        let scaled: Vec<f64> = taus.iter().map(|t| c * t).collect();
        let base = theory::equilibrium_time(s, &taus).unwrap();
        let got = theory::equilibrium_time(s, &scaled).unwrap();
        assert_eq!(
            got.value.to_bits(),
            (c * base.value).to_bits(),
            "case {case}: homogeneity broke at c = {c}"
        );
        assert_eq!(got.j_star, base.j_star);
    }
    println!(
        "PASS criterion 11: bracketing + closed-form bounds on 10000 pools, \
         power-of-two homogeneity bit-exact on 1000 pools"
    );
}

// --- criterion 12: parameter algebra ----------------------------------------

#[test]
fn criterion_12_parameter_rules_match_their_algebra() {
    // Full refresh kills the variance term: gamma collapses to 1/L-.
    let g = theory::page_stepsize(1.0, 7, 2.5, 3.7).unwrap();
    assert_eq!(g.to_bits(), (1.0f64 / 2.5).to_bits());
    // Without-replacement sampling with S = m does the same at any p.
    let g = theory::nice_stepsize(0.37, 240, 240, 1.7, 9.9).unwrap();
    assert_eq!(g.to_bits(), (1.0f64 / 1.7).to_bits());
    // Equal smoothness constants reduce the ratio rule to ceil(sqrt(m)).
    for m in 1..=2000usize {
        let choice = theory::ratio_params(m, 1.0, 1.0).unwrap();
        assert_eq!(choice.s, theory::ceil_sqrt(m), "m={m}");
        assert_eq!(choice.p, choice.s as f64 / m as f64);
    }
    assert_eq!(theory::ratio_params(100, 1.0, 0.0).unwrap().s, 1);
    assert_eq!(theory::ratio_params(4, 1.0, 1e9).unwrap().s, 4);

    // The batch-size optimizer agrees with an exhaustive scan driven purely
    // through the public equilibrium query.
    let pools: Vec<(usize, Vec<f64>)> = vec![
        (1, vec![1.0]),
        (2, vec![1.0, 3.0]),
        (17, sqrt_pool(5)),
        (100, vec![10.0; 10]),
        (500, {
            let mut r = ChaCha8Rng::seed_from_u64(0xC12);
            (0..20).map(|_| 10f64.powf(r.gen_range(-1.5..1.5))).collect()
        }),
        (1000, sqrt_pool(100)),
        (
            2000,
            (0..8).map(|i| if i < 4 { 1.0 } else { 25.0 }).collect(),
        ),
    ];
    let constants = [(1.0, 0.0), (2.0, 3.0), (1.0, 10.0)];
    for (m, taus) in &pools {
        let t_m = theory::equilibrium_time(*m as f64, taus).unwrap().value;
        for &(l_minus, l_pm) in &constants {
            let mut best_s = 1usize;
            let mut best_f = f64::INFINITY;
            for s in 1..=*m {
                let t_s = theory::equilibrium_time(s as f64, taus).unwrap().value;
                let f = l_minus * t_s + l_pm * (t_m * t_s).sqrt() / (s as f64).sqrt();
                if f < best_f || (f == best_f && s < best_s) {
                    best_f = f;
                    best_s = s;
                }
            }
            let t_best = theory::equilibrium_time(best_s as f64, taus).unwrap().value;
            let want_p = if l_minus * t_m <= best_f {
                1.0
            } else {
                t_best / t_m
            };
            let got = theory::optimal_params(*m, taus, l_minus, l_pm).unwrap();
            assert_eq!(got.s, best_s, "m={m} L-={l_minus} Lpm={l_pm}");
            assert_eq!(got.objective.to_bits(), best_f.to_bits());
            assert_eq!(got.p.to_bits(), want_p.to_bits());
        }
    }
    println!(
        "PASS criterion 12: stepsize degeneracies, the ratio rule, and the batch-size \
         optimizer all match their closed forms exactly"
    );
}
