//! Equilibrium-time calculus and parameter formulas.
//!
//! The central quantity is the *equilibrium time*
//!
//! ```text
//! t*(S, [τ₁..τₙ]) = min_{j ∈ [n]} ( Σ_{i≤j} 1/τᵢ )⁻¹ · (S + j),   τ₁ ≤ … ≤ τₙ,
//! ```
//!
//! the optimal makespan for collecting `S` unit tasks from `n` workers whose
//! task times are `τᵢ` seconds, when only the fastest `j` workers are used
//! and `j` is chosen optimally. Task times live on the extended half-line
//! `[0, ∞]` with the conventions `1/0 = ∞` and `1/∞ = 0`; a single
//! zero-time worker makes `t* = 0`, while `t* = ∞` only when every worker
//! is infinite. IEEE-754 arithmetic realizes exactly these conventions, so
//! the implementation leans on `f64` directly — all extended-real handling
//! is concentrated in [`SortedRates`].
//!
//! On top of `t*` sit the method-parameter formulas: stepsizes, iteration
//! counts, recommended batch sizes/probabilities, and end-to-end predicted
//! wall-clock times for Freya PAGE and the SGD variants.

use serde::Serialize;

use crate::error::{Error, Result};

/// Value and minimizer of the equilibrium-time scan.
///
/// `j_star` is 1-based (it counts how many of the fastest workers
/// participate); ties are broken toward the smallest `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumTime {
    pub value: f64,
    pub j_star: usize,
}

fn validate_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::InvalidParameter("taus must be nonempty".into()));
    }
    if taus.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(Error::InvalidParameter(
            "task times must be nonnegative (infinity allowed, NaN not)".into(),
        ));
    }
    Ok(())
}

/// Pre-sorted harmonic prefix rates for one task-time vector.
///
/// Sorting and prefix-summing once makes repeated `t*(S, ·)` queries (the
/// batch-size scan in [`optimal_params`]) O(n) each instead of O(n log n).
#[derive(Debug, Clone)]
pub struct SortedRates {
    /// Task times sorted ascending.
    taus: Vec<f64>,
    /// `prefix[j-1] = Σ_{i≤j} 1/τᵢ` (extended-real: may be `inf`).
    prefix: Vec<f64>,
}

impl SortedRates {
    pub fn new(taus: &[f64]) -> Result<Self> {
        validate_taus(taus)?;
        let mut sorted = taus.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prefix = Vec::with_capacity(sorted.len());
        let mut acc = 0.0f64;
        for &t in &sorted {
            acc += 1.0 / t; // 1/0 = inf, 1/inf = 0
            prefix.push(acc);
        }
        Ok(SortedRates {
            taus: sorted,
            prefix,
        })
    }

    pub fn n(&self) -> usize {
        self.taus.len()
    }

    /// Sorted task times.
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// `t*(s, ·)` with its minimizing prefix length (smallest on ties).
    pub fn equilibrium(&self, s: f64) -> EquilibriumTime {
        let (mut best, mut best_j) = (f64::INFINITY, 1);
        for (idx, &rate) in self.prefix.iter().enumerate() {
            let j = idx + 1;
            let candidate = (s + j as f64) / rate;
            if candidate < best {
                best = candidate;
                best_j = j;
            }
        }
        EquilibriumTime {
            value: best,
            j_star: best_j,
        }
    }

    /// Every 1-based `j` attaining the minimum (candidates are compared by
    /// exact `f64` equality; they are computed identically, so ties are
    /// well-defined).
    pub fn minimizers(&self, s: f64) -> Vec<usize> {
        let best = self.equilibrium(s).value;
        self.prefix
            .iter()
            .enumerate()
            .filter(|(idx, &rate)| (s + (idx + 1) as f64) / rate == best)
            .map(|(idx, _)| idx + 1)
            .collect()
    }
}

/// Equilibrium time `t*(s, taus)` for a nonnegative real task count `s`.
///
/// # Examples
///
/// ```
/// use freya_core::theory::equilibrium_time;
///
/// // Four unit-speed workers, 8 tasks: using all four gives (8+4)/4 = 3 s.
/// let t = equilibrium_time(8.0, &[1.0, 1.0, 1.0, 1.0]).unwrap();
/// assert_eq!(t.value, 3.0);
/// assert_eq!(t.j_star, 4);
///
/// // A zero-time worker collects everything instantly.
/// assert_eq!(equilibrium_time(5.0, &[0.0, 2.0]).unwrap().value, 0.0);
/// ```
pub fn equilibrium_time(s: f64, taus: &[f64]) -> Result<EquilibriumTime> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "task count must be a nonnegative finite real, got {s}"
        )));
    }
    Ok(SortedRates::new(taus)?.equilibrium(s))
}

/// `t*` with the collection count inflated by the coupon-collector term:
/// `min_j (Σ_{i≤j} 1/τᵢ)⁻¹ (c + min{c,n}·ln(min{c,n}) + j)`.
///
/// This is the shape of the expected-time bounds for sampling-without-
/// remainder collectors, where duplicate completions force extra draws.
pub fn log_augmented_equilibrium(cardinality: usize, taus: &[f64]) -> Result<EquilibriumTime> {
    let rates = SortedRates::new(taus)?;
    let c = cardinality as f64;
    let k = cardinality.min(rates.n()) as f64;
    let extra = if k > 0.0 { k * k.ln() } else { 0.0 };
    Ok(rates.equilibrium(c + extra))
}

/// Expected-time bound for the full-gradient collector: `12 ·` the
/// log-augmented scan at cardinality `m`.
pub fn gradient_collection_bound(m: usize, taus: &[f64]) -> Result<f64> {
    Ok(12.0 * log_augmented_equilibrium(m, taus)?.value)
}

/// Deterministic duration bound for the plain batch collector: `2 t*(S)`.
pub fn batch_bound(s: usize, taus: &[f64]) -> Result<f64> {
    Ok(2.0 * equilibrium_time(s as f64, taus)?.value)
}

/// Deterministic duration bound for the batch-difference collector: `4 t*(S)`.
pub fn batch_difference_bound(s: usize, taus: &[f64]) -> Result<f64> {
    Ok(4.0 * equilibrium_time(s as f64, taus)?.value)
}

/// Expected-time bound for the any-sampling batch collector (`12 ×` the
/// log-augmented scan at the multiset cardinality).
pub fn batch_any_sampling_bound(cardinality: usize, taus: &[f64]) -> Result<f64> {
    Ok(12.0 * log_augmented_equilibrium(cardinality, taus)?.value)
}

/// Expected-time bound for the any-sampling batch-difference collector
/// (`24 ×` the log-augmented scan).
pub fn batch_difference_any_sampling_bound(cardinality: usize, taus: &[f64]) -> Result<f64> {
    Ok(24.0 * log_augmented_equilibrium(cardinality, taus)?.value)
}

/// Integer `⌈√m⌉` with float-rounding fixup.
pub fn ceil_sqrt(m: usize) -> usize {
    assert!(m >= 1, "ceil_sqrt requires m >= 1");
    let mut r = (m as f64).sqrt().ceil() as usize;
    while r > 1 && (r - 1) * (r - 1) >= m {
        r -= 1;
    }
    while r * r < m {
        r += 1;
    }
    r
}

/// A recommended (batch size, full-refresh probability) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamChoice {
    pub s: usize,
    pub p: f64,
}

/// Dimension-driven defaults `S = ⌈√m⌉`, `p = 1/√m`.
pub fn large_scale_params(m: usize) -> Result<ParamChoice> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    Ok(ParamChoice {
        s: ceil_sqrt(m),
        p: 1.0 / (m as f64).sqrt(),
    })
}

/// Smoothness-ratio-driven choice `S = min{max{⌈L± √m / L₋⌉, 1}, m}`,
/// `p = S/m`.
pub fn ratio_params(m: usize, l_minus: f64, l_pm: f64) -> Result<ParamChoice> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if !(l_minus > 0.0) || l_pm < 0.0 || !l_pm.is_finite() || !l_minus.is_finite() {
        return Err(Error::InvalidParameter(
            "require finite L- > 0 and L± >= 0".into(),
        ));
    }
    let raw = (l_pm * (m as f64).sqrt() / l_minus).ceil();
    let s = if raw.is_finite() {
        (raw as usize).clamp(1, m)
    } else {
        m
    };
    Ok(ParamChoice {
        s,
        p: s as f64 / m as f64,
    })
}

/// Result of the time-aware batch-size optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalParams {
    pub s: usize,
    pub p: f64,
    /// `F(S*) = L₋ t*(S*) + L± √(t*(m) t*(S*)) / √S*`.
    pub objective: f64,
}

/// Evaluate `F(S)` for the batch-size optimization.
fn batch_objective(rates: &SortedRates, t_star_m: f64, l_minus: f64, l_pm: f64, s: usize) -> f64 {
    let t_s = rates.equilibrium(s as f64).value;
    l_minus * t_s + l_pm * (t_star_m * t_s).sqrt() / (s as f64).sqrt()
}

/// Time-optimal `(S*, p*)` minimizing
/// `F(S) = L₋ t*(S) + L± √(t*(m) t*(S)) / √S` over integer `S ∈ [1, m]`,
/// with `p* = 1` if a pure full-gradient schedule is no slower
/// (`L₋ t*(m) ≤ F(S*)`) and `p* = t*(S*)/t*(m)` otherwise.
///
/// For `m ≤ 2000` the scan is exhaustive. Beyond that, `F` splits into a
/// nondecreasing part `L₋ t*(S)` and a nonincreasing part
/// `L± √(t*(m)) √(t*(S)/S)`, so a sign-change bisection on their difference
/// followed by a ±2 local scan brackets a minimizer to within a factor 2 of
/// the exhaustive optimum.
pub fn optimal_params(m: usize, taus: &[f64], l_minus: f64, l_pm: f64) -> Result<OptimalParams> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if !(l_minus > 0.0) || l_pm < 0.0 || !l_pm.is_finite() || !l_minus.is_finite() {
        return Err(Error::InvalidParameter(
            "require finite L- > 0 and L± >= 0".into(),
        ));
    }
    let rates = SortedRates::new(taus)?;
    let t_star_m = rates.equilibrium(m as f64).value;
    if !t_star_m.is_finite() {
        // Every worker is infinitely slow; all schedules cost infinity.
        return Ok(OptimalParams {
            s: 1,
            p: 1.0,
            objective: f64::INFINITY,
        });
    }

    let candidates: Vec<usize> = if m <= 2000 {
        (1..=m).collect()
    } else {
        bisection_candidates(&rates, t_star_m, l_minus, l_pm, m)
    };

    let (mut best_s, mut best_f) = (1usize, f64::INFINITY);
    for &s in &candidates {
        let f = batch_objective(&rates, t_star_m, l_minus, l_pm, s);
        if f < best_f || (f == best_f && s < best_s) {
            best_f = f;
            best_s = s;
        }
    }

    let t_s = rates.equilibrium(best_s as f64).value;
    let p = if l_minus * t_star_m <= best_f {
        1.0
    } else {
        t_s / t_star_m
    };
    Ok(OptimalParams {
        s: best_s,
        p,
        objective: best_f,
    })
}

/// Candidate batch sizes for large `m`: the sign change of
/// `G(S) = L₋ t*(S) − L± √(t*(m) t*(S) / S)` (nondecreasing in `S`),
/// its ±2 neighborhood, and both endpoints.
fn bisection_candidates(
    rates: &SortedRates,
    t_star_m: f64,
    l_minus: f64,
    l_pm: f64,
    m: usize,
) -> Vec<usize> {
    let g = |s: usize| -> f64 {
        let t_s = rates.equilibrium(s as f64).value;
        l_minus * t_s - l_pm * (t_star_m * t_s / s as f64).sqrt()
    };
    // Smallest S with G(S) >= 0 (or m if G stays negative).
    let crossing = if g(1) >= 0.0 {
        1
    } else if g(m) < 0.0 {
        m
    } else {
        let (mut lo, mut hi) = (1usize, m); // G(lo) < 0 <= G(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if g(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let mut candidates = vec![1, m];
    for offset in -2i64..=2 {
        let s = crossing as i64 + offset;
        if s >= 1 && s <= m as i64 {
            candidates.push(s as usize);
        }
    }
    candidates
}

/// Freya PAGE stepsize under uniform-with-replacement sampling:
/// `γ = (L₋ + L± √((1−p)/(p S)))⁻¹`.
pub fn page_stepsize(p: f64, s: usize, l_minus: f64, l_pm: f64) -> Result<f64> {
    validate_page_inputs(p, s, l_minus, l_pm)?;
    Ok(1.0 / (l_minus + l_pm * ((1.0 - p) / (p * s as f64)).sqrt()))
}

/// Freya PAGE stepsize under nice (without-replacement) sampling:
/// `γ = (L₋ + L± √((1−p)(m−S)/(p (m−1) S)))⁻¹`. With `S = m` the variance
/// term vanishes and `γ = 1/L₋`.
pub fn nice_stepsize(p: f64, s: usize, m: usize, l_minus: f64, l_pm: f64) -> Result<f64> {
    validate_page_inputs(p, s, l_minus, l_pm)?;
    if s > m || m < 1 {
        return Err(Error::InvalidParameter(format!(
            "nice sampling requires 1 <= S <= m, got S={s}, m={m}"
        )));
    }
    let correction = if m == 1 {
        0.0
    } else {
        (m - s) as f64 / (m - 1) as f64
    };
    Ok(1.0 / (l_minus + l_pm * ((1.0 - p) * correction / (p * s as f64)).sqrt()))
}

/// Freya PAGE stepsize under importance sampling (draws proportional to
/// per-component smoothness): `γ = (L₋ + L̄ √((1−p)/(p S)))⁻¹` with
/// `L̄ = (1/m) Σ Lᵢ`.
pub fn importance_stepsize(p: f64, s: usize, l_minus: f64, l_bar: f64) -> Result<f64> {
    validate_page_inputs(p, s, l_minus, l_bar)?;
    Ok(1.0 / (l_minus + l_bar * ((1.0 - p) / (p * s as f64)).sqrt()))
}

fn validate_page_inputs(p: f64, s: usize, l_minus: f64, l_other: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "probability p must lie in (0, 1], got {p}"
        )));
    }
    if s == 0 {
        return Err(Error::InvalidParameter("batch size S must be >= 1".into()));
    }
    if !(l_minus > 0.0) || !l_minus.is_finite() || l_other < 0.0 || !l_other.is_finite() {
        return Err(Error::InvalidParameter(
            "require finite L- > 0 and a finite nonnegative variance constant".into(),
        ));
    }
    Ok(())
}

/// Iteration count sufficient for an ε-stationary point:
/// `K = (2 δ⁰ / ε) (L₋ + L± √((1−p)/(p S)))`.
pub fn page_iterations(
    delta0: f64,
    eps: f64,
    p: f64,
    s: usize,
    l_minus: f64,
    l_pm: f64,
) -> Result<f64> {
    validate_page_inputs(p, s, l_minus, l_pm)?;
    if !(delta0 >= 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidParameter(
            "require delta0 >= 0 and eps > 0".into(),
        ));
    }
    Ok((2.0 * delta0 / eps) * (l_minus + l_pm * ((1.0 - p) / (p * s as f64)).sqrt()))
}

/// Which preprocessing estimate the end-to-end time predictor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PreprocessingForm {
    /// Decide from the regime: log-augmented when `m < n ln n`, plain otherwise.
    Auto,
    /// Plain `t*(m)`.
    Plain,
    /// Coupon-collector-augmented `t*(m + min{m,n} ln min{m,n})`.
    LogAugmented,
}

/// End-to-end predicted time for Freya PAGE:
///
/// ```text
/// T(p, S) = 12 t☆ + (48 δ⁰/ε) (L₋ + L± √((1−p)/(pS))) · [ p t☆ + (1−p) t*(S) ]
/// ```
///
/// where `t☆` is either `t*(m)` or its log-augmented version depending on
/// `form` (the augmented term matters exactly when the worker pool is large
/// relative to `m`).
#[allow(clippy::too_many_arguments)]
pub fn predicted_time(
    p: f64,
    s: usize,
    taus: &[f64],
    m: usize,
    delta0: f64,
    eps: f64,
    l_minus: f64,
    l_pm: f64,
    form: PreprocessingForm,
) -> Result<f64> {
    validate_page_inputs(p, s, l_minus, l_pm)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    if !(delta0 >= 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidParameter(
            "require delta0 >= 0 and eps > 0".into(),
        ));
    }
    let rates = SortedRates::new(taus)?;
    let use_log = match form {
        PreprocessingForm::Plain => false,
        PreprocessingForm::LogAugmented => true,
        PreprocessingForm::Auto => {
            let n = rates.n() as f64;
            (m as f64) < n * n.ln()
        }
    };
    let t_full = if use_log {
        log_augmented_equilibrium(m, taus)?.value
    } else {
        rates.equilibrium(m as f64).value
    };
    let t_s = rates.equilibrium(s as f64).value;
    let k_rate = l_minus + l_pm * ((1.0 - p) / (p * s as f64)).sqrt();
    Ok(12.0 * t_full + (48.0 * delta0 / eps) * k_rate * (p * t_full + (1.0 - p) * t_s))
}

/// Lower-bound wall-clock estimate printed for comparison tables:
/// `t*(m) · (1 + δ⁰ L₊ / (√m ε))`.
pub fn lower_bound_time(
    m: usize,
    taus: &[f64],
    delta0: f64,
    eps: f64,
    l_plus: f64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let t = equilibrium_time(m as f64, taus)?.value;
    Ok(t + delta0 * l_plus / ((m as f64).sqrt() * eps) * t)
}

/// Stepsize and iteration count for the SGD-style methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SgdSchedule {
    pub gamma: f64,
    pub iterations: f64,
}

/// Joint stepsize/iteration schedule
///
/// ```text
/// K = (12 δ⁰ L / ε) · max{ 1 − 1/S, 12 L_max δ⁰/(S ε), 4 L_max Δ*/(S ε) }
/// γ = min{ √S / √(L L_max K), 1/(L (1 − 1/S)), S ε/(4 L L_max Δ*) }
/// ```
///
/// with `L` the smoothness of the mean objective. The `S = 1` and `Δ* = 0`
/// branches degenerate to `+∞` inside the min/max and drop out naturally.
pub fn sgd_schedule(
    delta0: f64,
    eps: f64,
    s: usize,
    l: f64,
    l_max: f64,
    delta_star: f64,
) -> Result<SgdSchedule> {
    if s == 0 {
        return Err(Error::InvalidParameter("batch size S must be >= 1".into()));
    }
    if !(l > 0.0) || !(l_max > 0.0) || !(eps > 0.0) || !(delta0 >= 0.0) || !(delta_star >= 0.0) {
        return Err(Error::InvalidParameter(
            "require L, L_max, eps > 0 and delta0, delta_star >= 0".into(),
        ));
    }
    let s_f = s as f64;
    let drop = 1.0 - 1.0 / s_f;
    let k = (12.0 * delta0 * l / eps)
        * drop
            .max(12.0 * l_max * delta0 / (s_f * eps))
            .max(4.0 * l_max * delta_star / (s_f * eps));
    let gamma = (s_f.sqrt() / (l * l_max * k).sqrt())
        .min(1.0 / (l * drop))
        .min(s_f * eps / (4.0 * l * l_max * delta_star));
    Ok(SgdSchedule {
        gamma,
        iterations: k,
    })
}

/// Variance-optimal SGD batch size before rounding:
/// `(L_max/ε)(δ⁰ + Δ*)`.
pub fn sgd_optimal_batch_raw(l_max: f64, eps: f64, delta0: f64, delta_star: f64) -> Result<f64> {
    if !(l_max > 0.0) || !(eps > 0.0) || !(delta0 >= 0.0) || !(delta_star >= 0.0) {
        return Err(Error::InvalidParameter(
            "require L_max, eps > 0 and delta0, delta_star >= 0".into(),
        ));
    }
    Ok(l_max / eps * (delta0 + delta_star))
}

/// Variance-optimal SGD batch size, rounded up and at least 1.
pub fn sgd_optimal_batch(l_max: f64, eps: f64, delta0: f64, delta_star: f64) -> Result<usize> {
    let raw = sgd_optimal_batch_raw(l_max, eps, delta0, delta_star)?;
    Ok((raw.ceil() as usize).max(1))
}

/// The two closed-form upper bounds on `t*(S)` and whether they hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpleBounds {
    pub t_star: f64,
    /// `2 τ_max · max{S/n, 1}` — parallelism-limited bound via the slowest worker.
    pub via_slowest: f64,
    /// `2 τ_min · max{S, 1}` — single-worker bound via the fastest worker.
    pub via_fastest: f64,
    pub holds: bool,
}

/// Checks `t*(S) ≤ 2 τ_max max{S/n, 1}` and `t*(S) ≤ 2 τ_min max{S, 1}`.
pub fn simple_upper_bounds_check(s: f64, taus: &[f64]) -> Result<SimpleBounds> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "task count must be a nonnegative finite real, got {s}"
        )));
    }
    let rates = SortedRates::new(taus)?;
    let t_star = rates.equilibrium(s).value;
    let n = rates.n() as f64;
    let tau_min = rates.taus()[0];
    let tau_max = *rates.taus().last().unwrap();
    let via_slowest = 2.0 * tau_max * (s / n).max(1.0);
    let via_fastest = 2.0 * tau_min * s.max(1.0);
    Ok(SimpleBounds {
        t_star,
        via_slowest,
        via_fastest,
        holds: t_star <= via_slowest && t_star <= via_fastest,
    })
}

/// Result of the minimizer-bracketing check on the equilibrium scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichCheck {
    /// Smallest 1-based minimizer of the scan.
    pub j_star: usize,
    pub t_star: f64,
    pub holds: bool,
}

/// Verifies that every minimizer `j*` of the scan is bracketed by the sorted
/// task times:
///
/// * `τ_{j*} ≤ t*` for every minimizer, strictly for the smallest;
/// * `t* ≤ τ_{j*+1}` for every minimizer with `j* < n`, strictly for the
///   largest.
///
/// Requires strictly positive finite task times and `s > 0`.
pub fn lemma_sandwich(s: f64, taus: &[f64]) -> Result<SandwichCheck> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "task count must be a positive finite real, got {s}"
        )));
    }
    if taus.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "sandwich check requires strictly positive finite task times".into(),
        ));
    }
    let rates = SortedRates::new(taus)?;
    let t_star = rates.equilibrium(s).value;
    let minimizers = rates.minimizers(s);
    let n = rates.n();
    let j_min = *minimizers.first().unwrap();
    let j_max = *minimizers.last().unwrap();
    let sorted = rates.taus();

    let mut holds = sorted[j_min - 1] < t_star;
    for &j in &minimizers {
        holds &= sorted[j - 1] <= t_star;
        if j < n {
            holds &= t_star <= sorted[j];
        }
    }
    if j_max < n {
        holds &= t_star < sorted[j_max];
    }
    Ok(SandwichCheck {
        j_star: j_min,
        t_star,
        holds,
    })
}

/// Problem/system constants feeding the advisory report.
#[derive(Debug, Clone, Copy, serde::Deserialize, Serialize)]
pub struct TheoryConstants {
    pub l_minus: f64,
    pub l_pm: f64,
    pub delta0: f64,
    pub epsilon: f64,
    /// Needed only for the lower-bound row; falls back to `l_pm`.
    #[serde(default)]
    pub l_plus: Option<f64>,
}

/// Everything the advisor prints for one `(m, taus, constants)` triple.
#[derive(Debug, Clone, Serialize)]
pub struct TheoryReport {
    pub m: usize,
    pub n: usize,
    pub t_star_m: f64,
    pub j_star_m: usize,
    pub t_star_sqrt_m: f64,
    pub j_star_sqrt_m: usize,
    pub large_scale: ParamChoice,
    pub ratio: ParamChoice,
    pub optimal: OptimalParams,
    /// Stepsize at the recommended `(S*, p*)`.
    pub gamma: f64,
    /// Iteration count at the recommended `(S*, p*)`.
    pub k_page: f64,
    /// End-to-end predicted seconds at the recommended `(S*, p*)`.
    pub predicted_seconds: f64,
    /// Informational lower-bound row for comparison tables.
    pub lower_bound_seconds: f64,
    /// Which preprocessing form the predictor used ("plain"/"log-augmented").
    pub preprocessing_form: String,
}

/// Assemble the advisory report for a worker pool and problem constants.
pub fn theory_report(m: usize, taus: &[f64], constants: &TheoryConstants) -> Result<TheoryReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let rates = SortedRates::new(taus)?;
    let n = rates.n();
    let t_m = rates.equilibrium(m as f64);
    let t_sqrt = rates.equilibrium((m as f64).sqrt());
    let large_scale = large_scale_params(m)?;
    let ratio = ratio_params(m, constants.l_minus, constants.l_pm)?;
    let optimal = optimal_params(m, taus, constants.l_minus, constants.l_pm)?;
    let gamma = page_stepsize(optimal.p, optimal.s, constants.l_minus, constants.l_pm)?;
    let k_page = page_iterations(
        constants.delta0,
        constants.epsilon,
        optimal.p,
        optimal.s,
        constants.l_minus,
        constants.l_pm,
    )?;
    let n_f = n as f64;
    let use_log = (m as f64) < n_f * n_f.ln();
    let predicted_seconds = predicted_time(
        optimal.p,
        optimal.s,
        taus,
        m,
        constants.delta0,
        constants.epsilon,
        constants.l_minus,
        constants.l_pm,
        PreprocessingForm::Auto,
    )?;
    let lower_bound_seconds = lower_bound_time(
        m,
        taus,
        constants.delta0,
        constants.epsilon,
        constants.l_plus.unwrap_or(constants.l_pm),
    )?;
    Ok(TheoryReport {
        m,
        n,
        t_star_m: t_m.value,
        j_star_m: t_m.j_star,
        t_star_sqrt_m: t_sqrt.value,
        j_star_sqrt_m: t_sqrt.j_star,
        large_scale,
        ratio,
        optimal,
        gamma,
        k_page,
        predicted_seconds,
        lower_bound_seconds,
        preprocessing_form: if use_log { "log-augmented" } else { "plain" }.to_string(),
    })
}
