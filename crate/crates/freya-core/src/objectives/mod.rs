//! Finite-sum objectives `f(x) = (1/m) Σ fᵢ(x)`.
//!
//! The optimization engine only ever talks to a problem through
//! [`FiniteSumObjective`]: component count, dimension, per-component values
//! and gradients, and optional smoothness constants. Two concrete problem
//! classes live here — synthetic tridiagonal [`quadratic`] instances and
//! binary [`logistic`] regression over CSV datasets.

pub mod logistic;
pub mod quadratic;

pub use logistic::LogisticProblem;
pub use quadratic::{QuadraticProblem, QuadraticSpec};

use crate::error::{Error, Result};
use crate::linalg;

/// Smoothness constants attached to a problem, used for automatic stepsizes
/// and importance sampling. For structured problems these are computed in
/// closed form; they are valid upper bounds, not estimates.
#[derive(Debug, Clone)]
pub struct SmoothnessHints {
    /// Smoothness of the mean objective `f`.
    pub l_minus: f64,
    /// Mean-square component smoothness `√((1/m) Σ Lᵢ²)`.
    pub l_plus: f64,
    /// Variance constant for the PAGE recursion; defaults to `l_plus`,
    /// which always dominates it.
    pub l_pm: f64,
    /// Mean component smoothness `(1/m) Σ Lᵢ`.
    pub l_bar: f64,
    /// Worst component smoothness `max Lᵢ`.
    pub l_max: f64,
    /// Per-component constants `Lᵢ`, needed by importance sampling.
    pub per_component: Vec<f64>,
}

impl SmoothnessHints {
    /// Build the aggregate constants from per-component ones plus the mean
    /// smoothness (which the caller knows more precisely than `mean Lᵢ`).
    pub fn from_components(l_minus: f64, per_component: Vec<f64>) -> Self {
        let m = per_component.len() as f64;
        let l_bar = per_component.iter().sum::<f64>() / m;
        let l_plus = (per_component.iter().map(|l| l * l).sum::<f64>() / m).sqrt();
        let l_max = per_component.iter().cloned().fold(0.0, f64::max);
        SmoothnessHints {
            l_minus,
            l_plus,
            l_pm: l_plus,
            l_bar,
            l_max,
            per_component,
        }
    }
}

/// A finite-sum objective.
///
/// Component indices are 0-based. Implementations must be deterministic:
/// the same `(i, x)` yields bit-for-bit the same gradient, because the
/// simulator's reproducibility guarantees build on it.
pub trait FiniteSumObjective {
    /// Number of components `m`.
    fn num_components(&self) -> usize;

    /// Ambient dimension `d`.
    fn dim(&self) -> usize;

    /// `fᵢ(x)`.
    fn component_value(&self, i: usize, x: &[f64]) -> Result<f64>;

    /// `∇fᵢ(x)` written into `out` (length `d`).
    fn component_gradient(&self, i: usize, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Smoothness constants, when the problem can provide them.
    fn smoothness(&self) -> Option<&SmoothnessHints> {
        None
    }

    /// Start iterate; defaults to the origin.
    fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    /// `f(x) = (1/m) Σ fᵢ(x)`. Structured problems may override with an
    /// algebraically equal closed form.
    fn value(&self, x: &[f64]) -> Result<f64> {
        let m = self.num_components();
        let mut acc = 0.0;
        for i in 0..m {
            acc += self.component_value(i, x)?;
        }
        Ok(acc / m as f64)
    }

    /// `∇f(x)` written into `out`. Defaults to the sequential component
    /// mean; structured problems may override with an algebraically equal
    /// closed form (must agree with [`full_gradient_reference`] to
    /// floating-point accumulation error).
    fn full_gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let reference = full_gradient_reference(self, x)?;
        out.copy_from_slice(&reference);
        Ok(())
    }
}

pub(crate) fn check_component(i: usize, m: usize) -> Result<()> {
    if i >= m {
        return Err(Error::IndexOutOfRange {
            what: "component",
            index: i,
            size: m,
        });
    }
    Ok(())
}

pub(crate) fn check_dim(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::InvalidParameter(format!(
            "point has dimension {}, expected {d}",
            x.len()
        )));
    }
    Ok(())
}

/// The canonical exact mean gradient `(1/m) Σᵢ ∇fᵢ(x)`, accumulated
/// sequentially in component order. This is the oracle every collector
/// output is compared against.
pub fn full_gradient_reference<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    x: &[f64],
) -> Result<Vec<f64>> {
    let (m, d) = (obj.num_components(), obj.dim());
    check_dim(x, d)?;
    let mut sum = vec![0.0; d];
    let mut buf = vec![0.0; d];
    for i in 0..m {
        obj.component_gradient(i, x, &mut buf)?;
        linalg::axpy(1.0, &buf, &mut sum);
    }
    for v in &mut sum {
        *v /= m as f64;
    }
    Ok(sum)
}

/// Central-difference approximation of `∇fᵢ(x)`, for gradient checks.
pub fn finite_difference_gradient<O: FiniteSumObjective + ?Sized>(
    obj: &O,
    i: usize,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let d = obj.dim();
    check_dim(x, d)?;
    let mut grad = vec![0.0; d];
    let mut probe = x.to_vec();
    for j in 0..d {
        probe[j] = x[j] + h;
        let plus = obj.component_value(i, &probe)?;
        probe[j] = x[j] - h;
        let minus = obj.component_value(i, &probe)?;
        probe[j] = x[j];
        grad[j] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}
