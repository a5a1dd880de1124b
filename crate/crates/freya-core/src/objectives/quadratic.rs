//! Synthetic nonconvex-leaning quadratic instances.
//!
//! Each component is `fᵢ(x) = ½ xᵀAᵢx − bᵢᵀx` with
//!
//! ```text
//! Aᵢ = (νᵢˢ/4) · tridiag(−1, 2, −1) + σ I,      bᵢ = (νᵢˢ/4)(−1 + νᵢᵇ) e₁,
//! νᵢˢ = 1 + s ξᵢˢ,   νᵢᵇ = s ξᵢᵇ,   ξ ~ N(0,1) i.i.d.,
//! ```
//!
//! where the diagonal shift `σ = λ − λ_min(Ā)` places the smallest
//! eigenvalue of the mean matrix exactly at `λ`. Every component shares the
//! same tridiagonal template, so an instance is stored as one scale and one
//! load per component plus the shift — gradients cost O(d) and the matrices
//! are never materialized (at `m = 10⁴, d = 10³` dense storage would be
//! eighty gigabytes).
//!
//! The template `tridiag(−1, 2, −1)` of size `d` has eigenvalues
//! `2 − 2 cos(kπ/(d+1))`, so `λ_min(Ā)` is closed-form; the sign of the
//! mean scale decides whether the smallest or largest template eigenvalue
//! is extremal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_component, check_dim, FiniteSumObjective, SmoothnessHints};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{generator_stream, standard_normal};

/// Generation record; regenerating from it reproduces the instance exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSpec {
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    pub s: f64,
    pub seed: u64,
}

/// Format tag written into serialized instance files.
const FORMAT_TAG: &str = "quadratic-spec-v1";

#[derive(Serialize, Deserialize)]
struct SpecFile {
    format: String,
    #[serde(flatten)]
    spec: QuadraticSpec,
}

/// A generated quadratic finite-sum instance.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    spec: QuadraticSpec,
    /// `νᵢˢ/4`, the per-component template scale.
    scales: Vec<f64>,
    /// `(νᵢˢ/4)(−1 + νᵢᵇ)`, the per-component first-coordinate load.
    loads: Vec<f64>,
    /// Diagonal shift `σ`.
    shift: f64,
    mean_scale: f64,
    mean_load: f64,
    hints: SmoothnessHints,
}

/// Smallest and largest eigenvalue of the size-`d` template
/// `tridiag(−1, 2, −1)`: `4 sin²(π/(2(d+1)))` and `4 cos²(π/(2(d+1)))`.
pub fn template_eigen_bounds(d: usize) -> (f64, f64) {
    let theta = std::f64::consts::PI / (2.0 * (d as f64 + 1.0));
    (4.0 * theta.sin().powi(2), 4.0 * theta.cos().powi(2))
}

/// Spectral norm of `a · tridiag(−1,2,−1) + σ I`: the template spectrum is
/// `[μ_min, μ_max]`, so the extreme eigenvalues are `a μ + σ` at the ends.
fn spectral_norm(a: f64, shift: f64, mu_min: f64, mu_max: f64) -> f64 {
    let e1 = a * mu_min + shift;
    let e2 = a * mu_max + shift;
    e1.abs().max(e2.abs())
}

impl QuadraticProblem {
    /// Generate an instance. Draw order per component: first the matrix
    /// deviate `ξᵢˢ`, then the load deviate `ξᵢᵇ`, both via Box–Muller from
    /// the generator stream of `seed`.
    pub fn generate(spec: QuadraticSpec) -> Result<Self> {
        if spec.m < 1 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        if spec.d < 2 {
            return Err(Error::InvalidParameter("d must be >= 2".into()));
        }
        if !(spec.lambda > 0.0) || !spec.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be positive".into()));
        }
        if !spec.s.is_finite() {
            return Err(Error::InvalidParameter("s must be finite".into()));
        }
        let mut rng = generator_stream(spec.seed);
        let mut scales = Vec::with_capacity(spec.m);
        let mut loads = Vec::with_capacity(spec.m);
        for _ in 0..spec.m {
            let xi_s = standard_normal(&mut rng);
            let xi_b = standard_normal(&mut rng);
            let nu_s = 1.0 + spec.s * xi_s;
            let nu_b = spec.s * xi_b;
            scales.push(nu_s / 4.0);
            loads.push(nu_s / 4.0 * (-1.0 + nu_b));
        }
        Self::from_parts(spec, scales, loads)
    }

    /// Assemble a problem from raw scales/loads (generation calls this; it
    /// is also the entry point for handcrafted test instances).
    pub(crate) fn from_parts(
        spec: QuadraticSpec,
        scales: Vec<f64>,
        loads: Vec<f64>,
    ) -> Result<Self> {
        let m = scales.len();
        let (mu_min, mu_max) = template_eigen_bounds(spec.d);
        let mean_scale = scales.iter().sum::<f64>() / m as f64;
        let mean_load = loads.iter().sum::<f64>() / m as f64;
        // lambda_min(mean matrix before shift): the template spectrum is
        // nonnegative, so a negative mean scale flips which end is smallest.
        let lambda_min_pre = if mean_scale >= 0.0 {
            mean_scale * mu_min
        } else {
            mean_scale * mu_max
        };
        let shift = spec.lambda - lambda_min_pre;

        let per_component: Vec<f64> = scales
            .iter()
            .map(|&a| spectral_norm(a, shift, mu_min, mu_max))
            .collect();
        let l_minus = spectral_norm(mean_scale, shift, mu_min, mu_max);
        let hints = SmoothnessHints::from_components(l_minus, per_component);

        Ok(QuadraticProblem {
            spec,
            scales,
            loads,
            shift,
            mean_scale,
            mean_load,
            hints,
        })
    }

    pub fn spec(&self) -> QuadraticSpec {
        self.spec
    }

    /// Diagonal shift `σ` applied to every component.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Start iterate `x⁰ = (√d, 0, …, 0)`.
    pub fn x0(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.spec.d];
        x[0] = (self.spec.d as f64).sqrt();
        x
    }

    /// `out = tridiag(−1,2,−1) · x`.
    fn template_apply(x: &[f64], out: &mut [f64]) {
        let d = x.len();
        for j in 0..d {
            let left = if j > 0 { x[j - 1] } else { 0.0 };
            let right = if j + 1 < d { x[j + 1] } else { 0.0 };
            out[j] = 2.0 * x[j] - left - right;
        }
    }

    /// `½ xᵀ tridiag(−1,2,−1) x` without allocating.
    fn template_quadform_half(x: &[f64]) -> f64 {
        let d = x.len();
        let mut acc = x[0] * x[0] + x[d - 1] * x[d - 1];
        for j in 0..d - 1 {
            let diff = x[j] - x[j + 1];
            acc += diff * diff;
        }
        0.5 * acc
    }

    /// Exact minimizer of the mean objective, via the Thomas algorithm on
    /// the shifted tridiagonal system `Ā x = b̄`.
    pub fn minimizer(&self) -> Result<Vec<f64>> {
        let d = self.spec.d;
        let diag_val = 2.0 * self.mean_scale + self.shift;
        let off = -self.mean_scale;
        let mut diag = vec![diag_val; d];
        let mut rhs = vec![0.0; d];
        rhs[0] = self.mean_load;
        // Forward elimination.
        for j in 1..d {
            if diag[j - 1] == 0.0 {
                return Err(Error::InvalidParameter(
                    "mean system is singular; cannot solve for the minimizer".into(),
                ));
            }
            let w = off / diag[j - 1];
            diag[j] -= w * off;
            rhs[j] -= w * rhs[j - 1];
        }
        // Back substitution.
        let mut x = vec![0.0; d];
        x[d - 1] = rhs[d - 1] / diag[d - 1];
        for j in (0..d - 1).rev() {
            x[j] = (rhs[j] - off * x[j + 1]) / diag[j];
        }
        Ok(x)
    }

    /// `f(x*)` at the exact minimizer.
    pub fn optimal_value(&self) -> Result<f64> {
        let x = self.minimizer()?;
        self.value(&x)
    }

    /// Write the generation record as a self-describing JSON container.
    pub fn save_spec(&self, path: &Path) -> Result<()> {
        let file = SpecFile {
            format: FORMAT_TAG.to_string(),
            spec: self.spec,
        };
        let json = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    /// Regenerate an instance from a saved container.
    pub fn load_spec(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SpecFile = serde_json::from_str(&text)?;
        if file.format != FORMAT_TAG {
            return Err(Error::Config(format!(
                "unsupported problem container format {:?}",
                file.format
            )));
        }
        Self::generate(file.spec)
    }
}

impl FiniteSumObjective for QuadraticProblem {
    fn num_components(&self) -> usize {
        self.spec.m
    }

    fn dim(&self) -> usize {
        self.spec.d
    }

    fn component_value(&self, i: usize, x: &[f64]) -> Result<f64> {
        check_component(i, self.spec.m)?;
        check_dim(x, self.spec.d)?;
        Ok(self.scales[i] * Self::template_quadform_half(x)
            + self.shift * 0.5 * linalg::norm_sq(x)
            - self.loads[i] * x[0])
    }

    fn component_gradient(&self, i: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_component(i, self.spec.m)?;
        check_dim(x, self.spec.d)?;
        check_dim(out, self.spec.d)?;
        Self::template_apply(x, out);
        let a = self.scales[i];
        for (o, &xj) in out.iter_mut().zip(x) {
            *o = a * *o + self.shift * xj;
        }
        out[0] -= self.loads[i];
        Ok(())
    }

    fn smoothness(&self) -> Option<&SmoothnessHints> {
        Some(&self.hints)
    }

    fn initial_point(&self) -> Vec<f64> {
        self.x0()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        // Mean of the component values in closed form: the scales and loads
        // average linearly over the shared structure.
        check_dim(x, self.spec.d)?;
        Ok(self.mean_scale * Self::template_quadform_half(x)
            + self.shift * 0.5 * linalg::norm_sq(x)
            - self.mean_load * x[0])
    }

    fn full_gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim(x, self.spec.d)?;
        check_dim(out, self.spec.d)?;
        Self::template_apply(x, out);
        for (o, &xj) in out.iter_mut().zip(x) {
            *o = self.mean_scale * *o + self.shift * xj;
        }
        out[0] -= self.mean_load;
        Ok(())
    }
}
