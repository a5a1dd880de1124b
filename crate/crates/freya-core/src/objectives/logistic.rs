//! Binary logistic regression with optional L2 regularization.
//!
//! Component `i` holds a feature row `aᵢ` and a label `yᵢ ∈ {0, 1}`:
//!
//! ```text
//! fᵢ(x) = log(1 + exp(−ŷᵢ aᵢᵀx)) + (μ/2)‖x‖²,    ŷᵢ = 2yᵢ − 1 ∈ {−1, +1}.
//! ```
//!
//! The loss and its sigmoid factor are evaluated through `log1p`/`exp` on
//! the nonpositive side only, so margins of either sign and any magnitude
//! stay finite.

use std::path::Path;

use super::{check_component, check_dim, FiniteSumObjective, SmoothnessHints};
use crate::error::{Error, Result};
use crate::linalg;

/// A binary logistic regression problem.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    rows: Vec<Vec<f64>>,
    /// Signed labels `ŷᵢ ∈ {−1, +1}`.
    signs: Vec<f64>,
    l2: f64,
    hints: SmoothnessHints,
}

/// `log(1 + exp(−t))`, stable for any `t`.
fn log1p_exp_neg(t: f64) -> f64 {
    if t >= 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

/// `σ(−t) = 1/(1 + eᵗ)`, stable for any `t`.
fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

impl LogisticProblem {
    /// Build a problem from feature rows and 0/1 labels.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<f64>, l2: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if rows.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if !(l2 >= 0.0) || !l2.is_finite() {
            return Err(Error::InvalidParameter(
                "l2 coefficient must be a nonnegative finite real".into(),
            ));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidParameter(
                "feature rows must be nonempty".into(),
            ));
        }
        let mut signs = Vec::with_capacity(labels.len());
        for (i, (row, &label)) in rows.iter().zip(&labels).enumerate() {
            if row.len() != d {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} features, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} contains a non-finite feature"
                )));
            }
            if label != 0.0 && label != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "label {label} at row {i} is not binary (expected 0 or 1)"
                )));
            }
            signs.push(2.0 * label - 1.0);
        }
        // Per-component smoothness: the logistic Hessian is bounded by
        // (1/4) aᵢaᵢᵀ, so Lᵢ = |aᵢ|²/4 + μ; the mean bound follows by
        // averaging.
        let per_component: Vec<f64> = rows.iter().map(|r| 0.25 * linalg::norm_sq(r) + l2).collect();
        let l_minus = per_component.iter().sum::<f64>() / per_component.len() as f64;
        let hints = SmoothnessHints::from_components(l_minus, per_component);
        Ok(LogisticProblem {
            rows,
            signs,
            l2,
            hints,
        })
    }

    /// Load a dataset from a CSV file. `label_column` is the 0-based column
    /// holding the 0/1 label; all remaining columns are features.
    pub fn from_csv(path: &Path, label_column: usize, has_header: bool, l2: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .flexible(false)
            .from_path(path)
            .map_err(|e| csv_error(&e))?;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&e))?;
            let line = record
                .position()
                .map(|p| p.line())
                .unwrap_or(rows.len() as u64 + 1);
            if label_column >= record.len() {
                return Err(Error::CsvFormat {
                    line,
                    message: format!(
                        "label column {label_column} out of range for {} columns",
                        record.len()
                    ),
                });
            }
            let mut features = Vec::with_capacity(record.len() - 1);
            let mut label = 0.0;
            for (col, field) in record.iter().enumerate() {
                let value: f64 = field.trim().parse().map_err(|_| Error::CsvFormat {
                    line,
                    message: format!("cannot parse field {:?} in column {col} as a number", field),
                })?;
                if col == label_column {
                    if value != 0.0 && value != 1.0 {
                        return Err(Error::CsvFormat {
                            line,
                            message: format!("label {value} is not binary (expected 0 or 1)"),
                        });
                    }
                    label = value;
                } else {
                    features.push(value);
                }
            }
            rows.push(features);
            labels.push(label);
        }
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Self::new(rows, labels, l2)
    }
}

fn csv_error(e: &csv::Error) -> Error {
    let line = match e.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::CsvFormat {
        line,
        message: e.to_string(),
    }
}

impl FiniteSumObjective for LogisticProblem {
    fn num_components(&self) -> usize {
        self.rows.len()
    }

    fn dim(&self) -> usize {
        self.rows[0].len()
    }

    fn component_value(&self, i: usize, x: &[f64]) -> Result<f64> {
        check_component(i, self.rows.len())?;
        check_dim(x, self.dim())?;
        let t = self.signs[i] * linalg::dot(&self.rows[i], x);
        Ok(log1p_exp_neg(t) + 0.5 * self.l2 * linalg::norm_sq(x))
    }

    fn component_gradient(&self, i: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_component(i, self.rows.len())?;
        check_dim(x, self.dim())?;
        check_dim(out, self.dim())?;
        let t = self.signs[i] * linalg::dot(&self.rows[i], x);
        let coeff = -self.signs[i] * sigmoid_neg(t);
        for ((o, &aj), &xj) in out.iter_mut().zip(&self.rows[i]).zip(x) {
            *o = coeff * aj + self.l2 * xj;
        }
        Ok(())
    }

    fn smoothness(&self) -> Option<&SmoothnessHints> {
        Some(&self.hints)
    }
}
