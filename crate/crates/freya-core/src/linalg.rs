//! Minimal dense-vector helpers.
//!
//! Everything in the engine works on plain `&[f64]` slices; the problem
//! classes exploit their own structure (tridiagonal matrices, sparse-ish
//! rows) so a full linear-algebra crate would buy nothing here.

/// Dot product. Panics if the lengths differ (programmer error, not input).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm.
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y = x`.
pub fn copy_into(x: &[f64], y: &mut [f64]) {
    y.copy_from_slice(x);
}

/// `a - b` as a new vector.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
