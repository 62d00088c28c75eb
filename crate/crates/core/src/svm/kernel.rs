//! RBF kernel: exp(-gamma * ||x - y||^2).

use super::SvmError;

/// Kernel value in (0, 1]; exactly 1 when `x == y`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(SvmError::BadConfig(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok(rbf_unchecked(x, y, gamma))
}

#[inline]
pub(crate) fn rbf_unchecked(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * sq).exp()
}
