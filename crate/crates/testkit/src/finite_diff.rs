use crate::OracleError;

/// Step size and acceptance rule for numeric gradient checks.
///
/// The comparison rule is `|a - b| / max(1, |a|, |b|)`, which behaves like an
/// absolute error near zero and a relative error for large magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDiffConfig {
    pub step: f64,
    pub tolerance: f64,
}

impl Default for FiniteDiffConfig {
    fn default() -> Self {
        FiniteDiffConfig {
            step: 1e-5,
            tolerance: 1e-4,
        }
    }
}

/// Central-difference gradient of `f` at `point`, one coordinate at a time.
pub fn finite_diff_grad<F>(
    f: F,
    point: &[f64],
    config: FiniteDiffConfig,
) -> Result<Vec<f64>, OracleError>
where
    F: Fn(&[f64]) -> f64,
{
    let h = config.step;
    let mut probe = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        probe[i] = point[i] + h;
        let plus = f(&probe);
        probe[i] = point[i] - h;
        let minus = f(&probe);
        probe[i] = point[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(OracleError::NonFinite { index: i });
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0_f64.max(a.abs()).max(b.abs())
}

/// Worst-coordinate [`rel_err`] between two gradients of equal length.
pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "gradient lengths differ");
    a.iter()
        .zip(b)
        .map(|(&x, &y)| rel_err(x, y))
        .fold(0.0, f64::max)
}
