//! Error-rate statistics.

/// Two-sided 95% normal quantile used for Wilson intervals.
pub const WILSON_Z: f64 = 1.96;

/// Half-width of the Wilson score interval for `errors` out of `trials`.
pub fn wilson_half_width(errors: u64, trials: u64, z: f64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Standard error of a mean estimated from i.i.d. per-trial samples.
pub fn standard_error(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Standard error of the mean difference of two paired sample sets.
pub fn paired_standard_error(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "paired samples must align");
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    standard_error(&diff)
}

/// Q-function, `P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}
