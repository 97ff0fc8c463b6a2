//! Order-stable summary statistics.

use serde::Serialize;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub mean: f64,
    /// Zero, with `stderr_available = false`, for a single sample.
    pub stderr: f64,
    pub trials: usize,
    pub stderr_available: bool,
}

impl EstimateResult {
    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }

    /// `(mean - target) / stderr`; `None` without a usable stderr.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        (self.stderr_available && self.stderr > 0.0).then(|| (self.mean - target) / self.stderr)
    }
}

/// Neumaier-compensated sum, evaluated in slice order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Mean and standard error of `samples`.
///
/// Samples are rescaled by their largest magnitude before squaring so that
/// returns near `1e200` do not overflow the variance.
pub fn summarize(samples: &[f64]) -> EstimateResult {
    let n = samples.len();
    if n == 0 {
        return EstimateResult {
            mean: f64::NAN,
            stderr: f64::NAN,
            trials: 0,
            stderr_available: false,
        };
    }
    let mean = compensated_sum(samples) / n as f64;
    if n == 1 {
        return EstimateResult {
            mean,
            stderr: 0.0,
            trials: 1,
            stderr_available: false,
        };
    }
    let scale = samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let stderr = if scale == 0.0 {
        0.0
    } else {
        let scaled: Vec<f64> = samples.iter().map(|x| ((x - mean) / scale).powi(2)).collect();
        let var = compensated_sum(&scaled) / (n - 1) as f64;
        scale * (var / n as f64).sqrt()
    };
    EstimateResult {
        mean,
        stderr,
        trials: n,
        stderr_available: true,
    }
}
