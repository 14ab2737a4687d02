//! Moment summaries and goodness-of-fit tests against a fixed normal null.
//!
//! The null parameters always come from the analytic layer, never from the
//! sample itself, so the Kolmogorov-Smirnov p-value needs no
//! estimated-parameter correction and the moment gates give an
//! estimation-free second opinion.

use serde::Serialize;
use thiserror::Error;

/// Minimum sample count for the higher-moment estimators.
pub const MIN_SAMPLES: usize = 8;

/// Errors from the summary computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    /// Higher moments need a minimum number of samples.
    #[error("need at least {MIN_SAMPLES} samples, got {got}")]
    TooFewSamples {
        /// How many samples were supplied.
        got: usize,
    },
    /// The null variance must be positive and finite.
    #[error("null variance must be positive and finite")]
    BadNullVariance,
}

/// Moment and goodness-of-fit summary of one sample against a normal null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    /// Number of samples.
    pub count: usize,
    /// Sample mean.
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Sample skewness `m3 / m2^(3/2)` (zero for a flat sample).
    pub skewness: f64,
    /// Sample excess kurtosis `m4 / m2^2 - 3` (zero for a flat sample).
    pub excess_kurtosis: f64,
    /// Kolmogorov-Smirnov statistic against the supplied normal null.
    pub ks_stat: f64,
    /// Asymptotic Kolmogorov p-value of `sqrt(count) * ks_stat`.
    pub ks_pvalue: f64,
}

/// Standard normal CDF.
#[must_use]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov statistic of `samples` against a continuous CDF:
/// the largest gap between the empirical CDF and `cdf`, checked on both
/// sides of every jump. Zero for an empty sample.
#[must_use]
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let below = f - i as f64 / n;
        let above = (i + 1) as f64 / n - f;
        sup = sup.max(below).max(above);
    }
    sup
}

/// Asymptotic Kolmogorov tail probability `P(K > x)` for the scaled
/// statistic `x = sqrt(n) * D`.
///
/// Uses the alternating series for `x >= 1` and the theta-transformed
/// series for `x < 1`; both converge in a handful of terms and agree at
/// the switch point to machine precision.
#[must_use]
pub fn kolmogorov_pvalue(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // P(K <= x) via the theta-function form, then complement.
        let factor = (2.0 * std::f64::consts::PI).sqrt() / x;
        let base = -std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        let mut sum = 0.0;
        for k in 1..=20u32 {
            let odd = f64::from(2 * k - 1);
            let term = (base * odd * odd).exp();
            sum += term;
            if term < 1e-18 * sum.max(1.0) {
                break;
            }
        }
        (1.0 - factor * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=20u32 {
            let kk = f64::from(k);
            let term = (-2.0 * kk * kk * x * x).exp();
            sum += sign * term;
            sign = -sign;
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Dvoretzky-Kiefer-Wolfowitz bound: with probability at least
/// `1 - alpha`, the empirical CDF of `n` i.i.d. samples stays within this
/// distance of the true CDF everywhere.
#[must_use]
pub fn dkw_bound(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Summarizes a sample and tests it against the normal null
/// `Normal(null_mean, null_variance)` supplied by the analytic layer.
///
/// Requires at least [`MIN_SAMPLES`] values so the higher moments mean
/// something. A perfectly flat sample reports zero skewness and excess
/// kurtosis by convention.
pub fn summarize(
    samples: &[f64],
    null_mean: f64,
    null_variance: f64,
) -> Result<SummaryStats, StatsError> {
    if samples.len() < MIN_SAMPLES {
        return Err(StatsError::TooFewSamples { got: samples.len() });
    }
    if !(null_variance.is_finite() && null_variance > 0.0) {
        return Err(StatsError::BadNullVariance);
    }
    let count = samples.len();
    let n = count as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let variance = m2 * n / (n - 1.0);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    let sd = null_variance.sqrt();
    let ks_stat = ks_statistic(samples, |x| normal_cdf((x - null_mean) / sd));
    let ks_pvalue = kolmogorov_pvalue(n.sqrt() * ks_stat);
    Ok(SummaryStats {
        count,
        mean,
        variance,
        skewness,
        excess_kurtosis,
        ks_stat,
        ks_pvalue,
    })
}
