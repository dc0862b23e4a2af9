//! Statistical post-processing: empirical tail estimation, log-linear
//! QoS-exponent fitting, violation probabilities, and empirical Mellin
//! transforms.
//!
//! A QoS exponent is recovered by regressing `ln P(X > t)` on `t` over a
//! probability window where the tail is exponential-like but still well
//! estimated; the negated slope is the exponent. The samples-in,
//! estimate-out entry point is [`fit_tail_exponent`]; the probabilities-in
//! variant [`fit_qos_exponent`] underlies it.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("empty sample set")]
    EmptySamples,
    #[error("thresholds must be strictly ascending")]
    NonAscendingThresholds,
    #[error("tail fit needs at least 4 points inside the window, found {usable}")]
    InsufficientData { usable: usize },
    #[error("Mellin transform needs positive samples, got {0}")]
    NonPositiveSample(f64),
    #[error("{0}")]
    InvalidParameter(String),
}

// --- empirical tail -----------------------------------------------------

/// Empirical complementary CDF `P(X > t)` (strictly greater) at each
/// threshold. Thresholds must be strictly ascending; samples may arrive in
/// any order.
pub fn empirical_tail(samples: &[f64], thresholds: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    check_ascending(thresholds)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let n = sorted.len();
    Ok(thresholds
        .iter()
        .map(|&t| {
            let above = n - sorted.partition_point(|&x| x <= t);
            above as f64 / n as f64
        })
        .collect())
}

fn check_ascending(thresholds: &[f64]) -> Result<(), MetricsError> {
    if thresholds.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MetricsError::NonAscendingThresholds);
    }
    Ok(())
}

// --- exponent fitting ---------------------------------------------------

/// Probability band a tail point must fall in to participate in the
/// regression: low enough that the tail is in its exponential regime, high
/// enough that the empirical estimate is not pure noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub prob_lo: f64,
    pub prob_hi: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            prob_lo: 1e-4,
            prob_hi: 1e-1,
        }
    }
}

impl FitWindow {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.prob_lo > 0.0 && self.prob_lo < self.prob_hi && self.prob_hi <= 1.0) {
            return Err(MetricsError::InvalidParameter(format!(
                "fit window must satisfy 0 < lo < hi <= 1, got [{}, {}]",
                self.prob_lo, self.prob_hi
            )));
        }
        Ok(())
    }
}

/// A fitted QoS exponent with its regression diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct QosExponentEstimate {
    /// Negated slope of `ln P(X > t)` against `t`; decay in nats per
    /// threshold unit.
    pub theta: f64,
    /// Threshold range `(lowest, highest)` actually used by the fit.
    pub fit_window: (f64, f64),
    pub r_squared: f64,
    /// Standard error of `theta`. From [`fit_tail_exponent`] this accounts
    /// for the correlation between nested exceedance counts; from
    /// [`fit_qos_exponent`] alone only residual scatter is available.
    pub std_error: f64,
    /// Regression points inside the window.
    pub n_points: usize,
    /// Underlying samples, when known (0 for probability-only fits).
    pub n_samples: usize,
}

impl QosExponentEstimate {
    /// A usable estimate decays: non-positive or non-finite exponents mean
    /// the tail is not exponential over the window (or does not decay at
    /// all) and must not feed downstream guarantees.
    pub fn is_valid(&self) -> bool {
        self.theta > 0.0 && self.theta.is_finite()
    }
}

/// `(threshold, tail_prob)` pairs that fall inside the fit window.
fn window_points(
    thresholds: &[f64],
    tail_probs: &[f64],
    window: &FitWindow,
) -> Vec<(f64, f64)> {
    thresholds
        .iter()
        .zip(tail_probs)
        .filter(|&(_, &p)| p > 0.0 && p >= window.prob_lo && p <= window.prob_hi)
        .map(|(&t, &p)| (t, p))
        .collect()
}

/// Fit `ln p = a - theta * t` by ordinary least squares over the window.
///
/// Needs at least 4 usable points. A flat or growing tail yields a
/// non-positive `theta`, returned as-is with [`QosExponentEstimate::is_valid`]
/// false rather than an error — callers decide whether that is fatal.
pub fn fit_qos_exponent(
    thresholds: &[f64],
    tail_probs: &[f64],
    window: &FitWindow,
) -> Result<QosExponentEstimate, MetricsError> {
    if thresholds.len() != tail_probs.len() {
        return Err(MetricsError::InvalidParameter(format!(
            "{} thresholds vs {} probabilities",
            thresholds.len(),
            tail_probs.len()
        )));
    }
    check_ascending(thresholds)?;
    window.validate()?;
    let pts = window_points(thresholds, tail_probs, window);
    if pts.len() < 4 {
        return Err(MetricsError::InsufficientData { usable: pts.len() });
    }
    let m = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|&(t, _)| t).collect();
    let ys: Vec<f64> = pts.iter().map(|&(_, p)| p.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let sst: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (y_mean + slope * (x - x_mean))).powi(2))
        .sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    let std_error = (sse / (m - 2.0) / sxx).sqrt();
    Ok(QosExponentEstimate {
        theta: -slope,
        fit_window: (xs[0], *xs.last().unwrap()),
        r_squared,
        std_error,
        n_points: pts.len(),
        n_samples: 0,
    })
}

/// Standard error of the fitted slope when the tail probabilities come
/// from nested exceedance counts of `n_samples` common samples.
///
/// For thresholds `t_i <= t_j` the counts share every sample above `t_j`,
/// giving `cov(ln p_i, ln p_j) ~= (1 - p_i) / (n p_i)` with `p_i` the
/// larger probability. Propagating that covariance through the OLS
/// contrast gives an error that tracks resampling spread, unlike the
/// residual-based value (the regression residuals of a clean exponential
/// tail are tiny even though the fit itself wobbles between sample sets).
fn nested_count_slope_se(points: &[(f64, f64)], n_samples: usize) -> f64 {
    let m = points.len() as f64;
    let n = n_samples as f64;
    let x_mean = points.iter().map(|&(t, _)| t).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|&(t, _)| (t - x_mean).powi(2)).sum();
    let contrast: Vec<f64> = points.iter().map(|&(t, _)| (t - x_mean) / sxx).collect();
    let mut var = 0.0;
    for (i, &(_, pi)) in points.iter().enumerate() {
        for (j, &(_, pj)) in points.iter().enumerate() {
            let p_big = pi.max(pj);
            var += contrast[i] * contrast[j] * (1.0 - p_big) / (n * p_big);
        }
    }
    var.max(0.0).sqrt()
}

/// Evenly spaced thresholds spanning the upper half of the sample range,
/// from the median to the 0.99995 quantile.
pub fn auto_thresholds(samples: &[f64], count: usize) -> Result<Vec<f64>, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let q = |f: f64| sorted[((sorted.len() - 1) as f64 * f) as usize];
    let lo = q(0.5);
    let hi = q(0.99995);
    if !(hi > lo) {
        return Err(MetricsError::InsufficientData { usable: 0 });
    }
    let step = (hi - lo) / (count - 1) as f64;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let t = lo + step * i as f64;
        if out.last().is_none_or(|&prev| t > prev) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Fit a QoS exponent straight from samples: estimate the tail (on
/// `thresholds`, or an automatic grid), regress, and attach the
/// nested-count standard error.
pub fn fit_tail_exponent(
    samples: &[f64],
    thresholds: Option<&[f64]>,
    window: &FitWindow,
) -> Result<QosExponentEstimate, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let auto;
    let thr: &[f64] = match thresholds {
        Some(t) => t,
        None => {
            auto = auto_thresholds(samples, 48)?;
            &auto
        }
    };
    let probs = empirical_tail(samples, thr)?;
    let mut est = fit_qos_exponent(thr, &probs, window)?;
    est.n_samples = samples.len();
    est.std_error = nested_count_slope_se(&window_points(thr, &probs, window), samples.len());
    Ok(est)
}

/// [`fit_tail_exponent`] over integer delay samples (channel uses).
pub fn fit_delay_exponent(
    delays_cu: &[u64],
    window: &FitWindow,
) -> Result<QosExponentEstimate, MetricsError> {
    let as_f64: Vec<f64> = delays_cu.iter().map(|&d| d as f64).collect();
    fit_tail_exponent(&as_f64, None, window)
}

/// [`fit_tail_exponent`] over queue-length samples, with thresholds on the
/// integer lattice (at most 48 of them, evenly thinned).
pub fn fit_queue_exponent(
    queue_lengths: &[u64],
    window: &FitWindow,
) -> Result<QosExponentEstimate, MetricsError> {
    if queue_lengths.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let max = *queue_lengths.iter().max().unwrap();
    if max == 0 {
        return Err(MetricsError::InsufficientData { usable: 0 });
    }
    let count = max.min(48);
    let thresholds: Vec<f64> = (0..count)
        .map(|i| (i * max / count) as f64)
        .collect();
    let as_f64: Vec<f64> = queue_lengths.iter().map(|&q| q as f64).collect();
    fit_tail_exponent(&as_f64, Some(&thresholds), window)
}

// --- violation probabilities --------------------------------------------

/// Fraction of delivered updates whose total delay strictly exceeds the
/// threshold.
pub fn delay_violation(delays_cu: &[u64], threshold_cu: u64) -> Result<f64, MetricsError> {
    if delays_cu.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let over = delays_cu.iter().filter(|&&d| d > threshold_cu).count();
    Ok(over as f64 / delays_cu.len() as f64)
}

/// Fraction of age peaks whose blocklength-normalized value strictly
/// exceeds the normalized threshold, `P(peak / n > a_th / n)`.
///
/// The common normalization cancels, so the result equals the raw count
/// of `peak > a_th` — the parameter is kept because both sides of the
/// comparison are defined per blocklength and callers hold thresholds in
/// that form.
pub fn peak_aoi_violation(
    peaks_cu: &[u64],
    threshold_cu: u64,
    blocklength: u32,
) -> Result<f64, MetricsError> {
    if peaks_cu.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    if blocklength == 0 {
        return Err(MetricsError::InvalidParameter(
            "normalizing blocklength must be >= 1".into(),
        ));
    }
    let n = blocklength as f64;
    let th = threshold_cu as f64 / n;
    let over = peaks_cu
        .iter()
        .filter(|&&p| p as f64 / n > th)
        .count();
    Ok(over as f64 / peaks_cu.len() as f64)
}

// --- Mellin transform ---------------------------------------------------

/// Empirical Mellin transform `E[X^(s-1)]` of positive samples.
pub fn mellin(samples: &[f64], s: f64) -> Result<f64, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let mut acc = 0.0f64;
    for &x in samples {
        if !(x > 0.0) {
            return Err(MetricsError::NonPositiveSample(x));
        }
        acc += x.powf(s - 1.0);
    }
    Ok(acc / samples.len() as f64)
}

// ------------------------------------------------------------------------
