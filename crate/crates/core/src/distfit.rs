//! Empirical CCDF construction and power-law / lognormal tail modeling.
//!
//! The power-law fit scans every distinct positive sample value as a
//! candidate lower cutoff, estimates the exponent by continuous maximum
//! likelihood on the tail and keeps the cutoff with the smallest
//! Kolmogorov–Smirnov distance. The lognormal fit is the closed-form MLE
//! on log values. Transcendentals go through `libm` so results are
//! bit-identical across platforms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("need at least {needed} positive samples, got {got}")]
    TooFewPositive { needed: usize, got: usize },
    #[error("need at least 2 distinct positive samples")]
    DegenerateSpread,
    #[error("no usable cutoff candidate: tail values are all equal")]
    DegenerateTail,
    #[error("need at least 3 positive points with positive model tail")]
    TooFewPoints,
    #[error("empirical tail probabilities have zero variance in log space")]
    ZeroVariance,
    #[error("samples contain a non-finite value")]
    NonFiniteSample,
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF, accurate to well below 1e-7 absolute error.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Standard normal survival function 1 − Φ(z), computed without
/// cancellation in the upper tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Empirical complementary CDF over the distinct sample values:
/// G(v) = |{i : x_i ≥ v}| / n, strictly decreasing in v with G(min) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCcdf {
    points: Vec<(f64, f64)>,
    n: usize,
}

impl EmpiricalCcdf {
    /// Ascending (value, tail probability) pairs.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn empirical_ccdf(samples: &[f64]) -> Result<EmpiricalCcdf, FitError> {
    if samples.is_empty() {
        return Err(FitError::TooFewSamples { needed: 1, got: 0 });
    }
    let sorted = sorted_finite(samples)?;
    let n = sorted.len();
    let mut points = Vec::new();
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        points.push((v, (n - i) as f64 / n as f64));
        let mut j = i + 1;
        while j < n && sorted[j] == v {
            j += 1;
        }
        i = j;
    }
    Ok(EmpiricalCcdf { points, n })
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>, FitError> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(FitError::NonFiniteSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted)
}

/// Kolmogorov–Smirnov distance between a sample and a model CDF:
/// D = max over sample points of max(|F_emp(x) − F(x)|, |F_emp(x⁻) − F(x)|),
/// with F_emp the right-continuous empirical CDF.
pub fn ks_statistic(samples: &[f64], model_cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(
        !samples.is_empty(),
        "ks_statistic needs at least one sample"
    );
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let model: Vec<f64> = sorted.iter().map(|&x| model_cdf(x)).collect();
    ks_from_sorted(&sorted, &model)
}

/// KS core shared with the cutoff scan: `sorted` ascending, `model[i]` the
/// model CDF at `sorted[i]`. Ties are handled by comparing the model value
/// against the empirical CDF before and after the whole tie group.
fn ks_from_sorted(sorted: &[f64], model: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let above = j as f64 / n - model[i];
        let below = model[i] - i as f64 / n;
        d = d.max(above.abs()).max(below.abs());
        i = j;
    }
    d
}

/// Power-law tail fit above a lower cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Power-law exponent of the density, always > 1.
    pub alpha: f64,
    /// Selected lower cutoff; one of the distinct sample values.
    pub x0: f64,
    /// Number of samples at or above the cutoff.
    pub n_tail: usize,
    /// KS distance between tail sample and fitted tail CDF.
    pub ks_d: f64,
}

impl PowerLawFit {
    /// Tail-conditional CCDF P(X ≥ x | X ≥ x0) = (x/x0)^−(α−1) for x ≥ x0.
    pub fn tail_ccdf(&self, x: f64) -> f64 {
        if x <= self.x0 {
            1.0
        } else {
            libm::exp(-(self.alpha - 1.0) * libm::log(x / self.x0))
        }
    }
}

pub const DEFAULT_N_MIN: usize = 10;

/// Fits a power law to the sample tail, scanning every distinct positive
/// value as candidate cutoff and keeping the one with minimal KS distance
/// (ties resolved toward the smallest cutoff).
///
/// For each candidate x0 the exponent is the continuous MLE
/// α̂ = 1 + n_tail / Σ ln(x_i/x0) over the tail x_i ≥ x0. The estimate
/// depends on the samples only through the ratios x_i/x0, so rescaling
/// the sample rescales x0 and leaves α̂ unchanged.
pub fn fit_powerlaw(samples: &[f64], n_min: usize) -> Result<PowerLawFit, FitError> {
    let n_min = n_min.max(2);
    let sorted = sorted_finite(samples)?;
    let positive: Vec<f64> = sorted.into_iter().filter(|&x| x > 0.0).collect();
    let n = positive.len();
    if n < n_min {
        return Err(FitError::TooFewPositive {
            needed: n_min,
            got: n,
        });
    }

    let mut best: Option<(f64, PowerLawFit)> = None;
    let mut log_ratios = vec![0.0f64; n];
    let mut model = vec![0.0f64; n];

    for k in 0..=(n - n_min) {
        // Candidates are the distinct values only.
        if k > 0 && positive[k] == positive[k - 1] {
            continue;
        }
        let x0 = positive[k];
        let tail = &positive[k..];
        let m = tail.len();

        let mut sum = 0.0;
        for (i, &x) in tail.iter().enumerate() {
            let lr = libm::log(x / x0);
            log_ratios[i] = lr;
            sum += lr;
        }
        if sum <= 0.0 {
            // All tail values equal: α undefined, skip this candidate.
            continue;
        }
        let alpha = 1.0 + m as f64 / sum;

        for i in 0..m {
            model[i] = 1.0 - libm::exp(-(alpha - 1.0) * log_ratios[i]);
        }
        let ks_d = ks_from_sorted(tail, &model[..m]);

        if best.as_ref().is_none_or(|(best_d, _)| ks_d < *best_d) {
            best = Some((
                ks_d,
                PowerLawFit {
                    alpha,
                    x0,
                    n_tail: m,
                    ks_d,
                },
            ));
        }
    }

    best.map(|(_, fit)| fit).ok_or(FitError::DegenerateTail)
}

/// Lognormal fit over the positive samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogNormalFit {
    pub mu: f64,
    pub sigma: f64,
    /// Positive samples used for the fit.
    pub n_used: usize,
    /// Samples dropped because the lognormal support is x > 0.
    pub dropped_nonpositive: usize,
    /// KS distance over the positive sample against the fitted CDF.
    pub ks_d: f64,
    /// Log-log R² of the fitted CCDF against the empirical CCDF of the
    /// positive sample.
    pub r2_loglog: f64,
}

impl LogNormalFit {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            normal_cdf((libm::log(x) - self.mu) / self.sigma)
        }
    }

    /// CCDF G(x) = P(X ≥ x); for a continuous model this is 1 − CDF,
    /// evaluated via the normal survival function to keep tail precision.
    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            normal_sf((libm::log(x) - self.mu) / self.sigma)
        }
    }
}

/// Maximum-likelihood lognormal fit: μ̂ and σ̂ are the mean and standard
/// deviation (n denominator) of ln x over the positive samples.
pub fn fit_lognormal(samples: &[f64]) -> Result<LogNormalFit, FitError> {
    let sorted = sorted_finite(samples)?;
    let positive: Vec<f64> = sorted.into_iter().filter(|&x| x > 0.0).collect();
    let dropped_nonpositive = samples.len() - positive.len();
    let n = positive.len();
    if n < 2 || positive[0] == positive[n - 1] {
        return Err(FitError::DegenerateSpread);
    }

    let logs: Vec<f64> = positive.iter().map(|&x| libm::log(x)).collect();
    let mu = logs.iter().sum::<f64>() / n as f64;
    let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / n as f64;
    let sigma = var.sqrt();

    let model: Vec<f64> = logs.iter().map(|&l| normal_cdf((l - mu) / sigma)).collect();
    let ks_d = ks_from_sorted(&positive, &model);

    let ccdf = empirical_ccdf(&positive)?;
    let r2_loglog = r_squared_core(&ccdf, |x| normal_sf((libm::log(x) - mu) / sigma), 2)?;

    Ok(LogNormalFit {
        mu,
        sigma,
        n_used: n,
        dropped_nonpositive,
        ks_d,
        r2_loglog,
    })
}

/// Coefficient of determination between empirical and model CCDF in
/// log10–log10 space, over the points with x > 0 and model G(x) > 0.
pub fn r_squared_loglog(
    ccdf: &EmpiricalCcdf,
    model_g: impl Fn(f64) -> f64,
) -> Result<f64, FitError> {
    r_squared_core(ccdf, model_g, 3)
}

fn r_squared_core(
    ccdf: &EmpiricalCcdf,
    model_g: impl Fn(f64) -> f64,
    min_points: usize,
) -> Result<f64, FitError> {
    let mut log_emp = Vec::new();
    let mut log_model = Vec::new();
    for &(x, g) in ccdf.points() {
        if x <= 0.0 {
            continue;
        }
        let m = model_g(x);
        if m <= 0.0 || !m.is_finite() {
            continue;
        }
        log_emp.push(libm::log10(g));
        log_model.push(libm::log10(m));
    }
    if log_emp.len() < min_points {
        return Err(FitError::TooFewPoints);
    }
    let mean = log_emp.iter().sum::<f64>() / log_emp.len() as f64;
    let ss_tot: f64 = log_emp.iter().map(|l| (l - mean) * (l - mean)).sum();
    if ss_tot == 0.0 {
        return Err(FitError::ZeroVariance);
    }
    let ss_res: f64 = log_emp
        .iter()
        .zip(&log_model)
        .map(|(e, m)| (e - m) * (e - m))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}
