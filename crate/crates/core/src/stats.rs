//! Descriptive statistics and histograms over one metric column.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("samples contain a non-finite value")]
    NonFiniteSample,
    #[error("bin count must be positive")]
    InvalidBins,
}

/// Centrality and dispersion summary of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStatistics {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n−1 denominator).
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub iqr: f64,
    pub p10: f64,
    pub p90: f64,
}

/// Summarizes a sample of at least two values.
///
/// Quantiles use linear interpolation of the order statistics at rank
/// h = (n−1)p + 1. All statistics are computed on the sorted copy, so the
/// result is exactly permutation-invariant.
pub fn summarize(samples: &[f64]) -> Result<SummaryStatistics, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let sorted = sorted_finite(samples)?;
    let n = sorted.len();

    let mean = sorted.iter().sum::<f64>() / n as f64;
    let ss: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std = (ss / (n - 1) as f64).sqrt();
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);

    Ok(SummaryStatistics {
        n,
        mean,
        median: quantile(&sorted, 0.5),
        std,
        max: sorted[n - 1],
        min: sorted[0],
        iqr: q3 - q1,
        p10: quantile(&sorted, 0.1),
        p90: quantile(&sorted, 0.9),
    })
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFiniteSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted)
}

/// Linear interpolation of order statistics at rank h = (n−1)p + 1.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let k = h.floor() as usize;
    let frac = h - k as f64;
    if k + 1 >= n || frac == 0.0 {
        sorted[k.min(n - 1)]
    } else {
        sorted[k] + frac * (sorted[k + 1] - sorted[k])
    }
}

/// Equal-width histogram. `sum(counts) == n` for every binning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// k+1 strictly increasing bin edges.
    pub edges: Vec<f64>,
    /// k bin counts; all bins are right-open except the last.
    pub counts: Vec<u64>,
}

/// Bins a sample into `bins` equal-width bins over [min, max], or chooses
/// the width by the Freedman–Diaconis rule when `bins` is absent (rounded
/// up to an integer width for integer-valued samples).
///
/// A sample whose values are all equal gets a single bin of width 1
/// centered on the value.
pub fn histogram(samples: &[f64], bins: Option<usize>) -> Result<Histogram, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    if bins == Some(0) {
        return Err(StatsError::InvalidBins);
    }
    let sorted = sorted_finite(samples)?;
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);

    if min == max {
        return Ok(Histogram {
            edges: vec![min - 0.5, min + 0.5],
            counts: vec![n as u64],
        });
    }

    let (k, width) = match bins {
        Some(k) => (k, (max - min) / k as f64),
        None => {
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            let mut width = 2.0 * iqr / (n as f64).powf(1.0 / 3.0);
            let integer_valued = sorted.iter().all(|x| x.fract() == 0.0);
            if integer_valued {
                width = width.ceil();
            }
            if width <= 0.0 {
                // Degenerate spread (zero IQR): fall back to one bin.
                width = max - min;
            }
            let k = ((max - min) / width).ceil().max(1.0) as usize;
            (k, width)
        }
    };

    let mut edges: Vec<f64> = (0..=k).map(|i| min + i as f64 * width).collect();
    // Pin the final edge so the last bin is right-closed at the maximum.
    if bins.is_some() || edges[k] < max {
        edges[k] = max;
    }

    let mut counts = vec![0u64; k];
    for &x in &sorted {
        let idx = (((x - min) / width) as usize).min(k - 1);
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn five_point_summary() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(s.n, 5);
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 5.0);
        // Hand-computed from h = (n−1)p + 1: std = sqrt(10/4), p10 at
        // h = 1.4, p90 at h = 4.6, iqr = 4 − 2.
        assert_relative_eq!(s.std, 2.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.p10, 1.4, epsilon = 1e-12);
        assert_relative_eq!(s.p90, 4.6, epsilon = 1e-12);
        assert_relative_eq!(s.iqr, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_sample_has_zero_spread() {
        let s = summarize(&[7.0; 6]).unwrap();
        assert_eq!(s.std, 0.0);
        assert_eq!(s.iqr, 0.0);
        assert_eq!(s.median, 7.0);
        assert_eq!(s.p10, 7.0);
        assert_eq!(s.p90, 7.0);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert_eq!(
            summarize(&[1.0]),
            Err(StatsError::TooFewSamples { needed: 2, got: 1 })
        );
    }

    #[test]
    fn summary_is_exactly_permutation_invariant() {
        let a = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6, 5.3];
        let mut b = a;
        b.reverse();
        assert_eq!(summarize(&a).unwrap(), summarize(&b).unwrap());
    }

    #[test]
    fn histogram_with_explicit_bins() {
        let h = histogram(&[1.0, 1.0, 2.0, 3.0], Some(3)).unwrap();
        assert_eq!(h.counts, vec![2, 1, 1]);
        assert_eq!(h.edges.len(), 4);
        assert_eq!(h.edges[0], 1.0);
        assert_eq!(h.edges[3], 3.0);
        assert_relative_eq!(h.edges[1], 1.0 + 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn histogram_constant_sample() {
        let h = histogram(&[5.0, 5.0, 5.0], None).unwrap();
        assert_eq!(h.edges, vec![4.5, 5.5]);
        assert_eq!(h.counts, vec![3]);
    }

    #[test]
    fn histogram_uniform_grid() {
        let samples: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let h = histogram(&samples, Some(10)).unwrap();
        assert_eq!(h.counts, vec![10; 10]);
    }

    #[test]
    fn histogram_total_count_is_sample_count() {
        let samples: Vec<f64> = (0..57).map(|i| (i * i % 13) as f64).collect();
        for bins in [None, Some(1), Some(4), Some(12)] {
            let h = histogram(&samples, bins).unwrap();
            assert_eq!(h.counts.iter().sum::<u64>(), 57);
        }
    }

    #[test]
    fn freedman_diaconis_integer_width() {
        let samples: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let h = histogram(&samples, None).unwrap();
        // iqr = 19.5, width = 2·19.5/40^(1/3) ≈ 11.4 → 12 after ceil.
        let width = h.edges[1] - h.edges[0];
        assert_eq!(width, 12.0);
        assert_eq!(h.counts.iter().sum::<u64>(), 40);
    }
}
