//! Percentiles and empirical CDFs.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `q`-quantile (0..=1) with linear interpolation between order statistics
/// at positions `1 + q (n − 1)`.
pub fn percentile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::config("quantile", "must lie in [0, 1]"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(s[lo] + frac * (s[hi] - s[lo]))
}

/// Value exceeded with probability 0.9: the 10th percentile.
pub fn percentile_90_likely(samples: &[f64]) -> Result<f64> {
    percentile(samples, 0.1)
}

pub fn median(samples: &[f64]) -> Result<f64> {
    percentile(samples, 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub likely_90: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Result<Self> {
        Ok(Self {
            mean: samples.iter().sum::<f64>() / samples.len().max(1) as f64,
            median: median(samples)?,
            likely_90: percentile_90_likely(samples)?,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Sorted values with cumulative probabilities `i / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cdf {
    pub values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl Cdf {
    pub fn of(samples: &[f64]) -> Self {
        let mut values = samples.to_vec();
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let probabilities = (1..=values.len()).map(|i| i as f64 / n).collect();
        Self { values, probabilities }
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|&v| v <= x);
        if i == 0 {
            0.0
        } else {
            self.probabilities[i - 1]
        }
    }
}
