use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{input, Result};

/// Two-sided standard normal quantile for `confidence`.
pub fn z_score(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return input(format!("confidence must lie in (0, 1), got {confidence}"));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return input("Wilson interval needs at least one trial");
    }
    if successes > trials {
        return input(format!("{successes} successes out of {trials} trials"));
    }
    let z = z_score(confidence)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0).min(p) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0).max(p) };
    Ok((lo, hi))
}

/// A proportion with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn new(successes: u64, trials: u64, confidence: f64) -> Result<Self> {
        let (lo, hi) = wilson_interval(successes, trials, confidence)?;
        Ok(Self { successes, trials, value: successes as f64 / trials as f64, lo, hi })
    }
}
