//! Bulk-statistics early-warning indicators.
//!
//! Variance and skewness of the full (post-burn-in) series are the classic
//! criticality indicators: both trend upward toward a transition but
//! neither pins a threshold value. Lag-1 autocorrelation is included as
//! the third standard early-warning metric even though the threshold
//! criterion itself never uses it.

use serde::Serialize;

use crate::error::{EvtError, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BulkStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Third standardized central moment (bias-uncorrected g1); 0 by
    /// convention for a constant series.
    pub skewness: f64,
    /// Sample autocorrelation at lag one; 0 by convention for a constant
    /// series.
    pub lag1_autocorr: f64,
    pub n_samples: usize,
}

/// Indicators over the post-burn-in part of `ts`; needs at least two
/// retained samples.
pub fn bulk_stats(ts: &TimeSeries, burn_in_fraction: f64) -> Result<BulkStats> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(EvtError::InvalidParameter(format!(
            "burn_in_fraction = {burn_in_fraction} must be in [0, 1)"
        )));
    }
    let start = (burn_in_fraction * ts.len() as f64).floor() as usize;
    let kept = &ts.values[start..];
    let n = kept.len();
    if n < 2 {
        return Err(EvtError::TooFewPoints { got: n, min: 2 });
    }

    let mean = kept.iter().sum::<f64>() / n as f64;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    for &x in kept {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    let variance = m2 / (n as f64 - 1.0);

    let (skewness, lag1_autocorr) = if m2 == 0.0 {
        (0.0, 0.0)
    } else {
        let skew = (m3 / n as f64) / (m2 / n as f64).powf(1.5);
        let mut cross = 0.0;
        for t in 0..n - 1 {
            cross += (kept[t] - mean) * (kept[t + 1] - mean);
        }
        (skew, cross / m2)
    };

    Ok(BulkStats {
        mean,
        variance,
        skewness,
        lag1_autocorr,
        n_samples: n,
    })
}
