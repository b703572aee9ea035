//! The ingested-data path: the same per-control-value fits and threshold
//! detection, applied to externally produced series (one realization per
//! control value) instead of simulator ensembles.

use crate::error::{EvtError, Result};
use crate::exec;
use crate::extremes::{block_extremes, BlockSpec, Tail};
use crate::gev::{self, FitOptions, GevFit};
use crate::indicators;
use crate::series::TimeSeries;

use super::scan::ScanPoint;
use super::threshold::{detect_threshold, ThresholdEstimate};

/// Scan assembled from external series.
#[derive(Debug)]
pub struct ExternalScan {
    /// One point per series, sorted by ascending control value.
    pub points: Vec<ScanPoint>,
    /// Threshold detection outcome; a no-crossing error here is a finding
    /// (the data sit on one side of the transition), not a failure.
    pub threshold: Result<ThresholdEstimate>,
}

/// Analyze a set of tagged series.
///
/// Every series must carry a distinct `control_value`. With one
/// realization per control value there is no ensemble spread, so the
/// reported shape standard deviations are the fit standard errors instead.
/// The `tail` of `block` is ignored: both tails are always extracted.
pub fn analyze_external(
    set: &[TimeSeries],
    block: &BlockSpec,
    fit: &FitOptions,
) -> Result<ExternalScan> {
    let mut order: Vec<(f64, &TimeSeries)> = Vec::with_capacity(set.len());
    for ts in set {
        match ts.control_value {
            Some(c) if c.is_finite() => order.push((c, ts)),
            _ => {
                return Err(EvtError::MissingControlValue {
                    label: ts.label.clone(),
                })
            }
        }
    }
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for pair in order.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(EvtError::DuplicateControlValue { value: pair[0].0 });
        }
    }

    let points = exec::map_indices(order.len(), |i| {
        let (control, ts) = order[i];
        series_point(ts, control, block, fit)
    });
    let threshold = detect_threshold(&points);
    Ok(ExternalScan { points, threshold })
}

fn series_point(ts: &TimeSeries, control: f64, block: &BlockSpec, fit: &FitOptions) -> ScanPoint {
    let extract_and_fit = |tail: Tail| -> Option<GevFit> {
        let spec = BlockSpec::with_burn_in(block.bin_length, tail, block.burn_in_fraction).ok()?;
        let extremes = block_extremes(ts, &spec).ok()?;
        gev::fit_mle_with(&extremes, fit).ok().filter(|f| f.converged)
    };
    let fit_max = extract_and_fit(Tail::Maxima);
    let fit_min = extract_and_fit(Tail::Minima);
    let stats = indicators::bulk_stats(ts, block.burn_in_fraction).ok();

    let shape_of = |f: &Option<GevFit>| match f {
        Some(fit) => (fit.shape(), fit.shape_std_error()),
        None => (f64::NAN, 0.0),
    };
    let (kappa_max_mean, kappa_max_std) = shape_of(&fit_max);
    let (kappa_min_mean, kappa_min_std) = shape_of(&fit_min);

    ScanPoint {
        control_value: control,
        kappa_max_mean,
        kappa_max_std,
        kappa_min_mean,
        kappa_min_std,
        n_transitions_total: 0,
        variance_mean: stats.map_or(f64::NAN, |s| s.variance),
        skewness_mean: stats.map_or(f64::NAN, |s| s.skewness),
        n_realizations: 1,
        fits_failed: usize::from(fit_max.is_none() || fit_min.is_none()),
    }
}
