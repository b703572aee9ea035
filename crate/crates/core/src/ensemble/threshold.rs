//! Zero-crossing detection on the minima shape parameter.
//!
//! The threshold criterion: the control value where the ensemble-mean
//! shape parameter of the minima changes sign. Linear interpolation
//! between the bracketing grid points gives the estimate; the data density
//! never justifies a higher-order model, and linearity keeps the
//! uncertainty propagation transparent.

use serde::Serialize;

use super::scan::ScanPoint;
use crate::error::{EvtError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdEstimate {
    /// Interpolated control value where the minima shape crosses zero.
    pub control_critical: f64,
    /// Half-width of the interval swept by the crossing when the bracket
    /// means are shifted by plus/minus one ensemble standard deviation.
    pub uncertainty: f64,
    /// The grid points on either side of the primary crossing.
    pub bracketing_points: (ScanPoint, ScanPoint),
    /// Every sign change found, in scan direction; the first is primary.
    pub all_crossings: Vec<f64>,
}

/// Locate sign changes of `kappa_min_mean` along the scan.
///
/// Points whose minima fit failed entirely (NaN mean) are skipped. Errors
/// when fewer than two usable points remain, or when the shape never
/// changes sign — the latter carries the observed shape range, which is
/// itself the useful "far from threshold" answer.
pub fn detect_threshold(scan: &[ScanPoint]) -> Result<ThresholdEstimate> {
    let usable: Vec<&ScanPoint> = scan.iter().filter(|p| p.kappa_min_mean.is_finite()).collect();
    if usable.len() < 2 {
        return Err(EvtError::InsufficientScan { got: usable.len() });
    }

    let mut crossings = Vec::new();
    let mut primary: Option<(usize, f64)> = None;
    for i in 0..usable.len() - 1 {
        let (a, b) = (usable[i], usable[i + 1]);
        let (ka, kb) = (a.kappa_min_mean, b.kappa_min_mean);
        // a sign change includes an exact zero on the left edge
        if ka == 0.0 || ka * kb < 0.0 {
            let t = if ka == kb { 0.0 } else { -ka / (kb - ka) };
            let c = a.control_value + t * (b.control_value - a.control_value);
            if primary.is_none() {
                primary = Some((i, c));
            }
            crossings.push(c);
        }
    }

    let Some((idx, control_critical)) = primary else {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &usable {
            lo = lo.min(p.kappa_min_mean);
            hi = hi.max(p.kappa_min_mean);
        }
        return Err(EvtError::NoCrossing { min: lo, max: hi });
    };

    let (a, b) = (usable[idx], usable[idx + 1]);
    let uncertainty = bracket_sweep(a, b).max(f64::EPSILON * (1.0 + control_critical.abs()));

    Ok(ThresholdEstimate {
        control_critical,
        uncertainty,
        bracketing_points: (a.clone(), b.clone()),
        all_crossings: crossings,
    })
}

/// Half-width of the crossing interval when both bracket means shift by
/// plus/minus one standard deviation. A shifted pair whose values share a
/// sign no longer brackets zero: the crossing has left the cell through
/// the edge that kept its original sign, so it pins there.
fn bracket_sweep(a: &ScanPoint, b: &ScanPoint) -> f64 {
    let sign_a = a.kappa_min_mean <= 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for sa in [-1.0, 1.0] {
        for sb in [-1.0, 1.0] {
            let ka = a.kappa_min_mean + sa * a.kappa_min_std;
            let kb = b.kappa_min_mean + sb * b.kappa_min_std;
            let t = if ka * kb > 0.0 {
                if (ka <= 0.0) == sign_a {
                    1.0 // crossing pushed past the far bracket
                } else {
                    0.0 // crossing pulled before the near bracket
                }
            } else if ka == kb {
                0.5
            } else {
                (-ka / (kb - ka)).clamp(0.0, 1.0)
            };
            let c = a.control_value + t * (b.control_value - a.control_value);
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    0.5 * (hi - lo)
}
