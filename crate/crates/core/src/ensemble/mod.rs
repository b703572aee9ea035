//! Control-parameter scans over ensembles of realizations.

mod external;
mod rescale;
mod scan;
mod threshold;

pub use external::{analyze_external, ExternalScan};
pub use rescale::{rescaled_scan, RescalePair, RescaledCurve};
pub use scan::{run_scan, FitAggregation, ScanConfig, ScanModel, ScanPoint};
pub use threshold::{detect_threshold, ThresholdEstimate};
