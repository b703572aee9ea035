//! Observable time series.

use serde::Serialize;

use crate::error::{EvtError, Result};

/// An ordered sequence of observable samples with a fixed sampling step.
///
/// `control_value` tags the series with the control-parameter value it was
/// produced at (noise amplitude, potential tilt, Reynolds number, ...) so
/// that sets of series can be assembled into a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    /// Time units per sample, > 0.
    pub dt: f64,
    pub label: String,
    pub control_value: Option<f64>,
}

impl TimeSeries {
    /// Build a validated series: non-empty, all values finite, `dt > 0`.
    pub fn new(values: Vec<f64>, dt: f64, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(EvtError::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EvtError::NonFiniteValue { index });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EvtError::InvalidParameter(format!("dt = {dt} must be > 0")));
        }
        Ok(Self {
            values,
            dt,
            label: label.into(),
            control_value: None,
        })
    }

    pub fn with_control(mut self, control_value: f64) -> Self {
        self.control_value = Some(control_value);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total covered time, `len * dt`.
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            TimeSeries::new(vec![], 1.0, "x"),
            Err(EvtError::EmptySeries)
        ));
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN], 1.0, "x"),
            Err(EvtError::NonFiniteValue { index: 1 })
        ));
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::INFINITY], 1.0, "x"),
            Err(EvtError::NonFiniteValue { index: 1 })
        ));
        assert!(TimeSeries::new(vec![1.0], 0.0, "x").is_err());
    }

    #[test]
    fn carries_control_value() {
        let ts = TimeSeries::new(vec![1.0, 2.0], 0.5, "e").unwrap().with_control(300.0);
        assert_eq!(ts.control_value, Some(300.0));
        assert_eq!(ts.len(), 2);
        assert_eq!(ts.duration(), 1.0);
    }
}
