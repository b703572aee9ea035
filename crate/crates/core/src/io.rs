//! CSV ingestion and emission.
//!
//! Series files are plain CSV with optional `#`-prefixed `key=value`
//! metadata lines (`dt`, `control_value`, `label`), an optional header
//! row, and one value column (by default the last). Floats are emitted
//! with 17 significant digits, so a write/read round trip reproduces every
//! `f64` bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::ensemble::{RescaledCurve, ScanPoint};
use crate::error::{EvtError, Result};
use crate::series::TimeSeries;

/// 17 significant digits: the shortest width that is always lossless.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Read one series from a CSV file.
///
/// `value_column` is a zero-based index; `None` selects the last column of
/// each row. `default_dt` applies when the file carries no `dt` metadata.
/// Errors are specific: missing file, unparseable row (with its 1-based
/// line number), non-finite value, empty file.
pub fn read_series_csv(
    path: &Path,
    value_column: Option<usize>,
    default_dt: f64,
) -> Result<TimeSeries> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| EvtError::FileOpen {
        path: display.clone(),
        source,
    })?;

    let mut dt = default_dt;
    let mut control_value: Option<f64> = None;
    let mut label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());

    let mut values = Vec::new();
    let mut header_allowed = true;

    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| EvtError::FileOpen {
            path: display.clone(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(meta) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = meta.split_once('=') {
                match key.trim() {
                    "dt" => {
                        dt = parse_field(value, &display, line_no)?;
                    }
                    "control_value" => {
                        control_value = Some(parse_field(value, &display, line_no)?);
                    }
                    "label" => label = value.trim().to_string(),
                    _ => {} // descriptive comments pass through
                }
            }
            continue;
        }

        let fields: Vec<&str> = trimmed.split(',').collect();
        let idx = value_column.unwrap_or(fields.len().saturating_sub(1));
        let Some(field) = fields.get(idx) else {
            // a header row may have fewer columns than requested
            if header_allowed {
                header_allowed = false;
                continue;
            }
            return Err(EvtError::BadRow {
                path: display,
                line: line_no,
                field: format!("column {idx} of a {}-column row", fields.len()),
            });
        };
        match field.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => {
                values.push(v);
                header_allowed = false;
            }
            Ok(_) => {
                return Err(EvtError::NonFiniteRow {
                    path: display,
                    line: line_no,
                });
            }
            Err(_) if header_allowed => {
                // the single non-numeric row leading the data is a header
                header_allowed = false;
            }
            Err(_) => {
                return Err(EvtError::BadRow {
                    path: display,
                    line: line_no,
                    field: field.trim().to_string(),
                });
            }
        }
    }

    if values.is_empty() {
        return Err(EvtError::EmptyCsv { path: display });
    }
    let mut ts = TimeSeries::new(values, dt, label)?;
    ts.control_value = control_value;
    Ok(ts)
}

fn parse_field(raw: &str, path: &str, line: usize) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(EvtError::NonFiniteRow {
            path: path.to_string(),
            line,
        }),
        Err(_) => Err(EvtError::BadRow {
            path: path.to_string(),
            line,
            field: raw.trim().to_string(),
        }),
    }
}

/// Write a series with its metadata, a `t,value` header, and lossless
/// float formatting.
pub fn write_series_csv(path: &Path, ts: &TimeSeries) -> Result<()> {
    let mut w = writer(path)?;
    let display = path.display().to_string();
    let io_err = |source| EvtError::FileWrite {
        path: display.clone(),
        source,
    };
    writeln!(w, "# label={}", ts.label).map_err(io_err)?;
    writeln!(w, "# dt={}", fmt_f64(ts.dt)).map_err(io_err)?;
    if let Some(c) = ts.control_value {
        writeln!(w, "# control_value={}", fmt_f64(c)).map_err(io_err)?;
    }
    writeln!(w, "t,value").map_err(io_err)?;
    for (i, &v) in ts.values.iter().enumerate() {
        writeln!(w, "{},{}", fmt_f64(i as f64 * ts.dt), fmt_f64(v)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// One column of extremes, ready for refitting.
pub fn write_extremes_csv(path: &Path, extremes: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    let display = path.display().to_string();
    let io_err = |source| EvtError::FileWrite {
        path: display.clone(),
        source,
    };
    writeln!(w, "extreme").map_err(io_err)?;
    for &v in extremes {
        writeln!(w, "{}", fmt_f64(v)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Scan table, one row per control value.
pub fn write_scan_csv(path: &Path, points: &[ScanPoint]) -> Result<()> {
    let mut w = writer(path)?;
    let display = path.display().to_string();
    let io_err = |source| EvtError::FileWrite {
        path: display.clone(),
        source,
    };
    writeln!(
        w,
        "control_value,kappa_max_mean,kappa_max_std,kappa_min_mean,kappa_min_std,\
         n_transitions,variance_mean,skewness_mean,fits_failed"
    )
    .map_err(io_err)?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(p.control_value),
            fmt_f64(p.kappa_max_mean),
            fmt_f64(p.kappa_max_std),
            fmt_f64(p.kappa_min_mean),
            fmt_f64(p.kappa_min_std),
            p.n_transitions_total,
            fmt_f64(p.variance_mean),
            fmt_f64(p.skewness_mean),
            p.fits_failed
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Overlay table of every rescaled curve that produced points.
pub fn write_rescale_csv(path: &Path, curves: &[&RescaledCurve]) -> Result<()> {
    let mut w = writer(path)?;
    let display = path.display().to_string();
    let io_err = |source| EvtError::FileWrite {
        path: display.clone(),
        source,
    };
    writeln!(
        w,
        "bin_length,epsilon,control_value,kappa_min_mean,kappa_min_std,variance_mean,\
         skewness_mean,fits_failed"
    )
    .map_err(io_err)?;
    for curve in curves {
        for p in &curve.points {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                curve.pair.bin_length,
                fmt_f64(curve.pair.epsilon),
                fmt_f64(p.control_value),
                fmt_f64(p.kappa_min_mean),
                fmt_f64(p.kappa_min_std),
                fmt_f64(p.variance_mean),
                fmt_f64(p.skewness_mean),
                p.fits_failed
            )
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| EvtError::FileWrite {
            path: path.display().to_string(),
            source,
        })
}
