//! `tipscan` — tipping-point detection from block-extreme statistics.
//!
//! Subcommands cover the whole pipeline: `simulate` dumps raw series from
//! the two bistable toy models, `fit` fits a GEV to the block extremes of
//! one series, `scan-model` and `scan-data` sweep a control parameter
//! (simulated ensembles or ingested series) and locate the value where
//! the minima shape parameter changes sign, and `rescale` overlays
//! double-well scans at matched bin-length/noise combinations.
//!
//! Every run echoes its fully resolved configuration to
//! `<out-dir>/run-config.toml`; re-running from that file reproduces the
//! outputs byte for byte. Failures exit nonzero with a JSON error object
//! on stderr. `RAYON_NUM_THREADS` caps the worker threads of parallel
//! builds.

mod commands;
mod config;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use tipscan_core::ensemble::FitAggregation;
use tipscan_core::extremes::Tail;

#[derive(Parser)]
#[command(
    name = "tipscan",
    version,
    about = "Detect critical transitions from the extreme-value statistics of time series",
    after_help = "Flags override config-file values; every run writes the resolved \
                  configuration to <out-dir>/run-config.toml."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its values
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    /// Directory for outputs and the resolved-config echo
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Toy model: "shear" or "double-well"
    #[arg(long)]
    model: Option<String>,
    /// Shear damping of the driven amplitude
    #[arg(long)]
    mu: Option<f64>,
    /// Shear damping of the driving amplitude
    #[arg(long)]
    nu: Option<f64>,
    /// Multiplicative noise amplitude (shear control parameter)
    #[arg(long)]
    noise_u: Option<f64>,
    /// Energy threshold counting a laminarization
    #[arg(long)]
    laminar_threshold: Option<f64>,
    /// Double-well splitting coefficient
    #[arg(long)]
    a: Option<f64>,
    /// Double-well tilt (control parameter)
    #[arg(long)]
    lambda: Option<f64>,
    /// Double-well additive noise amplitude
    #[arg(long)]
    epsilon: Option<f64>,
    /// Integration step
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a GEV to the block extremes of one series
    Fit {
        #[command(flatten)]
        common: Common,
        /// Input series CSV
        #[arg(long)]
        input: Option<PathBuf>,
        /// Zero-based value column (default: last column)
        #[arg(long)]
        value_column: Option<usize>,
        /// Sampling step fallback when the file carries no dt metadata
        #[arg(long)]
        dt: Option<f64>,
        /// Samples per bin (1 = input is already a sequence of extremes)
        #[arg(long)]
        bin_length: Option<usize>,
        /// Which tail to extract: "maxima" or "minima"
        #[arg(long, value_parser = parse_tail)]
        tail: Option<Tail>,
        #[arg(long)]
        burn_in_fraction: Option<f64>,
        /// Smallest extreme count accepted by the fitter
        #[arg(long)]
        min_extremes: Option<usize>,
    },
    /// Integrate one model realization and dump the raw series
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n_steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Time and reset double-well escapes (double-well only)
        #[arg(long)]
        record_escapes: bool,
    },
    /// Sweep a model's control parameter with seeded ensembles
    ScanModel {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated control values, e.g. "0.02,0.03,0.04"
        #[arg(long, value_delimiter = ',')]
        control_grid: Option<Vec<f64>>,
        /// Evenly spaced grid alternative to --control-grid
        #[arg(long, requires_all = ["grid_stop", "grid_count"])]
        grid_start: Option<f64>,
        #[arg(long)]
        grid_stop: Option<f64>,
        #[arg(long)]
        grid_count: Option<usize>,
        #[arg(long)]
        n_realizations: Option<usize>,
        #[arg(long)]
        bin_length: Option<usize>,
        #[arg(long)]
        n_bins: Option<usize>,
        #[arg(long)]
        burn_in_fraction: Option<f64>,
        #[arg(long)]
        master_seed: Option<u64>,
        /// "per-realization" or "pooled"
        #[arg(long, value_parser = parse_aggregation)]
        aggregation: Option<FitAggregation>,
        #[arg(long)]
        min_extremes: Option<usize>,
    },
    /// Run the scan pipeline on ingested series (one per control value)
    ScanData {
        #[command(flatten)]
        common: Common,
        /// Series CSV paths, repeatable or comma-separated
        #[arg(long, value_delimiter = ',')]
        inputs: Option<Vec<PathBuf>>,
        #[arg(long)]
        value_column: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        bin_length: Option<usize>,
        #[arg(long)]
        burn_in_fraction: Option<f64>,
        #[arg(long)]
        min_extremes: Option<usize>,
    },
    /// Overlay double-well tilt scans at matched bin-length/noise pairs
    Rescale {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Comma-separated tilt values
        #[arg(long, value_delimiter = ',')]
        lambda_grid: Option<Vec<f64>>,
        /// Pairs as "bin_length:epsilon", e.g. "2000:0.30,20000:0.26"
        #[arg(long, value_delimiter = ',')]
        pairs: Option<Vec<String>>,
        #[arg(long)]
        n_realizations: Option<usize>,
        #[arg(long)]
        n_bins: Option<usize>,
        #[arg(long)]
        burn_in_fraction: Option<f64>,
        #[arg(long)]
        master_seed: Option<u64>,
        #[arg(long)]
        min_extremes: Option<usize>,
    },
}

fn parse_tail(raw: &str) -> Result<Tail, String> {
    match raw {
        "maxima" => Ok(Tail::Maxima),
        "minima" => Ok(Tail::Minima),
        other => Err(format!("'{other}' is not a tail (use 'maxima' or 'minima')")),
    }
}

fn parse_aggregation(raw: &str) -> Result<FitAggregation, String> {
    match raw {
        "per-realization" => Ok(FitAggregation::PerRealization),
        "pooled" => Ok(FitAggregation::Pooled),
        other => Err(format!(
            "'{other}' is not an aggregation (use 'per-realization' or 'pooled')"
        )),
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Fit {
            common,
            input,
            value_column,
            dt,
            bin_length,
            tail,
            burn_in_fraction,
            min_extremes,
        } => commands::fit(
            &common,
            commands::FitFlags {
                input,
                value_column,
                dt,
                bin_length,
                tail,
                burn_in_fraction,
                min_extremes,
            },
        ),
        Command::Simulate {
            common,
            model,
            n_steps,
            seed,
            record_escapes,
        } => commands::simulate(&common, &model, n_steps, seed, record_escapes),
        Command::ScanModel {
            common,
            model,
            control_grid,
            grid_start,
            grid_stop,
            grid_count,
            n_realizations,
            bin_length,
            n_bins,
            burn_in_fraction,
            master_seed,
            aggregation,
            min_extremes,
        } => {
            let grid = match (control_grid, grid_start) {
                (Some(g), _) => Some(g),
                (None, Some(start)) => {
                    let (stop, count) = (grid_stop.unwrap(), grid_count.unwrap());
                    if count < 2 {
                        bail!("--grid-count must be at least 2");
                    }
                    let step = (stop - start) / (count - 1) as f64;
                    Some((0..count).map(|i| start + step * i as f64).collect())
                }
                (None, None) => None,
            };
            commands::scan_model(
                &common,
                &model,
                commands::ScanFlags {
                    control_grid: grid,
                    n_realizations,
                    bin_length,
                    n_bins,
                    burn_in_fraction,
                    master_seed,
                    aggregation,
                    min_extremes,
                },
            )
        }
        Command::ScanData {
            common,
            inputs,
            value_column,
            dt,
            bin_length,
            burn_in_fraction,
            min_extremes,
        } => commands::scan_data(
            &common,
            commands::ScanDataFlags {
                inputs,
                value_column,
                dt,
                bin_length,
                burn_in_fraction,
                min_extremes,
            },
        ),
        Command::Rescale {
            common,
            a,
            dt,
            lambda_grid,
            pairs,
            n_realizations,
            n_bins,
            burn_in_fraction,
            master_seed,
            min_extremes,
        } => commands::rescale(
            &common,
            commands::RescaleFlags {
                a,
                dt,
                lambda_grid,
                pairs,
                n_realizations,
                n_bins,
                burn_in_fraction,
                master_seed,
                min_extremes,
            },
        ),
    }
}

fn main() {
    if let Err(err) = run() {
        let chain: Vec<String> = err.chain().map(|c| c.to_string()).collect();
        let payload = serde_json::json!({
            "error": chain[0],
            "context": chain[1..],
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}
