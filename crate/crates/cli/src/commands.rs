//! Subcommand implementations: merge config and flags, echo the resolved
//! configuration, run the core pipeline, emit CSV/JSON.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;
use tipscan_core::ensemble::{
    analyze_external, detect_threshold, rescaled_scan, run_scan, FitAggregation, RescalePair,
    ScanConfig, ScanModel, ScanPoint, ThresholdEstimate,
};
use tipscan_core::extremes::{block_extremes, BlockSpec, Tail};
use tipscan_core::gev::{self, FitOptions};
use tipscan_core::io as coreio;
use tipscan_core::sde::{
    simulate_doublewell, simulate_shear, CoupledShearSpec, DoubleWellSpec, RunResult,
    DEFAULT_LAMINAR_THRESHOLD,
};

use crate::config::{
    pick, require, ConfigFile, FitSection, ModelSection, PairSection, RescaleSection,
    ScanDataSection, ScanModelSection, SimulateSection, SCHEMA_VERSION,
};
use crate::Common;

const ECHO_NAME: &str = "run-config.toml";

fn prepare_out_dir(common: &Common) -> Result<PathBuf> {
    std::fs::create_dir_all(&common.out_dir)
        .with_context(|| format!("cannot create out dir '{}'", common.out_dir.display()))?;
    Ok(common.out_dir.clone())
}

fn load_config(common: &Common) -> Result<ConfigFile> {
    match &common.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::default()),
    }
}

fn echo_config(out_dir: &Path, section: impl FnOnce(&mut ConfigFile)) -> Result<()> {
    let mut file = ConfigFile {
        schema_version: Some(SCHEMA_VERSION.to_string()),
        ..ConfigFile::default()
    };
    section(&mut file);
    file.write(&out_dir.join(ECHO_NAME))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = format!("{:#}\n", value);
    std::fs::write(path, text).with_context(|| format!("cannot write '{}'", path.display()))
}

/// The contract threshold object: either the located crossing or an
/// explicit null with the observed shape range (a valid "no threshold in
/// range" finding, not an error).
fn threshold_json(
    threshold: &tipscan_core::Result<ThresholdEstimate>,
    points: &[ScanPoint],
) -> serde_json::Value {
    match threshold {
        Ok(t) => json!({
            "control_critical": t.control_critical,
            "uncertainty": t.uncertainty,
            "crossings": t.all_crossings,
            "method": "linear-interp-kappa-min",
        }),
        Err(_) => {
            let finite: Vec<f64> = points
                .iter()
                .map(|p| p.kappa_min_mean)
                .filter(|v| v.is_finite())
                .collect();
            let range = if finite.is_empty() {
                serde_json::Value::Null
            } else {
                json!([
                    finite.iter().cloned().fold(f64::INFINITY, f64::min),
                    finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                ])
            };
            json!({ "crossing": null, "kappa_range": range })
        }
    }
}

// ---------------------------------------------------------------------------
// model resolution
// ---------------------------------------------------------------------------

enum ResolvedModel {
    Shear(CoupledShearSpec),
    DoubleWell(DoubleWellSpec),
}

/// Merge model flags over a config model section.
///
/// `sweeping` distinguishes scans (the control parameter comes from the
/// grid and must not be set) from single runs (it is required).
fn resolve_model(
    args: &crate::ModelArgs,
    file: Option<&ModelSection>,
    sweeping: bool,
    seed: u64,
) -> Result<(ResolvedModel, ModelSection)> {
    let kind = match args.model.as_deref() {
        Some("shear") => "shear",
        Some("double-well") | Some("double_well") => "double-well",
        Some(other) => bail!("unknown model '{other}' (use 'shear' or 'double-well')"),
        None => match file {
            Some(ModelSection::Shear { .. }) => "shear",
            Some(ModelSection::DoubleWell { .. }) => "double-well",
            None => bail!("no model given (use --model or a [..model..] config table)"),
        },
    };

    if kind == "shear" {
        let (f_mu, f_nu, f_dt, f_u, f_th) = match file {
            Some(ModelSection::Shear {
                mu,
                nu,
                dt,
                noise_u,
                laminar_threshold,
            }) => (Some(*mu), Some(*nu), Some(*dt), *noise_u, *laminar_threshold),
            _ => (None, None, None, None, None),
        };
        let mu = require(args.mu, f_mu, "mu")?;
        let nu = require(args.nu, f_nu, "nu")?;
        let dt = pick(args.dt, f_dt, 0.01);
        let threshold = pick(args.laminar_threshold, f_th, DEFAULT_LAMINAR_THRESHOLD);
        let noise_u = if sweeping {
            if args.noise_u.or(f_u).is_some() {
                bail!("noise_u is swept by the control grid; do not set it for scan-model");
            }
            0.0
        } else {
            require(args.noise_u, f_u, "noise_u")?
        };
        let spec = CoupledShearSpec::new(mu, nu, noise_u, dt, seed)?
            .with_laminar_threshold(threshold)?;
        let echo = ModelSection::Shear {
            mu,
            nu,
            dt,
            noise_u: (!sweeping).then_some(noise_u),
            laminar_threshold: Some(threshold),
        };
        Ok((ResolvedModel::Shear(spec), echo))
    } else {
        let (f_a, f_dt, f_eps, f_lambda) = match file {
            Some(ModelSection::DoubleWell {
                a,
                dt,
                epsilon,
                lambda,
            }) => (Some(*a), Some(*dt), *epsilon, *lambda),
            _ => (None, None, None, None),
        };
        let a = require(args.a, f_a, "a")?;
        let dt = pick(args.dt, f_dt, 0.01);
        let epsilon = require(args.epsilon, f_eps, "epsilon")?;
        let lambda = if sweeping {
            if args.lambda.or(f_lambda).is_some() {
                bail!("lambda is swept by the control grid; do not set it for scan-model");
            }
            0.0
        } else {
            require(args.lambda, f_lambda, "lambda")?
        };
        let spec = DoubleWellSpec::new(a, lambda, epsilon, dt, seed)?;
        let echo = ModelSection::DoubleWell {
            a,
            dt,
            epsilon: Some(epsilon),
            lambda: (!sweeping).then_some(lambda),
        };
        Ok((ResolvedModel::DoubleWell(spec), echo))
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

pub struct FitFlags {
    pub input: Option<PathBuf>,
    pub value_column: Option<usize>,
    pub dt: Option<f64>,
    pub bin_length: Option<usize>,
    pub tail: Option<Tail>,
    pub burn_in_fraction: Option<f64>,
    pub min_extremes: Option<usize>,
}

pub fn fit(common: &Common, flags: FitFlags) -> Result<()> {
    let out_dir = prepare_out_dir(common)?;
    let section = load_config(common)?.fit.unwrap_or_default();

    let input = require(
        flags.input.map(|p| p.display().to_string()),
        section.input.clone(),
        "input",
    )?;
    let value_column = flags.value_column.or(section.value_column);
    let dt = pick(flags.dt, section.dt, 1.0);
    let bin_length = pick(flags.bin_length, section.bin_length, 1);
    let tail = pick(flags.tail, section.tail, Tail::Maxima);
    // pre-blocked inputs are the common case here, so no burn-in by default
    let burn_in = pick(flags.burn_in_fraction, section.burn_in_fraction, 0.0);
    let min_extremes = pick(flags.min_extremes, section.min_extremes, 30);

    echo_config(&out_dir, |f| {
        f.fit = Some(FitSection {
            input: Some(input.clone()),
            value_column,
            dt: Some(dt),
            bin_length: Some(bin_length),
            tail: Some(tail),
            burn_in_fraction: Some(burn_in),
            min_extremes: Some(min_extremes),
        });
    })?;

    let series = coreio::read_series_csv(Path::new(&input), value_column, dt)?;
    let spec = BlockSpec::with_burn_in(bin_length, tail, burn_in)?;
    let extremes = block_extremes(&series, &spec)?;
    let fit = gev::fit_mle_with(
        &extremes,
        &FitOptions {
            min_extremes,
            ..FitOptions::default()
        },
    )?;

    coreio::write_extremes_csv(&out_dir.join("extremes.csv"), &extremes)?;
    write_json(&out_dir.join("fit.json"), &serde_json::to_value(&fit)?)?;
    println!(
        "fitted {} extremes: shape {:.6} (95% CI {:.6}..{:.6}), converged: {}",
        fit.n_extremes,
        fit.shape(),
        fit.shape_ci95().0,
        fit.shape_ci95().1,
        fit.converged
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn simulate(
    common: &Common,
    model_args: &crate::ModelArgs,
    n_steps: Option<usize>,
    seed: Option<u64>,
    record_escapes: bool,
) -> Result<()> {
    let out_dir = prepare_out_dir(common)?;
    let section = load_config(common)?.simulate.unwrap_or_default();

    let n_steps = require(n_steps, section.n_steps, "n_steps")?;
    let seed = pick(seed, section.seed, 0);
    let record = record_escapes || section.record_escapes.unwrap_or(false);
    let (model, model_echo) = resolve_model(model_args, section.model.as_ref(), false, seed)?;

    if record && matches!(model, ResolvedModel::Shear(_)) {
        bail!("escape recording applies to the double-well model only");
    }

    echo_config(&out_dir, |f| {
        f.simulate = Some(SimulateSection {
            n_steps: Some(n_steps),
            seed: Some(seed),
            record_escapes: Some(record),
            model: Some(model_echo.clone()),
        });
    })?;

    let run: RunResult = match &model {
        ResolvedModel::Shear(spec) => simulate_shear(spec, n_steps)?,
        ResolvedModel::DoubleWell(spec) => simulate_doublewell(spec, n_steps, record)?,
    };

    coreio::write_series_csv(&out_dir.join("series.csv"), &run.series)?;
    write_json(
        &out_dir.join("run.json"),
        &json!({
            "label": run.series.label,
            "control_value": run.series.control_value,
            "n_steps": n_steps,
            "seed": seed,
            "n_transitions": run.n_transitions,
            "escape_times": run.escape_times,
        }),
    )?;
    println!(
        "simulated {n_steps} steps ({} transitions); series in {}",
        run.n_transitions,
        out_dir.join("series.csv").display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// scan-model
// ---------------------------------------------------------------------------

pub struct ScanFlags {
    pub control_grid: Option<Vec<f64>>,
    pub n_realizations: Option<usize>,
    pub bin_length: Option<usize>,
    pub n_bins: Option<usize>,
    pub burn_in_fraction: Option<f64>,
    pub master_seed: Option<u64>,
    pub aggregation: Option<FitAggregation>,
    pub min_extremes: Option<usize>,
}

pub fn scan_model(common: &Common, model_args: &crate::ModelArgs, flags: ScanFlags) -> Result<()> {
    let out_dir = prepare_out_dir(common)?;
    let section = load_config(common)?.scan_model.unwrap_or_default();

    let grid = require(flags.control_grid, section.control_grid.clone(), "control_grid")?;
    let cfg = ScanConfig {
        n_realizations: pick(flags.n_realizations, section.n_realizations, 10),
        bin_length: require(flags.bin_length, section.bin_length, "bin_length")?,
        n_bins: require(flags.n_bins, section.n_bins, "n_bins")?,
        burn_in_fraction: pick(flags.burn_in_fraction, section.burn_in_fraction, 0.1),
        master_seed: pick(flags.master_seed, section.master_seed, 0),
        aggregation: pick(
            flags.aggregation,
            section.aggregation,
            FitAggregation::PerRealization,
        ),
        fit: FitOptions {
            min_extremes: pick(flags.min_extremes, section.min_extremes, 30),
            ..FitOptions::default()
        },
    };
    let (model, model_echo) = resolve_model(model_args, section.model.as_ref(), true, 0)?;

    echo_config(&out_dir, |f| {
        f.scan_model = Some(ScanModelSection {
            control_grid: Some(grid.clone()),
            n_realizations: Some(cfg.n_realizations),
            bin_length: Some(cfg.bin_length),
            n_bins: Some(cfg.n_bins),
            burn_in_fraction: Some(cfg.burn_in_fraction),
            master_seed: Some(cfg.master_seed),
            aggregation: Some(cfg.aggregation),
            min_extremes: Some(cfg.fit.min_extremes),
            model: Some(model_echo.clone()),
        });
    })?;

    let scan_model = match model {
        ResolvedModel::Shear(spec) => ScanModel::Shear(spec),
        ResolvedModel::DoubleWell(spec) => ScanModel::DoubleWell(spec),
    };
    let points = run_scan(&scan_model, &grid, &cfg)?;
    let threshold = detect_threshold(&points);

    coreio::write_scan_csv(&out_dir.join("scan.csv"), &points)?;
    write_json(
        &out_dir.join("threshold.json"),
        &threshold_json(&threshold, &points),
    )?;
    match &threshold {
        Ok(t) => println!(
            "scanned {} control values; {} crossing at {:.6} ± {:.6}",
            points.len(),
            scan_model.control_name(),
            t.control_critical,
            t.uncertainty
        ),
        Err(e) => println!("scanned {} control values; no crossing ({e})", points.len()),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scan-data
// ---------------------------------------------------------------------------

pub struct ScanDataFlags {
    pub inputs: Option<Vec<PathBuf>>,
    pub value_column: Option<usize>,
    pub dt: Option<f64>,
    pub bin_length: Option<usize>,
    pub burn_in_fraction: Option<f64>,
    pub min_extremes: Option<usize>,
}

pub fn scan_data(common: &Common, flags: ScanDataFlags) -> Result<()> {
    let out_dir = prepare_out_dir(common)?;
    let section = load_config(common)?.scan_data.unwrap_or_default();

    let inputs: Vec<String> = require(
        flags
            .inputs
            .map(|v| v.iter().map(|p| p.display().to_string()).collect()),
        section.inputs.clone(),
        "inputs",
    )?;
    if inputs.is_empty() {
        bail!("inputs is empty");
    }
    let value_column = flags.value_column.or(section.value_column);
    let dt = pick(flags.dt, section.dt, 1.0);
    let bin_length = require(flags.bin_length, section.bin_length, "bin_length")?;
    let burn_in = pick(flags.burn_in_fraction, section.burn_in_fraction, 0.1);
    let min_extremes = pick(flags.min_extremes, section.min_extremes, 30);

    echo_config(&out_dir, |f| {
        f.scan_data = Some(ScanDataSection {
            inputs: Some(inputs.clone()),
            value_column,
            dt: Some(dt),
            bin_length: Some(bin_length),
            burn_in_fraction: Some(burn_in),
            min_extremes: Some(min_extremes),
        });
    })?;

    let series: Vec<_> = inputs
        .iter()
        .map(|p| coreio::read_series_csv(Path::new(p), value_column, dt))
        .collect::<tipscan_core::Result<_>>()?;
    let block = BlockSpec::with_burn_in(bin_length, Tail::Minima, burn_in)?;
    let opts = FitOptions {
        min_extremes,
        ..FitOptions::default()
    };
    let scan = analyze_external(&series, &block, &opts)?;

    coreio::write_scan_csv(&out_dir.join("scan.csv"), &scan.points)?;
    write_json(
        &out_dir.join("threshold.json"),
        &threshold_json(&scan.threshold, &scan.points),
    )?;
    match &scan.threshold {
        Ok(t) => println!(
            "analyzed {} series; crossing at {:.6} ± {:.6}",
            scan.points.len(),
            t.control_critical,
            t.uncertainty
        ),
        Err(e) => println!("analyzed {} series; no crossing ({e})", scan.points.len()),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// rescale
// ---------------------------------------------------------------------------

pub struct RescaleFlags {
    pub a: Option<f64>,
    pub dt: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub pairs: Option<Vec<String>>,
    pub n_realizations: Option<usize>,
    pub n_bins: Option<usize>,
    pub burn_in_fraction: Option<f64>,
    pub master_seed: Option<u64>,
    pub min_extremes: Option<usize>,
}

fn parse_pair(raw: &str) -> Result<PairSection> {
    let (m, eps) = raw
        .split_once(':')
        .with_context(|| format!("pair '{raw}' is not 'bin_length:epsilon'"))?;
    Ok(PairSection {
        bin_length: m.trim().parse().with_context(|| format!("bad bin length in '{raw}'"))?,
        epsilon: eps.trim().parse().with_context(|| format!("bad epsilon in '{raw}'"))?,
    })
}

pub fn rescale(common: &Common, flags: RescaleFlags) -> Result<()> {
    let out_dir = prepare_out_dir(common)?;
    let section = load_config(common)?.rescale.unwrap_or_default();

    let pairs_flag = flags
        .pairs
        .map(|raw| raw.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>>>())
        .transpose()?;
    let pairs = require(pairs_flag, section.pairs.clone(), "pairs")?;
    if pairs.is_empty() {
        bail!("pairs is empty");
    }
    let a = require(flags.a, section.a, "a")?;
    let dt = pick(flags.dt, section.dt, 0.01);
    let lambda_grid = require(flags.lambda_grid, section.lambda_grid.clone(), "lambda_grid")?;
    let cfg = ScanConfig {
        n_realizations: pick(flags.n_realizations, section.n_realizations, 30),
        bin_length: 0, // set per pair
        n_bins: require(flags.n_bins, section.n_bins, "n_bins")?,
        burn_in_fraction: pick(flags.burn_in_fraction, section.burn_in_fraction, 0.1),
        master_seed: pick(flags.master_seed, section.master_seed, 0),
        aggregation: FitAggregation::PerRealization,
        fit: FitOptions {
            min_extremes: pick(flags.min_extremes, section.min_extremes, 30),
            ..FitOptions::default()
        },
    };

    echo_config(&out_dir, |f| {
        f.rescale = Some(RescaleSection {
            a: Some(a),
            dt: Some(dt),
            lambda_grid: Some(lambda_grid.clone()),
            pairs: Some(pairs.clone()),
            n_realizations: Some(cfg.n_realizations),
            n_bins: Some(cfg.n_bins),
            burn_in_fraction: Some(cfg.burn_in_fraction),
            master_seed: Some(cfg.master_seed),
            min_extremes: Some(cfg.fit.min_extremes),
        });
    })?;

    let core_pairs: Vec<RescalePair> = pairs
        .iter()
        .map(|p| RescalePair {
            bin_length: p.bin_length,
            epsilon: p.epsilon,
        })
        .collect();
    let curves = rescaled_scan(a, dt, &lambda_grid, &core_pairs, &cfg);

    let ok_curves: Vec<_> = curves.iter().filter_map(|c| c.as_ref().ok()).collect();
    coreio::write_rescale_csv(&out_dir.join("rescale.csv"), &ok_curves)?;

    let pair_reports: Vec<serde_json::Value> = curves
        .iter()
        .zip(&core_pairs)
        .map(|(outcome, pair)| match outcome {
            Ok(curve) => json!({
                "bin_length": pair.bin_length,
                "epsilon": pair.epsilon,
                "rescaled_value": pair.rescaled_value(),
                "threshold": threshold_json(&curve.threshold, &curve.points),
            }),
            Err(e) => json!({
                "bin_length": pair.bin_length,
                "epsilon": pair.epsilon,
                "rescaled_value": pair.rescaled_value(),
                "error": e.to_string(),
            }),
        })
        .collect();
    write_json(&out_dir.join("rescale.json"), &json!({ "pairs": pair_reports }))?;

    println!(
        "rescale: {}/{} pairs scanned; overlay in {}",
        ok_curves.len(),
        core_pairs.len(),
        out_dir.join("rescale.csv").display()
    );
    Ok(())
}
