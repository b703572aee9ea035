//! Per-control-value ensembles: simulate, extract both tails, fit, and
//! aggregate shape parameters, transition counts, and bulk indicators.

use serde::{Deserialize, Serialize};

use crate::error::{EvtError, Result};
use crate::exec;
use crate::extremes::{block_extremes, BlockSpec, Tail};
use crate::gev::{self, FitOptions, GevFit};
use crate::indicators::{self, BulkStats};
use crate::sde::{simulate_doublewell, simulate_shear, CoupledShearSpec, DoubleWellSpec};
use crate::seeding;

/// The toy model a scan sweeps, with the fields that stay fixed.
///
/// The control value of the scan replaces the noise amplitude of the shear
/// model or the tilt of the double-well model, and the realization seed
/// replaces the spec seed; everything else is taken from the base spec.
/// Double-well scan runs evolve freely (no escape resets): the scan looks
/// for excursions toward the saddle, not completed transitions.
#[derive(Debug, Clone)]
pub enum ScanModel {
    Shear(CoupledShearSpec),
    DoubleWell(DoubleWellSpec),
}

impl ScanModel {
    /// Name of the swept parameter, for labelling outputs.
    pub fn control_name(&self) -> &'static str {
        match self {
            ScanModel::Shear(_) => "noise_u",
            ScanModel::DoubleWell(_) => "lambda",
        }
    }

    fn run(&self, control: f64, seed: u64, n_steps: usize) -> Result<crate::sde::RunResult> {
        match self {
            ScanModel::Shear(base) => {
                let spec = CoupledShearSpec::new(base.mu, base.nu, control, base.dt, seed)?
                    .with_laminar_threshold(base.laminar_threshold)?;
                simulate_shear(&spec, n_steps)
            }
            ScanModel::DoubleWell(base) => {
                let spec = DoubleWellSpec::new(base.a, control, base.epsilon, base.dt, seed)?;
                simulate_doublewell(&spec, n_steps, false)
            }
        }
    }
}

/// How per-realization extremes become one shape estimate per tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitAggregation {
    /// One fit per realization; report mean and standard deviation of the
    /// fitted shapes over the ensemble.
    PerRealization,
    /// Pool every realization's extremes into a single fit; report its
    /// shape estimate and standard error. The fallback when realizations
    /// are too short to fit individually.
    Pooled,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub n_realizations: usize,
    /// Samples per bin (`m`).
    pub bin_length: usize,
    /// Complete bins each realization must yield (`n`).
    pub n_bins: usize,
    pub burn_in_fraction: f64,
    pub master_seed: u64,
    pub aggregation: FitAggregation,
    pub fit: FitOptions,
}

impl ScanConfig {
    fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(EvtError::InvalidParameter(
                "n_realizations must be >= 1".into(),
            ));
        }
        if self.n_bins == 0 {
            return Err(EvtError::InvalidParameter("n_bins must be >= 1".into()));
        }
        // constructs are validated eagerly so per-realization reuse is infallible
        BlockSpec::with_burn_in(self.bin_length, Tail::Maxima, self.burn_in_fraction)?;
        Ok(())
    }

    /// Steps per realization: the smallest series length whose post-burn-in
    /// part holds exactly `n_bins` complete bins.
    pub fn steps_per_realization(&self) -> usize {
        let need = self.bin_length * self.n_bins;
        let kept = |s: usize| s - (self.burn_in_fraction * s as f64).floor() as usize;
        let mut s = (need as f64 / (1.0 - self.burn_in_fraction)).ceil() as usize;
        while kept(s) < need {
            s += 1;
        }
        while s > 1 && kept(s - 1) >= need {
            s -= 1;
        }
        s
    }
}

/// Ensemble aggregates at one control value.
///
/// Shape means and standard deviations are taken over the realizations
/// whose fit of that tail succeeded (mean is NaN when none did); a
/// realization counts toward `fits_failed` when its simulation or either
/// tail fit failed. A point where everything failed is still emitted, with
/// `fits_failed == n_realizations`, rather than dropped.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub control_value: f64,
    pub kappa_max_mean: f64,
    pub kappa_max_std: f64,
    pub kappa_min_mean: f64,
    pub kappa_min_std: f64,
    pub n_transitions_total: u64,
    pub variance_mean: f64,
    pub skewness_mean: f64,
    pub n_realizations: usize,
    pub fits_failed: usize,
}

/// Sweep the control grid, running `n_realizations` independent seeded
/// realizations per grid point.
///
/// The grid must be non-empty and strictly monotone (either direction).
/// Realization seeds derive from `(master_seed, grid index, realization
/// index)`, so the scan is reproducible and parallel-safe; points and
/// realizations are independent work units.
pub fn run_scan(model: &ScanModel, grid: &[f64], cfg: &ScanConfig) -> Result<Vec<ScanPoint>> {
    cfg.validate()?;
    validate_grid(grid)?;
    let n_steps = cfg.steps_per_realization();
    Ok(exec::map_indices(grid.len(), |gi| {
        scan_point(model, grid[gi], gi as u64, cfg, n_steps)
    }))
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(EvtError::NonMonotoneGrid);
    }
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
    if grid.len() > 1 && !increasing && !decreasing {
        return Err(EvtError::NonMonotoneGrid);
    }
    Ok(())
}

struct Realization {
    fit_max: Option<GevFit>,
    fit_min: Option<GevFit>,
    maxima: Vec<f64>,
    minima: Vec<f64>,
    stats: Option<BulkStats>,
    n_transitions: usize,
    sim_ok: bool,
}

impl Realization {
    fn failed() -> Self {
        Self {
            fit_max: None,
            fit_min: None,
            maxima: Vec::new(),
            minima: Vec::new(),
            stats: None,
            n_transitions: 0,
            sim_ok: false,
        }
    }

    fn tail_fits_ok(&self) -> bool {
        let ok = |f: &Option<GevFit>| f.as_ref().is_some_and(|fit| fit.converged);
        ok(&self.fit_max) && ok(&self.fit_min)
    }
}

fn scan_point(
    model: &ScanModel,
    control: f64,
    grid_index: u64,
    cfg: &ScanConfig,
    n_steps: usize,
) -> ScanPoint {
    let outcomes = exec::map_indices(cfg.n_realizations, |ri| {
        let seed = seeding::derive_seed(cfg.master_seed, grid_index, ri as u64);
        realize(model, control, seed, cfg, n_steps)
    });
    aggregate(control, &outcomes, cfg)
}

fn realize(
    model: &ScanModel,
    control: f64,
    seed: u64,
    cfg: &ScanConfig,
    n_steps: usize,
) -> Realization {
    let run = match model.run(control, seed, n_steps) {
        Ok(run) => run,
        Err(_) => return Realization::failed(),
    };
    let spec = |tail| BlockSpec::with_burn_in(cfg.bin_length, tail, cfg.burn_in_fraction)
        .expect("validated in ScanConfig");
    let maxima = block_extremes(&run.series, &spec(Tail::Maxima)).unwrap_or_default();
    let minima = block_extremes(&run.series, &spec(Tail::Minima)).unwrap_or_default();
    let (fit_max, fit_min) = match cfg.aggregation {
        FitAggregation::PerRealization => (
            gev::fit_mle_with(&maxima, &cfg.fit).ok(),
            gev::fit_mle_with(&minima, &cfg.fit).ok(),
        ),
        // pooled mode fits once over the whole ensemble, not per realization
        FitAggregation::Pooled => (None, None),
    };
    let stats = indicators::bulk_stats(&run.series, cfg.burn_in_fraction).ok();
    Realization {
        fit_max,
        fit_min,
        maxima,
        minima,
        stats,
        n_transitions: run.n_transitions,
        sim_ok: true,
    }
}

fn aggregate(control: f64, outcomes: &[Realization], cfg: &ScanConfig) -> ScanPoint {
    let n_transitions_total: u64 = outcomes.iter().map(|o| o.n_transitions as u64).sum();
    let variances: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.stats.as_ref().map(|s| s.variance))
        .collect();
    let skews: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.stats.as_ref().map(|s| s.skewness))
        .collect();

    let ((kmax_mean, kmax_std), (kmin_mean, kmin_std), fits_failed) = match cfg.aggregation {
        FitAggregation::PerRealization => {
            let shapes = |pick: fn(&Realization) -> &Option<GevFit>| -> Vec<f64> {
                outcomes
                    .iter()
                    .filter_map(|o| pick(o).as_ref())
                    .filter(|f| f.converged)
                    .map(|f| f.shape())
                    .collect()
            };
            let failed = outcomes.iter().filter(|o| !o.sim_ok || !o.tail_fits_ok()).count();
            (
                mean_std(&shapes(|o| &o.fit_max)),
                mean_std(&shapes(|o| &o.fit_min)),
                failed,
            )
        }
        FitAggregation::Pooled => {
            let pool = |pick: fn(&Realization) -> &[f64]| -> Vec<f64> {
                outcomes.iter().flat_map(|o| pick(o).iter().copied()).collect()
            };
            let fit_of = |extremes: Vec<f64>| -> (f64, f64) {
                match gev::fit_mle_with(&extremes, &cfg.fit) {
                    Ok(fit) if fit.converged => (fit.shape(), fit.shape_std_error()),
                    _ => (f64::NAN, 0.0),
                }
            };
            let max = fit_of(pool(|o| &o.maxima));
            let min = fit_of(pool(|o| &o.minima));
            let sims_failed = outcomes.iter().filter(|o| !o.sim_ok).count();
            let failed = if max.0.is_nan() || min.0.is_nan() {
                outcomes.len()
            } else {
                sims_failed
            };
            (max, min, failed)
        }
    };

    ScanPoint {
        control_value: control,
        kappa_max_mean: kmax_mean,
        kappa_max_std: kmax_std,
        kappa_min_mean: kmin_mean,
        kappa_min_std: kmin_std,
        n_transitions_total,
        variance_mean: mean_std(&variances).0,
        skewness_mean: mean_std(&skews).0,
        n_realizations: cfg.n_realizations,
        fits_failed,
    }
}

/// Mean and sample standard deviation; `(NaN, 0)` for an empty slice and
/// zero deviation for a single value.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear_base() -> ScanModel {
        ScanModel::Shear(CoupledShearSpec::new(1.0, 0.2475, 0.0, 0.01, 0).unwrap())
    }

    fn small_cfg() -> ScanConfig {
        ScanConfig {
            n_realizations: 4,
            bin_length: 200,
            n_bins: 40,
            burn_in_fraction: 0.1,
            master_seed: 11,
            aggregation: FitAggregation::PerRealization,
            fit: FitOptions::default(),
        }
    }

    #[test]
    fn steps_cover_burn_in_exactly() {
        for (m, n, burn) in [(100, 10, 0.0), (100, 10, 0.1), (7, 13, 0.33), (1, 1, 0.9)] {
            let cfg = ScanConfig {
                bin_length: m,
                n_bins: n,
                burn_in_fraction: burn,
                ..small_cfg()
            };
            let s = cfg.steps_per_realization();
            let kept = s - (burn * s as f64).floor() as usize;
            assert!(kept >= m * n, "m={m} n={n} burn={burn}: kept {kept}");
            assert!(kept < m * n + m, "not minimal: kept {kept} for need {}", m * n);
        }
    }

    #[test]
    fn grid_must_be_strictly_monotone() {
        let cfg = small_cfg();
        let model = shear_base();
        assert!(matches!(
            run_scan(&model, &[], &cfg),
            Err(EvtError::NonMonotoneGrid)
        ));
        assert!(matches!(
            run_scan(&model, &[0.1, 0.1], &cfg),
            Err(EvtError::NonMonotoneGrid)
        ));
        assert!(matches!(
            run_scan(&model, &[0.1, 0.3, 0.2], &cfg),
            Err(EvtError::NonMonotoneGrid)
        ));
        // decreasing is a valid scan direction
        assert!(run_scan(&model, &[0.3, 0.2], &cfg).is_ok());
    }

    #[test]
    fn scan_is_deterministic_in_the_master_seed() {
        let model = shear_base();
        let cfg = small_cfg();
        let grid = [0.1, 0.25];
        let a = run_scan(&model, &grid, &cfg).unwrap();
        let b = run_scan(&model, &grid, &cfg).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.kappa_max_mean.to_bits(), pb.kappa_max_mean.to_bits());
            assert_eq!(pa.kappa_min_mean.to_bits(), pb.kappa_min_mean.to_bits());
            assert_eq!(pa.kappa_min_std.to_bits(), pb.kappa_min_std.to_bits());
            assert_eq!(pa.variance_mean.to_bits(), pb.variance_mean.to_bits());
            assert_eq!(pa.n_transitions_total, pb.n_transitions_total);
        }

        let other = ScanConfig {
            master_seed: 12,
            ..cfg
        };
        let c = run_scan(&model, &grid, &other).unwrap();
        assert_ne!(a[0].kappa_min_mean.to_bits(), c[0].kappa_min_mean.to_bits());
    }

    #[test]
    fn healthy_scan_aggregates_over_converged_fits() {
        let model = shear_base();
        let cfg = small_cfg();
        let points = run_scan(&model, &[0.05, 0.15], &cfg).unwrap();
        assert_eq!(points.len(), 2);
        for p in &points {
            // short per-realization samples may lose an occasional fit to
            // the non-regular bounded-tail regime; the ensemble must still
            // aggregate over the converged majority
            assert!(p.fits_failed < cfg.n_realizations, "point {p:?}");
            assert_eq!(p.n_realizations, 4);
            assert!(p.kappa_max_mean.is_finite());
            assert!(p.kappa_min_mean.is_finite());
            assert!(p.kappa_max_std >= 0.0 && p.kappa_min_std >= 0.0);
            assert!(p.variance_mean > 0.0);
        }
    }

    #[test]
    fn single_realization_reports_zero_spread() {
        let cfg = ScanConfig {
            n_realizations: 1,
            ..small_cfg()
        };
        let points = run_scan(&shear_base(), &[0.1], &cfg).unwrap();
        assert_eq!(points[0].n_realizations, 1);
        assert_eq!(points[0].kappa_max_std, 0.0);
        assert_eq!(points[0].kappa_min_std, 0.0);
    }

    #[test]
    fn invalid_control_value_is_flagged_not_dropped() {
        // a double-well tilt beyond the fold leaves one well: every
        // realization fails, but the point must still be emitted
        let base = DoubleWellSpec::new(1.0, 0.0, 0.3, 0.01, 0).unwrap();
        let model = ScanModel::DoubleWell(base);
        let cfg = small_cfg();
        let points = run_scan(&model, &[0.5, 5.0], &cfg).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].fits_failed, 0);
        assert_eq!(points[1].fits_failed, cfg.n_realizations);
        assert!(points[1].kappa_min_mean.is_nan());
        assert_eq!(points[1].n_transitions_total, 0);
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let model = shear_base();
        let cfg = small_cfg();
        let n_steps = cfg.steps_per_realization();
        let mut outcomes: Vec<Realization> = (0..6)
            .map(|ri| {
                let seed = seeding::derive_seed(cfg.master_seed, 0, ri as u64);
                realize(&model, 0.12, seed, &cfg, n_steps)
            })
            .collect();
        let forward = aggregate(0.12, &outcomes, &cfg);
        outcomes.reverse();
        let backward = aggregate(0.12, &outcomes, &cfg);
        assert!((forward.kappa_min_mean - backward.kappa_min_mean).abs() < 1e-12);
        assert!((forward.kappa_min_std - backward.kappa_min_std).abs() < 1e-12);
        assert!((forward.variance_mean - backward.variance_mean).abs() < 1e-12);
        assert_eq!(forward.n_transitions_total, backward.n_transitions_total);
    }

    #[test]
    fn pooled_aggregation_uses_fit_standard_error() {
        let model = shear_base();
        let cfg = ScanConfig {
            aggregation: FitAggregation::Pooled,
            ..small_cfg()
        };
        let points = run_scan(&model, &[0.1], &cfg).unwrap();
        let p = &points[0];
        assert!(p.kappa_max_mean.is_finite());
        // pooled std is an asymptotic standard error, strictly positive
        assert!(p.kappa_max_std > 0.0);
        assert_eq!(p.fits_failed, 0);
    }

    #[test]
    fn mean_std_conventions() {
        assert!(mean_std(&[]).0.is_nan());
        assert_eq!(mean_std(&[]).1, 0.0);
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }
}
