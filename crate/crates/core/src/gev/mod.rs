//! Generalized extreme value distribution: evaluation, sampling, and
//! maximum-likelihood fitting with asymptotic confidence intervals.
//!
//! The distribution function is
//!
//! ```text
//! F(x; mu, sigma, kappa) = exp{ -[1 + kappa (x - mu)/sigma]^(-1/kappa) }
//! ```
//!
//! on the support `1 + kappa (x - mu)/sigma > 0`. The sign of the shape
//! parameter selects the tail type: `kappa < 0` bounded (Weibull),
//! `kappa = 0` exponential (Gumbel), `kappa > 0` power law (Frechet). The
//! `kappa = 0` member is the limit of the family, so every evaluation
//! switches to the Gumbel form below [`SHAPE_EPS`] to avoid the 1/kappa
//! singularity.

mod fit;
mod optim;
mod pwm;

pub use fit::{fit_mle, fit_mle_with, FitOptions};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{EvtError, Result};

/// Below this |shape| the Gumbel limit form is used.
pub const SHAPE_EPS: f64 = 1e-6;

/// Location, scale and shape (tail index) of a GEV distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevParams {
    pub location: f64,
    /// Strictly positive.
    pub scale: f64,
    pub shape: f64,
}

impl GevParams {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(EvtError::InvalidParameter(format!(
                "scale = {scale} must be finite and > 0"
            )));
        }
        if !location.is_finite() || !shape.is_finite() {
            return Err(EvtError::InvalidParameter(
                "location and shape must be finite".into(),
            ));
        }
        Ok(Self {
            location,
            scale,
            shape,
        })
    }

    /// `1 + kappa (x - mu)/sigma`; the support is where this is positive.
    fn support_term(&self, x: f64) -> f64 {
        1.0 + self.shape * (x - self.location) / self.scale
    }

    /// Finite upper endpoint `mu - sigma/kappa` of a bounded (`kappa < 0`)
    /// distribution; `None` otherwise.
    pub fn upper_endpoint(&self) -> Option<f64> {
        (self.shape < -SHAPE_EPS).then(|| self.location - self.scale / self.shape)
    }

    /// Cumulative distribution function.
    ///
    /// Total on all of `x`: points left of the support of a `kappa > 0`
    /// member map to 0, points right of the support of a `kappa < 0`
    /// member map to 1.
    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.shape.abs() < SHAPE_EPS {
            return (-(-z).exp()).exp();
        }
        let t = self.support_term(x);
        if t <= 0.0 {
            return if self.shape > 0.0 { 0.0 } else { 1.0 };
        }
        // t^(-1/kappa) as exp(-ln t / kappa)
        (-(-t.ln() / self.shape).exp()).exp()
    }

    /// Inverse CDF for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0);
        let w = -p.ln(); // > 0
        if self.shape.abs() < SHAPE_EPS {
            self.location - self.scale * w.ln()
        } else {
            // w^(-kappa) = exp(-kappa ln w)
            self.location + self.scale * ((-self.shape * w.ln()).exp() - 1.0) / self.shape
        }
    }

    /// Log density at a single point, `-inf` outside the support.
    pub fn log_density(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.shape.abs() < SHAPE_EPS {
            return -self.scale.ln() - z - (-z).exp();
        }
        let t = self.support_term(x);
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let ln_t = t.ln();
        -self.scale.ln() - (1.0 + 1.0 / self.shape) * ln_t - (-ln_t / self.shape).exp()
    }

    /// Sum of log densities.
    ///
    /// Returns `-inf` as soon as any point falls outside the support, which
    /// is how infeasible parameters are signalled to the optimizer.
    pub fn log_likelihood(&self, sample: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &x in sample {
            let l = self.log_density(x);
            if l == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += l;
        }
        acc
    }

    /// `count` inverse-CDF draws, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                // open interval (0, 1): reject the 0 that random() can emit
                let u = loop {
                    let u: f64 = rng.random();
                    if u > 0.0 {
                        break u;
                    }
                };
                self.quantile(u)
            })
            .collect()
    }
}

/// A maximum-likelihood fit with asymptotic-normal uncertainties.
///
/// Standard errors come from the inverse of the observed information
/// matrix (numerical Hessian of the negative log likelihood at the
/// optimum); each 95% interval is the point estimate plus/minus 1.96
/// standard errors. `converged` is false when the optimizer stopped on its
/// iteration cap or the information matrix was not positive definite; in
/// the latter case the standard errors are reported as infinite.
#[derive(Debug, Clone, Serialize)]
pub struct GevFit {
    pub params: GevParams,
    /// (location, scale, shape) standard errors.
    pub std_errors: [f64; 3],
    /// (low, high) per parameter, same order as `std_errors`.
    pub ci95: [(f64, f64); 3],
    pub log_likelihood: f64,
    pub n_extremes: usize,
    pub converged: bool,
}

impl GevFit {
    pub fn shape(&self) -> f64 {
        self.params.shape
    }

    pub fn shape_std_error(&self) -> f64 {
        self.std_errors[2]
    }

    pub fn shape_ci95(&self) -> (f64, f64) {
        self.ci95[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E_INV: f64 = 0.36787944117144233; // exp(-1)

    #[test]
    fn cdf_at_location_is_exp_minus_one() {
        for &(scale, shape) in &[(1.0, 0.0), (0.5, 0.3), (2.0, -0.4), (1.0, 1e-9)] {
            let p = GevParams::new(0.0, scale, shape).unwrap();
            assert!((p.cdf(0.0) - E_INV).abs() < 1e-12, "scale={scale} shape={shape}");
        }
    }

    #[test]
    fn cdf_saturates_at_bounded_upper_endpoint() {
        let p = GevParams::new(0.0, 1.0, -0.5).unwrap();
        assert_eq!(p.upper_endpoint(), Some(2.0));
        assert_eq!(p.cdf(2.0), 1.0);
        assert_eq!(p.cdf(5.0), 1.0);
    }

    #[test]
    fn cdf_is_zero_left_of_frechet_lower_endpoint() {
        let p = GevParams::new(0.0, 1.0, 0.5).unwrap();
        // lower endpoint mu - sigma/kappa = -2
        assert_eq!(p.cdf(-2.0), 0.0);
        assert_eq!(p.cdf(-10.0), 0.0);
    }

    #[test]
    fn cdf_continuous_across_gumbel_switch() {
        let gumbel = GevParams::new(0.0, 1.0, 0.0).unwrap();
        let near = GevParams::new(0.0, 1.0, 1e-9).unwrap();
        assert!((gumbel.cdf(0.0) - E_INV).abs() < 1e-12);
        assert!((near.cdf(0.0) - gumbel.cdf(0.0)).abs() < 1e-6);
    }

    #[test]
    fn log_likelihood_at_gumbel_mode_is_minus_one() {
        let p = GevParams::new(3.0, 1.0, 0.0).unwrap();
        assert!((p.log_likelihood(&[3.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_flags_support_violation() {
        // upper endpoint at 2: a sample point beyond it is infeasible
        let p = GevParams::new(0.0, 1.0, -0.5).unwrap();
        assert_eq!(p.log_likelihood(&[0.0, 3.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_likelihood_peaks_at_true_parameters() {
        let truth = GevParams::new(0.0, 1.0, 0.2).unwrap();
        let sample = truth.sample(10_000, 42);
        let shifted = GevParams::new(0.5, 1.0, 0.2).unwrap();
        assert!(truth.log_likelihood(&sample) > shifted.log_likelihood(&sample));
    }

    #[test]
    fn sample_empty_when_count_zero() {
        let p = GevParams::new(0.0, 1.0, 0.0).unwrap();
        assert!(p.sample(0, 1).is_empty());
    }

    #[test]
    fn bounded_samples_respect_upper_endpoint() {
        let p = GevParams::new(0.0, 1.0, -0.5).unwrap();
        let xs = p.sample(200_000, 7);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= 2.0, "max draw {max} beyond endpoint");
    }

    #[test]
    fn gumbel_sample_mean_matches_euler_mascheroni() {
        const EULER_MASCHERONI: f64 = 0.5772156649015329;
        let p = GevParams::new(0.0, 1.0, 0.0).unwrap();
        let xs = p.sample(100_000, 13);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(
            (mean - EULER_MASCHERONI).abs() < 0.03,
            "sample mean {mean} too far from the Gumbel mean"
        );
    }

    #[test]
    fn empirical_cdf_matches_analytic_cdf() {
        // Kolmogorov-Smirnov distance below 2/sqrt(n) for a large seeded draw.
        let p = GevParams::new(1.0, 0.7, -0.2).unwrap();
        let n = 100_000usize;
        let mut xs = p.sample(n, 99);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let f = p.cdf(x);
            d = d.max((f - i as f64 / n as f64).abs());
            d = d.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        assert!(d < 2.0 / (n as f64).sqrt(), "KS distance {d}");
    }

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let p = GevParams::new(0.0, 1.0, 0.1).unwrap();
        assert_eq!(p.sample(100, 5), p.sample(100, 5));
        assert_ne!(p.sample(100, 5), p.sample(100, 6));
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(GevParams::new(0.0, 0.0, 0.0).is_err());
        assert!(GevParams::new(0.0, -1.0, 0.0).is_err());
        assert!(GevParams::new(0.0, f64::NAN, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn cdf_monotone_in_x(
            location in -10.0f64..10.0,
            scale in 0.1f64..10.0,
            shape in -1.0f64..1.0,
            mut grid in proptest::collection::vec(-50.0f64..50.0, 2..40),
        ) {
            let p = GevParams::new(location, scale, shape).unwrap();
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut prev = 0.0f64;
            for &x in &grid {
                let c = p.cdf(x);
                prop_assert!((0.0..=1.0).contains(&c));
                prop_assert!(c >= prev - 1e-15);
                prev = c;
            }
        }

        #[test]
        fn cdf_continuous_at_shape_zero(
            location in -5.0f64..5.0,
            scale in 0.1f64..5.0,
            x in -20.0f64..20.0,
        ) {
            let gumbel = GevParams::new(location, scale, 0.0).unwrap();
            for shape in [1e-7, -1e-7] {
                let near = GevParams::new(location, scale, shape).unwrap();
                prop_assert!((near.cdf(x) - gumbel.cdf(x)).abs() < 1e-5);
            }
        }

        #[test]
        fn quantile_inverts_cdf(
            location in -5.0f64..5.0,
            scale in 0.1f64..5.0,
            shape in -0.9f64..0.9,
            p in 0.001f64..0.999,
        ) {
            let params = GevParams::new(location, scale, shape).unwrap();
            let x = params.quantile(p);
            prop_assert!((params.cdf(x) - p).abs() < 1e-9);
        }
    }
}
