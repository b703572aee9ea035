//! Maximum-likelihood GEV fitting.
//!
//! Simplex search on the negative log likelihood starting from the
//! probability-weighted-moment estimate, with the support constraint
//! enforced through the infinite-likelihood sentinel. Standard errors come
//! from the numerically evaluated observed information matrix at the
//! optimum.

use super::optim::{self, NmOptions};
use super::{pwm, GevFit, GevParams};
use crate::error::{EvtError, Result};

/// Knobs of [`fit_mle_with`]; the defaults match [`fit_mle`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Reject samples smaller than this; below a few dozen extremes the
    /// asymptotic standard errors mean nothing.
    pub min_extremes: usize,
    pub max_iters: usize,
    /// Relative parameter-step convergence threshold of the simplex.
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            min_extremes: 30,
            max_iters: 10_000,
            rel_tol: 1e-8,
        }
    }
}

/// Fit a GEV to a sample of block extremes with default options.
pub fn fit_mle(extremes: &[f64]) -> Result<GevFit> {
    fit_mle_with(extremes, &FitOptions::default())
}

/// Fit a GEV to a sample of block extremes.
///
/// Errors on too-few points, non-finite values, or zero spread. An
/// optimizer that hits its iteration cap or an information matrix that is
/// not positive definite yields `converged = false` (with infinite
/// standard errors in the latter case), not an error.
pub fn fit_mle_with(extremes: &[f64], opts: &FitOptions) -> Result<GevFit> {
    let n = extremes.len();
    if n < opts.min_extremes {
        return Err(EvtError::TooFewPoints {
            got: n,
            min: opts.min_extremes,
        });
    }
    if let Some(index) = extremes.iter().position(|v| !v.is_finite()) {
        return Err(EvtError::NonFiniteValue { index });
    }

    let mut sorted = extremes.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] == sorted[n - 1] {
        return Err(EvtError::DegenerateSample { n });
    }

    let mut init = pwm::initial_guess(&sorted);
    if init.log_likelihood(extremes) == f64::NEG_INFINITY {
        // PWM landed outside the feasible region; the Gumbel guess never does
        init = pwm::gumbel_fallback(extremes);
    }

    let nll = |p: &[f64; 3]| -> f64 {
        if p[1] <= 0.0 {
            return f64::INFINITY;
        }
        let params = GevParams {
            location: p[0],
            scale: p[1],
            shape: p[2],
        };
        -params.log_likelihood(extremes)
    };

    let start = [init.location, init.scale, init.shape];
    let step = [0.1 * init.scale, 0.1 * init.scale, 0.1];
    let nm = optim::minimize(
        &nll,
        start,
        step,
        &NmOptions {
            max_iters: opts.max_iters,
            rel_tol: opts.rel_tol,
        },
    );

    let params = GevParams::new(nm.point[0], nm.point[1], nm.point[2])?;
    let information = observed_information(&nll, &nm.point);
    let covariance = information.and_then(|info| invert_spd3(&info));
    let converged = nm.converged && covariance.is_some();

    let std_errors = match covariance {
        Some(cov) => [cov[0][0].sqrt(), cov[1][1].sqrt(), cov[2][2].sqrt()],
        None => [f64::INFINITY; 3],
    };
    let estimates = [params.location, params.scale, params.shape];
    let mut ci95 = [(0.0, 0.0); 3];
    for i in 0..3 {
        ci95[i] = (
            estimates[i] - 1.96 * std_errors[i],
            estimates[i] + 1.96 * std_errors[i],
        );
    }

    Ok(GevFit {
        params,
        std_errors,
        ci95,
        log_likelihood: -nm.value,
        n_extremes: n,
        converged,
    })
}

/// Central-difference Hessian of `f` at `x`.
///
/// The step starts at eps^(1/4) of the coordinate scale and is halved while
/// any stencil point is infeasible (a bounded-tail optimum can sit close to
/// the support boundary). `None` if no feasible stencil is found.
fn observed_information(f: &impl Fn(&[f64; 3]) -> f64, x: &[f64; 3]) -> Option<[[f64; 3]; 3]> {
    let base: f64 = f64::EPSILON.powf(0.25);
    let mut h = [
        base * x[0].abs().max(0.1),
        base * x[1].abs().max(0.1),
        base * x[2].abs().max(0.1),
    ];

    'attempt: for _ in 0..12 {
        let f0 = f(x);
        if !f0.is_finite() {
            return None;
        }
        let mut hess = [[0.0; 3]; 3];
        for i in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[i] += h[i];
            xm[i] -= h[i];
            let (fp, fm) = (f(&xp), f(&xm));
            if !fp.is_finite() || !fm.is_finite() {
                for s in h.iter_mut() {
                    *s *= 0.5;
                }
                continue 'attempt;
            }
            hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let mut xpp = *x;
                let mut xpm = *x;
                let mut xmp = *x;
                let mut xmm = *x;
                xpp[i] += h[i];
                xpp[j] += h[j];
                xpm[i] += h[i];
                xpm[j] -= h[j];
                xmp[i] -= h[i];
                xmp[j] += h[j];
                xmm[i] -= h[i];
                xmm[j] -= h[j];
                let (fpp, fpm, fmp, fmm) = (f(&xpp), f(&xpm), f(&xmp), f(&xmm));
                if ![fpp, fpm, fmp, fmm].iter().all(|v| v.is_finite()) {
                    for s in h.iter_mut() {
                        *s *= 0.5;
                    }
                    continue 'attempt;
                }
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
                hess[i][j] = v;
                hess[j][i] = v;
            }
        }
        return Some(hess);
    }
    None
}

/// Inverse of a symmetric positive-definite 3x3 matrix via Cholesky;
/// `None` when the matrix is not positive definite.
fn invert_spd3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    // lower-triangular factor
    if !(a[0][0] > 0.0) {
        return None;
    }
    let l00 = a[0][0].sqrt();
    let l10 = a[1][0] / l00;
    let d11 = a[1][1] - l10 * l10;
    if !(d11 > 0.0) {
        return None;
    }
    let l11 = d11.sqrt();
    let l20 = a[2][0] / l00;
    let l21 = (a[2][1] - l20 * l10) / l11;
    let d22 = a[2][2] - l20 * l20 - l21 * l21;
    if !(d22 > 0.0) {
        return None;
    }
    let l22 = d22.sqrt();

    let mut inv = [[0.0; 3]; 3];
    for k in 0..3 {
        let e = [
            (k == 0) as u8 as f64,
            (k == 1) as u8 as f64,
            (k == 2) as u8 as f64,
        ];
        // forward: L y = e
        let y0 = e[0] / l00;
        let y1 = (e[1] - l10 * y0) / l11;
        let y2 = (e[2] - l20 * y0 - l21 * y1) / l22;
        // backward: L^T z = y
        let z2 = y2 / l22;
        let z1 = (y1 - l21 * z2) / l11;
        let z0 = (y0 - l10 * z1 - l20 * z2) / l00;
        inv[0][k] = z0;
        inv[1][k] = z1;
        inv[2][k] = z2;
    }
    if !inv.iter().flatten().all(|v| v.is_finite()) {
        return None;
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_bounded_tail_parameters() {
        let truth = GevParams::new(0.0, 1.0, -0.3).unwrap();
        let draws = truth.sample(5000, 2024);
        let fit = fit_mle(&draws).unwrap();
        assert!(fit.converged);
        assert!(
            (-0.35..=-0.25).contains(&fit.shape()),
            "shape = {}",
            fit.shape()
        );
        assert!((-0.05..=0.05).contains(&fit.params.location));
        assert!((0.95..=1.05).contains(&fit.params.scale));
        assert_eq!(fit.n_extremes, 5000);
    }

    #[test]
    fn heavy_tail_interval_excludes_bounded_shapes() {
        let truth = GevParams::new(2.0, 0.5, 0.2).unwrap();
        let draws = truth.sample(5000, 77);
        let fit = fit_mle(&draws).unwrap();
        assert!(fit.converged);
        assert!(fit.shape() > 0.0);
        let (lo, _) = fit.shape_ci95();
        assert!(lo > -0.05, "shape CI low end {lo}");
    }

    #[test]
    fn rejects_degenerate_and_short_samples() {
        assert!(matches!(
            fit_mle(&vec![1.5; 1000]),
            Err(EvtError::DegenerateSample { n: 1000 })
        ));
        assert!(matches!(
            fit_mle(&[1.0, 2.0, 3.0]),
            Err(EvtError::TooFewPoints { got: 3, min: 30 })
        ));
        let mut bad = GevParams::new(0.0, 1.0, 0.0).unwrap().sample(100, 1);
        bad[50] = f64::NAN;
        assert!(matches!(
            fit_mle(&bad),
            Err(EvtError::NonFiniteValue { index: 50 })
        ));
    }

    #[test]
    fn intervals_contain_estimate_with_advertised_half_width() {
        let draws = GevParams::new(1.0, 2.0, 0.1).unwrap().sample(2000, 5);
        let fit = fit_mle(&draws).unwrap();
        let estimates = [fit.params.location, fit.params.scale, fit.params.shape];
        for i in 0..3 {
            let (lo, hi) = fit.ci95[i];
            assert!(lo <= estimates[i] && estimates[i] <= hi);
            assert!((hi - estimates[i] - 1.96 * fit.std_errors[i]).abs() < 1e-12);
            assert!(fit.std_errors[i] > 0.0);
        }
    }

    #[test]
    fn fitted_point_is_a_local_likelihood_maximum() {
        let draws = GevParams::new(0.0, 1.0, -0.2).unwrap().sample(3000, 9);
        let fit = fit_mle(&draws).unwrap();
        assert!(fit.converged);
        let best = fit.log_likelihood;
        for i in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut p = [fit.params.location, fit.params.scale, fit.params.shape];
                p[i] += sign * fit.std_errors[i];
                if p[1] <= 0.0 {
                    continue;
                }
                let perturbed = GevParams::new(p[0], p[1], p[2]).unwrap();
                // -inf (infeasible perturbation) also counts as not-higher
                assert!(
                    perturbed.log_likelihood(&draws) <= best + 1e-9,
                    "perturbation of parameter {i} increased the likelihood"
                );
            }
        }
    }

    #[test]
    fn gumbel_data_fits_near_zero_shape() {
        let draws = GevParams::new(0.0, 1.0, 0.0).unwrap().sample(5000, 31);
        let fit = fit_mle(&draws).unwrap();
        assert!(fit.converged);
        assert!(fit.shape().abs() < 3.0 * fit.shape_std_error());
    }

    #[test]
    fn honors_custom_minimum_sample_size() {
        let draws = GevParams::new(0.0, 1.0, 0.0).unwrap().sample(40, 3);
        let opts = FitOptions {
            min_extremes: 50,
            ..FitOptions::default()
        };
        assert!(matches!(
            fit_mle_with(&draws, &opts),
            Err(EvtError::TooFewPoints { got: 40, min: 50 })
        ));
        assert!(fit_mle(&draws).is_ok());
    }

    #[test]
    fn spd_inverse_matches_hand_inverse() {
        // A = [[4,2,0],[2,3,1],[0,1,2]]; verify A * inv(A) = I
        let a = [[4.0, 2.0, 0.0], [2.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let inv = invert_spd3(&a).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += a[r][k] * inv[k][c];
                }
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((acc - expect).abs() < 1e-12, "({r},{c}) = {acc}");
            }
        }
        // not positive definite
        let bad = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(invert_spd3(&bad).is_none());
    }
}
