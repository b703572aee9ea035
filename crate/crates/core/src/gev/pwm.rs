//! Probability-weighted-moment starting point for the likelihood search.
//!
//! Closed-form L-moment estimator (Hosking-Wallis-Wood): robust, cheap, and
//! good enough that the simplex only has to polish it. Hosking's shape
//! convention is the negative of the one used here, hence the final sign
//! flip.

use super::GevParams;

const EULER_MASCHERONI: f64 = 0.5772156649015329;
const LN_2: f64 = std::f64::consts::LN_2;
const LN_3: f64 = 1.0986122886681098;

/// Estimate GEV parameters from an ascending-sorted sample.
///
/// The caller guarantees `sorted` has at least 3 points and nonzero spread.
/// The shape estimate is clamped to [-0.9, 0.9], the validity range of the
/// rational approximation behind it.
pub(crate) fn initial_guess(sorted: &[f64]) -> GevParams {
    let n = sorted.len() as f64;

    // probability-weighted moments b0, b1, b2
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (i, &x) in sorted.iter().enumerate() {
        let i = i as f64;
        b0 += x;
        b1 += x * i / (n - 1.0);
        b2 += x * i * (i - 1.0) / ((n - 1.0) * (n - 2.0));
    }
    b0 /= n;
    b1 /= n;
    b2 /= n;

    // L-moments
    let l1 = b0;
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;

    if !(l2 > 0.0) {
        // numerically flat sample; fall back to a Gumbel moment guess
        return gumbel_fallback(sorted);
    }

    let t3 = l3 / l2;
    let c = 2.0 / (3.0 + t3) - LN_2 / LN_3;
    // Hosking's k (= -shape), rational approximation
    let k = (7.8590 * c + 2.9554 * c * c).clamp(-0.9, 0.9);

    if k.abs() < 1e-6 {
        let scale = l2 / LN_2;
        return GevParams {
            location: l1 - EULER_MASCHERONI * scale,
            scale,
            shape: 0.0,
        };
    }

    let g = ln_gamma(1.0 + k).exp();
    let scale = l2 * k / ((1.0 - (-k * LN_2).exp()) * g);
    let location = l1 + scale * (g - 1.0) / k;
    if !(scale > 0.0 && scale.is_finite()) || !location.is_finite() {
        return gumbel_fallback(sorted);
    }
    GevParams {
        location,
        scale,
        shape: -k,
    }
}

/// Method-of-moments Gumbel guess; always feasible since the Gumbel
/// support is the whole line.
pub(crate) fn gumbel_fallback(sample: &[f64]) -> GevParams {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let scale = (var.sqrt() * 6f64.sqrt() / std::f64::consts::PI).max(1e-12);
    GevParams {
        location: mean - EULER_MASCHERONI * scale,
        scale,
        shape: 0.0,
    }
}

/// Lanczos (g = 7, n = 9) log-gamma for x > 0.
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
