//! Overdamped double-well model with additive noise.
//!
//! ```text
//! dX = -V'(X) dt + epsilon dW,    V(X) = X^4/4 - a X^2 + lambda X
//! ```
//!
//! For `32 a^3 > 27 lambda^2` the potential keeps two wells separated by a
//! saddle; the tilt `lambda` is the control parameter that shallows the
//! right well. Runs start in the right-well minimum. With escape recording
//! on, the first crossing of the saddle from above closes one escape: the
//! elapsed time since the last reset is logged and the state snaps back to
//! the right minimum. Without recording the walker evolves freely, which
//! is the confinement regime the scans use.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{RunResult, OVERFLOW_GUARD};
use crate::error::{EvtError, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWellSpec {
    /// Well-splitting coefficient, > 0.
    pub a: f64,
    /// Tilt; the scan control parameter.
    pub lambda: f64,
    /// Additive noise amplitude, >= 0 (0 is the deterministic limit).
    pub epsilon: f64,
    pub dt: f64,
    pub seed: u64,
}

impl DoubleWellSpec {
    /// Validated spec; requires the bistable regime `32 a^3 > 27 lambda^2`.
    pub fn new(a: f64, lambda: f64, epsilon: f64, dt: f64, seed: u64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(EvtError::InvalidParameter("a must be finite and > 0".into()));
        }
        if !lambda.is_finite() {
            return Err(EvtError::InvalidParameter("lambda must be finite".into()));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(EvtError::InvalidParameter(
                "epsilon must be finite and >= 0".into(),
            ));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EvtError::InvalidParameter("dt must be > 0".into()));
        }
        // cubic discriminant of V'(X) = X^3 - 2 a X + lambda
        if 32.0 * a.powi(3) - 27.0 * lambda * lambda <= 0.0 {
            return Err(EvtError::Monostable { a, lambda });
        }
        Ok(Self {
            a,
            lambda,
            epsilon,
            dt,
            seed,
        })
    }
}

/// The three critical points of the potential, ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoints {
    /// Left minimum (negative abscissa).
    pub left_well: f64,
    /// The barrier top between the wells.
    pub saddle: f64,
    /// Right minimum (positive abscissa).
    pub right_well: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Well {
    Left,
    Right,
}

/// `V(x)` for the given coefficients.
pub fn potential(a: f64, lambda: f64, x: f64) -> f64 {
    0.25 * x.powi(4) - a * x * x + lambda * x
}

fn drift(a: f64, lambda: f64, x: f64) -> f64 {
    -(x * x * x - 2.0 * a * x + lambda)
}

/// Roots of `V'(X) = X^3 - 2 a X + lambda`, sorted ascending.
///
/// Errors in the monostable regime (discriminant `32 a^3 - 27 lambda^2`
/// not positive). Uses the trigonometric three-real-root formula with a
/// Newton polish.
pub fn critical_points(a: f64, lambda: f64) -> Result<CriticalPoints> {
    if !(a > 0.0) || 32.0 * a.powi(3) - 27.0 * lambda * lambda <= 0.0 {
        return Err(EvtError::Monostable { a, lambda });
    }
    // depressed cubic t^3 + p t + q with p = -2a, q = lambda
    let p = -2.0 * a;
    let q = lambda;
    let radius = 2.0 * (-p / 3.0).sqrt();
    let phase = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0).acos();
    let mut roots = [0.0f64; 3];
    for (k, r) in roots.iter_mut().enumerate() {
        let mut x = radius * ((phase - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
        // two Newton steps sharpen the trigonometric roots
        for _ in 0..2 {
            let f = x * x * x + p * x + q;
            let fp = 3.0 * x * x + p;
            if fp != 0.0 {
                x -= f / fp;
            }
        }
        *r = x;
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(CriticalPoints {
        left_well: roots[0],
        saddle: roots[1],
        right_well: roots[2],
    })
}

/// Barrier height `V(saddle) - V(well)` seen from the chosen well.
pub fn barrier_height(a: f64, lambda: f64, from_well: Well) -> Result<f64> {
    let cp = critical_points(a, lambda)?;
    let well = match from_well {
        Well::Left => cp.left_well,
        Well::Right => cp.right_well,
    };
    Ok(potential(a, lambda, cp.saddle) - potential(a, lambda, well))
}

/// Integrate from the right-well minimum.
pub fn simulate_doublewell(
    spec: &DoubleWellSpec,
    n_steps: usize,
    record_escapes: bool,
) -> Result<RunResult> {
    let start = critical_points(spec.a, spec.lambda)?.right_well;
    simulate_doublewell_from(spec, start, n_steps, record_escapes)
}

/// Integrate from an arbitrary state.
///
/// The observable is the coordinate itself, recorded after every step;
/// deterministic for a fixed seed.
pub fn simulate_doublewell_from(
    spec: &DoubleWellSpec,
    start: f64,
    n_steps: usize,
    record_escapes: bool,
) -> Result<RunResult> {
    let cp = critical_points(spec.a, spec.lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sqrt_dt = spec.dt.sqrt();

    let mut x = start;
    let mut values = Vec::with_capacity(n_steps);
    let mut escape_times = Vec::new();
    let mut n_transitions = 0usize;
    let mut last_reset_time = 0.0f64;

    for step in 0..n_steps {
        let noise: f64 = StandardNormal.sample(&mut rng);
        x += spec.dt * drift(spec.a, spec.lambda, x) + spec.epsilon * sqrt_dt * noise;

        if x.abs() > OVERFLOW_GUARD {
            return Err(EvtError::Unstable { step });
        }

        values.push(x);
        if record_escapes && x < cp.saddle {
            let now = (step + 1) as f64 * spec.dt;
            escape_times.push(now - last_reset_time);
            last_reset_time = now;
            n_transitions += 1;
            x = cp.right_well;
        }
    }

    let series = TimeSeries::new(values, spec.dt, "doublewell-x")?.with_control(spec.lambda);
    Ok(RunResult {
        series,
        n_transitions,
        escape_times,
    })
}
