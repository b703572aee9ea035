//! Two-variable shear-flow model with multiplicative noise.
//!
//! ```text
//! dX = [-mu X + Y^2] dt - u X dW
//! dY = [-nu Y + X - X Y] dt
//! ```
//!
//! The quadratic terms exchange energy without creating it, mimicking the
//! advective nonlinearity of a shear flow; `mu` and `nu` damp the two
//! amplitudes. For `mu*nu < 1/4` the trivial (laminar) state at the origin
//! coexists with a stable nontrivial (turbulent) fixed point and a saddle;
//! the branches merge in a saddle-node at `mu*nu = 1/4`. The multiplicative
//! noise `u X dW` leaves the origin invariant, so once the energy
//! `E = (X^2 + Y^2)/2` falls below a small threshold the run has
//! laminarized for good: the event is counted and the state reset to the
//! nontrivial fixed point.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{RunResult, OVERFLOW_GUARD};
use crate::error::{EvtError, Result};
use crate::series::TimeSeries;

/// Default energy threshold below which the flow counts as laminar.
pub const DEFAULT_LAMINAR_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledShearSpec {
    pub mu: f64,
    pub nu: f64,
    /// Multiplicative noise amplitude, >= 0. The scan control parameter.
    pub noise_u: f64,
    pub dt: f64,
    pub seed: u64,
    /// Energy below which the state is declared laminar and reset.
    pub laminar_threshold: f64,
}

impl CoupledShearSpec {
    /// Validated spec with the default laminar threshold.
    ///
    /// Requires `0 < mu*nu < 1/4` (so the nontrivial fixed points exist)
    /// and `dt * max(mu, nu) < 0.1` (explicit-Euler stability margin).
    pub fn new(mu: f64, nu: f64, noise_u: f64, dt: f64, seed: u64) -> Result<Self> {
        if !(mu > 0.0 && nu > 0.0 && mu.is_finite() && nu.is_finite()) {
            return Err(EvtError::InvalidParameter(
                "mu and nu must be finite and > 0".into(),
            ));
        }
        if mu * nu >= 0.25 {
            return Err(EvtError::NoFixedPoints { product: mu * nu });
        }
        if !(noise_u >= 0.0 && noise_u.is_finite()) {
            return Err(EvtError::InvalidParameter(
                "noise_u must be finite and >= 0".into(),
            ));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EvtError::InvalidParameter("dt must be > 0".into()));
        }
        if dt * mu.max(nu) >= 0.1 {
            return Err(EvtError::InvalidParameter(format!(
                "dt * max(mu, nu) = {} must stay below 0.1",
                dt * mu.max(nu)
            )));
        }
        Ok(Self {
            mu,
            nu,
            noise_u,
            dt,
            seed,
            laminar_threshold: DEFAULT_LAMINAR_THRESHOLD,
        })
    }

    pub fn with_laminar_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(EvtError::InvalidParameter(
                "laminar_threshold must be finite and > 0".into(),
            ));
        }
        self.laminar_threshold = threshold;
        Ok(self)
    }
}

/// Steady states of the noise-free model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearFixedPoints {
    pub stable: (f64, f64),
    pub unstable: (f64, f64),
    pub trivial: (f64, f64),
}

/// Nontrivial fixed points for `0 < mu*nu < 1/4`.
///
/// The Y components solve `Y^2 - Y + mu*nu = 0` and `X = Y^2 / mu`; the
/// upper branch is the stable one.
pub fn shear_fixed_points(mu: f64, nu: f64) -> Result<ShearFixedPoints> {
    let product = mu * nu;
    if !(product > 0.0 && product < 0.25) {
        return Err(EvtError::NoFixedPoints { product });
    }
    let root = (1.0 - 4.0 * product).sqrt();
    let y_stable = 0.5 * (1.0 + root);
    let y_unstable = 0.5 * (1.0 - root);
    Ok(ShearFixedPoints {
        stable: (y_stable * y_stable / mu, y_stable),
        unstable: (y_unstable * y_unstable / mu, y_unstable),
        trivial: (0.0, 0.0),
    })
}

/// The energy-exchanging quadratic terms `(Y^2, -XY)` of the drift.
/// They satisfy `X * Y^2 + Y * (-XY) = 0` identically.
pub(crate) fn nonlinear_drift(x: f64, y: f64) -> (f64, f64) {
    (y * y, -x * y)
}

/// Integrate from the stable nontrivial fixed point.
pub fn simulate_shear(spec: &CoupledShearSpec, n_steps: usize) -> Result<RunResult> {
    let start = shear_fixed_points(spec.mu, spec.nu)?.stable;
    simulate_shear_from(spec, start, n_steps)
}

/// Integrate from an arbitrary state.
///
/// Records the energy after every step; deterministic for a fixed seed.
/// Aborts with the failing step index if either amplitude exceeds the
/// overflow guard.
pub fn simulate_shear_from(
    spec: &CoupledShearSpec,
    start: (f64, f64),
    n_steps: usize,
) -> Result<RunResult> {
    let reset_point = shear_fixed_points(spec.mu, spec.nu)?.stable;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sqrt_dt = spec.dt.sqrt();

    let (mut x, mut y) = start;
    let mut energies = Vec::with_capacity(n_steps);
    let mut n_transitions = 0usize;

    for step in 0..n_steps {
        let noise: f64 = StandardNormal.sample(&mut rng);
        let dw = sqrt_dt * noise;
        let (nx, ny) = nonlinear_drift(x, y);
        let dx = spec.dt * (-spec.mu * x + nx) - spec.noise_u * x * dw;
        let dy = spec.dt * (-spec.nu * y + x + ny);
        x += dx;
        y += dy;

        if x.abs() > OVERFLOW_GUARD || y.abs() > OVERFLOW_GUARD {
            return Err(EvtError::Unstable { step });
        }

        let energy = 0.5 * (x * x + y * y);
        energies.push(energy);
        if energy < spec.laminar_threshold {
            n_transitions += 1;
            (x, y) = reset_point;
        }
    }

    let series = TimeSeries::new(energies, spec.dt, "shear-energy")?
        .with_control(spec.noise_u);
    Ok(RunResult {
        series,
        n_transitions,
        escape_times: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU: f64 = 1.0;
    const NU: f64 = 0.2475;

    #[test]
    fn fixed_points_match_quadratic_roots() {
        let fp = shear_fixed_points(MU, NU).unwrap();
        assert!((fp.stable.0 - 0.3025).abs() < 1e-12);
        assert!((fp.stable.1 - 0.55).abs() < 1e-12);
        assert!((fp.unstable.0 - 0.2025).abs() < 1e-12);
        assert!((fp.unstable.1 - 0.45).abs() < 1e-12);
        assert_eq!(fp.trivial, (0.0, 0.0));
    }

    #[test]
    fn fixed_points_zero_the_noise_free_drift() {
        for (mu, nu) in [(1.0, 0.2475), (0.5, 0.49), (2.0, 0.1), (1.0, 0.24999)] {
            let fp = shear_fixed_points(mu, nu).unwrap();
            for (x, y) in [fp.stable, fp.unstable, fp.trivial] {
                let (nx, ny) = nonlinear_drift(x, y);
                let rx = -mu * x + nx;
                let ry = -nu * y + x + ny;
                assert!(
                    rx.abs() < 1e-12 && ry.abs() < 1e-12,
                    "residual ({rx}, {ry}) at mu={mu} nu={nu}"
                );
            }
        }
    }

    #[test]
    fn branches_merge_at_the_saddle_node() {
        let fp = shear_fixed_points(1.0, 0.25 - 1e-9).unwrap();
        assert!((fp.stable.1 - 0.5).abs() < 5e-5);
        assert!((fp.unstable.1 - 0.5).abs() < 5e-5);
    }

    #[test]
    fn no_fixed_points_beyond_quarter() {
        assert!(matches!(
            shear_fixed_points(1.0, 0.3),
            Err(EvtError::NoFixedPoints { .. })
        ));
        assert!(shear_fixed_points(0.5, 0.5).is_err());
        assert!(CoupledShearSpec::new(1.0, 0.3, 0.1, 0.01, 0).is_err());
    }

    #[test]
    fn nonlinearity_preserves_energy() {
        // exact cancellation on dyadic values, where every product is
        // representable
        for (x, y) in [(0.5, 0.25), (2.0, -3.0), (0.0, 4.0), (-1.5, 0.125)] {
            let (nx, ny) = nonlinear_drift(x, y);
            assert_eq!(x * nx + y * ny, 0.0);
        }
        // on arbitrary values only association order differs, so the
        // residual stays within one rounding of the term magnitude
        for (x, y) in [(0.3, 0.5), (-1.2, 0.7), (0.3025, 0.55)] {
            let (nx, ny) = nonlinear_drift(x, y);
            let scale: f64 = (x * nx).abs();
            assert!((x * nx + y * ny).abs() <= f64::EPSILON * scale.max(1.0));
        }
    }

    #[test]
    fn noise_free_run_stays_on_the_fixed_point() {
        let spec = CoupledShearSpec::new(MU, NU, 0.0, 0.01, 1).unwrap();
        let run = simulate_shear(&spec, 10_000).unwrap();
        let fp = shear_fixed_points(MU, NU).unwrap().stable;
        let e_star = 0.5 * (fp.0 * fp.0 + fp.1 * fp.1);
        for &e in &run.series.values {
            assert!((e - e_star).abs() < 1e-6);
        }
        assert_eq!(run.n_transitions, 0);
    }

    #[test]
    fn noise_free_run_near_saddle_settles_on_an_attractor() {
        // start near the unstable point; the coarse trajectory must end on
        // the same attractor (here the stable fixed point) as a fine
        // reference integration, and must never blow up
        let spec = CoupledShearSpec::new(MU, NU, 0.0, 0.01, 1).unwrap();
        let start = (0.21, 0.46);
        let horizon = 200.0f64;

        let fine = CoupledShearSpec::new(MU, NU, 0.0, 1e-4, 1).unwrap();
        let fine_run =
            simulate_shear_from(&fine, start, (horizon / 1e-4) as usize).unwrap();
        let coarse_run =
            simulate_shear_from(&spec, start, (horizon / 0.01) as usize).unwrap();

        let fp = shear_fixed_points(MU, NU).unwrap();
        let e_stable = 0.5 * (fp.stable.0 * fp.stable.0 + fp.stable.1 * fp.stable.1);
        let fine_end = *fine_run.series.values.last().unwrap();
        let coarse_end = *coarse_run.series.values.last().unwrap();

        let attractor_of = |e: f64| {
            if (e - e_stable).abs() < 1e-3 {
                "stable"
            } else if e < 1e-3 {
                "trivial"
            } else {
                "neither"
            }
        };
        assert_ne!(attractor_of(fine_end), "neither", "fine endpoint {fine_end}");
        assert_eq!(attractor_of(coarse_end), attractor_of(fine_end));
    }

    #[test]
    fn strong_noise_triggers_laminarization_resets() {
        let quiet = CoupledShearSpec::new(MU, 0.2487, 0.0, 0.01, 12).unwrap();
        assert_eq!(simulate_shear(&quiet, 1_000_000).unwrap().n_transitions, 0);

        let noisy = CoupledShearSpec::new(MU, 0.2487, 0.6, 0.01, 12).unwrap();
        let run = simulate_shear(&noisy, 1_000_000).unwrap();
        assert!(run.n_transitions > 0, "no transitions at strong noise");
        // every reset is embedded as a sub-threshold energy sample
        let dips = run
            .series
            .values
            .iter()
            .filter(|&&e| e < noisy.laminar_threshold)
            .count();
        assert_eq!(dips, run.n_transitions);
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let spec = CoupledShearSpec::new(MU, NU, 0.3, 0.01, 99).unwrap();
        let a = simulate_shear(&spec, 20_000).unwrap();
        let b = simulate_shear(&spec, 20_000).unwrap();
        assert_eq!(a.series.values, b.series.values);
        assert_eq!(a.n_transitions, b.n_transitions);

        let other = CoupledShearSpec::new(MU, NU, 0.3, 0.01, 100).unwrap();
        assert_ne!(
            simulate_shear(&other, 20_000).unwrap().series.values,
            a.series.values
        );
    }

    #[test]
    fn deterministic_error_order_is_linear_in_dt() {
        // global order of explicit Euler measured against a fine reference
        let start = (0.21, 0.46);
        let horizon = 1.0f64;
        let endpoint = |dt: f64| {
            let spec = CoupledShearSpec::new(MU, NU, 0.0, dt, 1).unwrap();
            let run = simulate_shear_from(&spec, start, (horizon / dt).round() as usize).unwrap();
            *run.series.values.last().unwrap()
        };
        let reference = endpoint(1e-5);
        let dts = [0.01, 0.005, 0.0025];
        let errors: Vec<f64> = dts.iter().map(|&dt| (endpoint(dt) - reference).abs()).collect();
        // least-squares slope of ln(err) vs ln(dt)
        let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let xm = xs.iter().sum::<f64>() / 3.0;
        let ym = ys.iter().sum::<f64>() / 3.0;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();
        assert!(slope >= 0.9, "measured convergence order {slope}");
    }

    #[test]
    fn overflow_aborts_with_step_index() {
        // dt at the stability margin with a huge kick: drive the state past
        // the guard through the noise term
        let spec = CoupledShearSpec::new(MU, NU, 800.0, 0.09, 3).unwrap();
        match simulate_shear(&spec, 200_000) {
            Err(EvtError::Unstable { .. }) => {}
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unstable_time_step() {
        assert!(CoupledShearSpec::new(20.0, 0.01, 0.0, 0.01, 0).is_err());
    }
}
