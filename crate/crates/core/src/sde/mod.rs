//! Stochastic toy models of a bistable transition.
//!
//! Two Euler-Maruyama integrators generate the observable series the rest
//! of the pipeline consumes:
//!
//! - [`shear`]: a two-variable shear-flow caricature with an
//!   energy-preserving nonlinearity and multiplicative noise. The trivial
//!   state competes with a nontrivial fixed point; reaching the trivial
//!   state resets the run and counts one transition.
//! - [`doublewell`]: overdamped motion in a tilted double-well potential
//!   with additive noise; well escapes can optionally be timed and reset.
//!
//! Both use the Ito convention: the noise increment multiplies the state
//! evaluated before the step. A run owns its generator state, so distinct
//! runs (distinct seeds) are independent and may execute in parallel.

mod doublewell;
mod shear;

pub use doublewell::{
    barrier_height, critical_points, potential, simulate_doublewell, simulate_doublewell_from,
    CriticalPoints, DoubleWellSpec, Well,
};
pub use shear::{
    shear_fixed_points, simulate_shear, simulate_shear_from, CoupledShearSpec, ShearFixedPoints,
    DEFAULT_LAMINAR_THRESHOLD,
};

use crate::series::TimeSeries;

/// State magnitude beyond which an integration aborts as unstable.
pub const OVERFLOW_GUARD: f64 = 1e6;

/// Output of one simulation run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub series: TimeSeries,
    /// Reset events embedded in the series: laminarizations for the shear
    /// model, well escapes for the double-well model when escape recording
    /// is on.
    pub n_transitions: usize,
    /// Time from each reset to the next well escape (double-well model
    /// with escape recording only; empty otherwise).
    pub escape_times: Vec<f64>,
}
