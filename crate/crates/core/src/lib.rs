//! Detection of critical transitions in multi-stable systems from the
//! extreme-value statistics of observable time series.
//!
//! The pipeline: divide a stationary series into bins, keep each bin's
//! extremum (minima are sign-reversed so both tails are handled as maxima),
//! fit a generalized extreme value distribution by maximum likelihood, and
//! track the fitted shape parameter as a control parameter varies. Far from
//! a transition the observable is effectively bounded and the shape
//! parameter of the minima is negative; approaching the transition, rare
//! deep excursions toward the competing state fatten the lower tail and the
//! shape parameter crosses zero. The crossing locates the threshold.
//!
//! [`gev`] holds the distribution and the fitter, [`extremes`] the block
//! selection, [`indicators`] bulk early-warning statistics, [`sde`] two
//! bistable stochastic toy models for generating test series, [`ensemble`]
//! control-parameter scans with threshold detection, and [`io`] CSV
//! ingestion and emission.
//!
//! Ensemble scans run data-parallel via rayon when the default `parallel`
//! feature is enabled; disabling it yields a dependency-free sequential
//! build with bitwise-identical results. `RAYON_NUM_THREADS` overrides the
//! worker count.

pub mod ensemble;
pub mod error;
mod exec;
pub mod extremes;
pub mod gev;
pub mod indicators;
pub mod io;
pub mod sde;
pub mod seeding;
pub mod series;

pub use error::{EvtError, Result};
pub use series::TimeSeries;
