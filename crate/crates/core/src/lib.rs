//! Two-boson interference in generalized n-port interferometers.
//!
//! A pair of identical bosons, one from each of two sources, is routed
//! through a path-splitter into `n` detector channels. The same engine
//! covers the Hong-Ou-Mandel dip (`n = 2`), the four-port extended HOM
//! setup and, as `n` grows without bound, the Hanbury Brown-Twiss
//! coincidence fringes.
//!
//! Module map:
//!
//! - [`amplitudes`]: symmetrized two-boson states and coincidence statistics
//! - [`splitters`]: path-splitter columns, beam-splitter networks
//! - [`experiments`]: canned HOM / extended HOM / n-port runs, fringe analysis
//! - [`hbt`]: the continuous limit over detector positions
//! - [`oracle`]: closed-form per-event probabilities used for cross-checks
//! - [`cli`]: configuration and output for the `twinterf` binary

pub mod amplitudes;
pub mod cli;
mod error;
pub mod experiments;
pub mod hbt;
pub mod oracle;
pub mod splitters;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Absolute tolerance for amplitude comparisons.
pub const AMPLITUDE_TOL: f64 = 1e-12;
/// Absolute tolerance for probability comparisons.
pub const PROBABILITY_TOL: f64 = 1e-10;
/// Accepted deviation of an input column's norm from one.
pub const INPUT_NORM_TOL: f64 = 1e-9;
