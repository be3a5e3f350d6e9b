//! Reproducible Monte Carlo simulation studies.
//!
//! A study is described declaratively by a [`config::StudyConfig`]: the
//! data-generating mechanisms (a factor grid over [`dgm::Mechanism`]), the
//! analysis methods, the estimands and the performance measures. The
//! [`engine`] runs the repetitions, storing the generator state at the start
//! of each one; [`perf`] turns the resulting estimates into performance
//! measures with Monte Carlo standard errors; [`report`] renders tables and
//! SVG figures.

pub mod config;
pub mod dgm;
pub mod dist;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod perf;
pub mod presets;
pub mod records;
pub mod report;
pub mod rng;
pub mod store;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits, enough to round-trip exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
