//! File formats, command-line front end and plots for [`tactile_core`].
//!
//! * [`fieldio`]: field CSV files.
//! * [`dataset`]: calibration datasets (manifest plus field files).
//! * [`modelio`]: fitted models as JSON.
//! * [`markers`]: marker-centroid streams.
//! * [`report`], [`trace`], [`svg`]: evaluation tables, grasp traces and ratio plots.
//! * [`cli`]: the `tactile` subcommands.

#![forbid(unsafe_code)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod fieldio;
pub mod markers;
pub mod modelio;
pub mod report;
pub mod svg;
pub mod trace;

pub use error::{CliError, Result};
