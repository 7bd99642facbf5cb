//! File formats, experiment sweeps and reports on top of `kikuchi-core`.
//!
//! The `kikuchi` binary is a thin wrapper over these modules.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod formats;
pub mod plot;
pub mod report;
pub mod sweep;

pub use error::{Error, Result};
pub use kikuchi_core;
