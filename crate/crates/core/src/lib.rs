//! Reweighted Kikuchi approximations on region graphs.
//!
//! The crate is `no_std` (with `alloc`): region graphs, pseudomarginal
//! tables, the reweighted objective, concavity tests, the single-cycle
//! forest polytope, and the generalized message-passing solver. File
//! formats and the command line live in the `kikuchi` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod concavity;
pub mod error;
pub mod math;
pub mod message_passing;
pub mod models;
pub mod objective;
pub mod polytope;
pub mod region_graph;
pub mod tables;

pub use error::{Error, Result};
pub use region_graph::{RegionGraph, RegionId, TwoLayerView};
pub use tables::{FactorTable, Pseudomarginals};
