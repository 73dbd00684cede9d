//! Joint cell detection and tracking by selecting a conflict-free subset of
//! cell proposals and event edges from a spatio-temporal graph.

// `!(x >= y)` is used on purpose where NaN must be rejected.
#![allow(clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod par;
pub mod pipeline;
pub mod proposals;
pub mod sim;
pub mod solve;

pub use error::{Error, Result};
