//! Simulated annealing with simulation-estimated costs.

// Checks like `!(x > 0.0)` are written that way so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crn;
pub mod experiment;
pub mod policy;
pub mod sa;
pub mod spmsp;
pub mod stats;
pub mod toymin;
