//! Library half of the `landau` binary: configuration, records and the
//! subcommands, exposed so tests can read records back.

// `!(x > 0.0)` rejects NaN along with the nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod record;
pub mod setup;
