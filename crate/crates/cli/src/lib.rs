//! Batch front-end for the `fracldg` solver: config parsing and subcommand
//! dispatch.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod config;
pub mod dispatch;

pub use config::{parse_config, parse_config_as, to_text, Command, ConfigError, RunConfig};
pub use dispatch::{dispatch, exit, write_atomic, Failure};
