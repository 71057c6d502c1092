//! Command layer for the q-Bessel wavelet toolkit: configuration, CSV/JSON
//! I/O, the CLI verbs and the identity-verification suite.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod report;
pub mod verify;

pub use config::{Config, Settings};
pub use error::{CliError, CliResult};
pub use report::{Record, VerifyReport};
