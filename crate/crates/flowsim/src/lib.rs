//! Files, figure index and command line for flowchart plagiarism search.
//!
//! The image analysis itself lives in `flowsim_core`; this crate adds PGM
//! (and optional PNG) decoding, the JSON-lines metadata index, query
//! reports, synthetic corpus output and the `flowsim` binary.

pub mod cli;
pub mod codec;
mod error;
pub mod query;
pub mod shapes;
pub mod store;
pub mod synthio;

pub use error::{exit, Error, Result};
pub use flowsim_core as core;
