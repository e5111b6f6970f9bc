//! Command implementations behind the `foldcast` binary, exposed as a
//! library so integration tests can drive them directly.

pub mod bench;
pub mod conformal_cv;
pub mod error;
pub mod forecast;
pub mod ingest;
pub mod modelspec;
pub mod synth;
