//! Fold-based univariate time-series forecasting.
//!
//! The crate is organized around pure sequential primitives: every model is a
//! step function executed with [`fold::scan`], smoothing parameters are
//! fitted by forward-mode differentiation through the scan, multi-series work
//! goes through [`fold::batch_map`], and distribution-free prediction
//! intervals come from walk-forward conformal calibration.
//!
//! ```
//! use foldcast_core::models::{self, Model, ModelSpec};
//! use foldcast_core::series::{ForecastRequest, TimeSeries};
//!
//! let series = TimeSeries::new("demo", vec![1.0, 2.0, 3.0]).unwrap();
//! let request = ForecastRequest::new(2).unwrap();
//! let result = models::forecast(&Model::new(ModelSpec::Naive), &series, &request).unwrap();
//! assert_eq!(result.mean, vec![3.0, 3.0]);
//! ```

pub mod conformal;
pub mod error;
pub mod fold;
pub mod metrics;
pub mod models;
pub mod series;

pub use error::{Error, Result};
