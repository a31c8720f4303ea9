//! Formula-driven linear regression.
//!
//! - [`expr`]: model formula algebra, printing and parsing
//! - [`table`]: delimited-text ingestion into typed columns
//! - [`design`]: encoding state and design-matrix construction
//! - [`infer`]: least-squares fits, inference, prediction and diagnostics
//! - [`anova`]: omnibus, per-term and nested F-tests
//! - [`stepwise`]: forward/backward selection with optional effect hierarchy

pub mod error;
pub mod expr;
pub mod table;
pub mod design;
pub mod infer;
pub mod anova;
pub mod stepwise;

pub use error::{Error, Result};
