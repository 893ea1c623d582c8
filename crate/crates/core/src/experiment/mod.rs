//! Experiment orchestration: configuration, the factor pipeline, finite
//! products, the statement suites and the report.

mod config;
mod pipeline;
mod products;
mod report;
mod suite;

pub use config::*;
pub use pipeline::*;
pub use products::*;
pub use report::*;
pub use suite::*;
