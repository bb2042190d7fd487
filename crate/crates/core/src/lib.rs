//! Corpus-scale analysis of Solidity smart-contract sources.
//!
//! The pipeline has four stages, one module each:
//!
//! - [`corpus`]: load, validate and deduplicate contract records, or fetch
//!   verified sources from an Etherscan-compatible API.
//! - [`metrics`]: per-contract software metrics (line classes, keyword
//!   counts, cyclomatic complexity, ABI/bytecode sizes).
//! - [`stats`]: descriptive statistics and histograms over a metric column.
//! - [`distfit`]: empirical CCDFs with power-law tail and lognormal fits,
//!   Kolmogorov–Smirnov and log-log R² goodness of fit.
//!
//! [`report`] ties the stages into the table, JSON, TSV and SVG outputs
//! used by the command-line interface.

pub mod corpus;
pub mod distfit;
pub mod metrics;
pub mod report;
pub mod stats;

pub use corpus::{fetch::FetchConfig, Address, ContractRecord, Corpus};
pub use distfit::{EmpiricalCcdf, LogNormalFit, PowerLawFit};
pub use metrics::{LineClass, Metric, MetricVector};
pub use report::{FitReport, MetricsTable, Thresholds, Verdict};
pub use stats::{Histogram, SummaryStatistics};
