//! Batch front door: config parsing, the analysis driver, and report / CSV
//! emission used by the `bifurcata` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{build_family, parse_config, serialize_config, AnalysisConfig, ProblemSpec};
pub use report::{emit_csv, AnalysisReport, CsvData};
pub use run::run;
