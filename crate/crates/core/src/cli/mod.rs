//! Library side of the command-line tool: document parsing, reports and the worked-example suite.

pub mod analysis;
pub mod document;
pub mod suite;

pub use analysis::{analyze, AnalysisReport, AnalyzeSettings};
pub use document::{parse_spec, SystemSpecDocument};
pub use suite::{paper_suite, SuiteReport, SuiteSettings};
