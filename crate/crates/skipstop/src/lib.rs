//! Experiment harness for skip-stop corridor design: scenario configs, case
//! runs that chain the heuristic, the lower bound, stop planning and exact
//! evaluation, parameter sweeps and CSV reports.

pub mod case;
pub mod config;
pub mod error;
pub mod report;
pub mod sweep;

pub use case::{run_case, CaseResult, CaseStatus, RunOptions};
pub use config::{Preset, ScenarioConfig, SweepSpec, TransitMode};
pub use error::ExperimentError;
pub use report::{emit_reports, ReportOptions};
pub use sweep::{run_sweep, SweepSummary};
