//! Experiment orchestration: sweeps, threshold fits, cut-off search and reports.

pub mod config;
pub mod cutoff;
pub mod ege;
pub mod estimate;
pub mod fit;
pub mod report;

pub use config::{CutoffSpec, EmissionVariant, ExperimentConfig, SchemeKind, WernerParams};
pub use cutoff::{cutoff_attempts, cutoff_to_time, optimize_cutoff, CutoffOutcome, ThresholdProbe};
pub use ege::{ege, Efficiency};
pub use estimate::{
    build_point, estimate_logical_error, ghz_source, parse_runs_csv, run_sweep, run_sweep_with, runs_csv, wilson_interval,
    PointEstimate, PointSetup, RunRow,
};
pub use fit::{fit_threshold, should_abandon, FitPoint, FitResult};
pub use report::{report_csv, report_row, ReportRow};
