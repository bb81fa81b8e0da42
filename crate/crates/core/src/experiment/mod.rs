//! Configured experiments: TOML configuration, the runs themselves, CSV
//! reports and optional SVG plots.

pub mod config;
pub mod plot;
pub mod report;
pub mod runs;

pub use config::ExperimentConfig;
pub use report::{audit_run_dir, Cell, RunReport, Table};
pub use runs::{
    analyze_counts, derive_seeds, render_plots, run_depth_sweep, run_efficiency_sweep, run_profile,
    run_selfcheck, run_stats, run_tomography, run_tomography_on_counts, selfcheck_passed, Analysis,
    Experiment, TomographyRow,
};
