//! End-to-end runs: the interferometer sweep, pseudo-pure preparation, the
//! gate suite and process tomography.

mod config;
mod interferometer;
mod output;
mod prep;
pub mod sequences;
mod suite;

pub use config::{ExperimentConfig, OutputFormat, OutputSpec, SweepGrid};
pub use interferometer::{
    run_fig3_sweep, run_interferometer, sweep_points, SweepRecord, SweepResult, SweepVariant, DECOMPOSITION_TOL,
};
pub use output::{emit_results, format_sig, render_csv, render_json, CSV_HEADER};
pub use prep::{check_prep_program, pseudo_pure_decomposition, run_prep_check, PrepReport, PREP_RESIDUAL_TOL};
pub use suite::{run_gate_suite, run_tomography, GateKind, GateSuiteEntry, TomographyReport, GATE_TOL};
