//! Replicated simulation studies and the end-to-end pipeline.

mod artifacts;
mod config;
pub mod format;
mod output;
mod run;
mod study;

pub use artifacts::{read_coefficients, write_coefficients, write_curves, write_cv_profile, write_fitted, ScoreTable};
pub use config::{default_out_dir, Arm, Arms, StudyConfig, DEFAULT_REPLICATES, OUT_DIR_ENV};
pub use output::{emit_discrimination, emit_records, emit_table, write_study, TableStyle};
pub use run::{run_pipeline, PipelineArtifacts};
pub use study::{
    evaluate_arm, replicate_cohort, run_study, CellSummary, Discrimination, ReplicateMetrics, ReplicateRecord,
    StudyResult,
};
