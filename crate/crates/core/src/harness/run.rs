//! End-to-end pipeline on a cohort CSV.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::artifacts::{write_coefficients, write_curves, write_cv_profile, ScoreTable};
use super::output::write_file;
use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::index::score;
use crate::metrics::cv_threshold_curve;
use crate::pipeline::{fit_index, PipelineConfig};

/// Paths of everything a pipeline run writes.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineArtifacts {
    pub coefficients: PathBuf,
    pub cv_profile: Option<PathBuf>,
    pub scores: PathBuf,
    pub curve: PathBuf,
    pub manifest: PathBuf,
}

/// Methodological choices recorded in every manifest.
#[derive(Debug, Serialize)]
struct Decisions {
    standardize_features: bool,
    penalize_intercept: bool,
    cv_folds_stratified_by_infection: bool,
    one_se_ties: &'static str,
    index_rounding: &'static str,
    negative_weights: &'static str,
    curve_grid: &'static str,
    curve_interpolation: &'static str,
}

const DECISIONS: Decisions = Decisions {
    standardize_features: false,
    penalize_intercept: false,
    cv_folds_stratified_by_infection: true,
    one_se_ties: "larger_lambda",
    index_rounding: "nearest_tenth_half_away_from_zero",
    negative_weights: "kept",
    curve_grid: "0.01..0.99 step 0.01",
    curve_interpolation: "linear",
};

#[derive(Debug, Serialize)]
struct FitSummary {
    lambda: f64,
    intercept: f64,
    weighted: bool,
    n_selected: usize,
    negative_features: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    input: String,
    individuals: usize,
    features: usize,
    config: &'a PipelineConfig,
    fit: FitSummary,
    decisions: &'static Decisions,
}

/// Weights → lasso → index → scores → cross-validated curves, written to
/// `out_dir` as `coefficients.csv`, `cv_profile.csv` (when the penalty was
/// cross-validated), `scores.csv`, `curve.csv` and `manifest.toml`.
pub fn run_pipeline(cohort_path: &Path, config: &PipelineConfig, out_dir: &Path) -> Result<PipelineArtifacts> {
    let cohort = Cohort::read_csv(cohort_path)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let fitted = fit_index(&cohort, config)?;

    let coefficients = out_dir.join("coefficients.csv");
    write_coefficients(&coefficients, &cohort.feature_names, &fitted.model)?;
    let cv_profile = match &fitted.fit {
        Some(fit) => {
            let path = out_dir.join("cv_profile.csv");
            write_cv_profile(&path, fit)?;
            Some(path)
        }
        None => None,
    };
    let scores = out_dir.join("scores.csv");
    ScoreTable::new(&cohort, score(&fitted.model, &cohort.features)?).write(&scores)?;
    let curve = out_dir.join("curve.csv");
    write_curves(&curve, &cv_threshold_curve(&cohort, config.curve_folds, config)?)?;

    let manifest = Manifest {
        tool: "nuindex",
        version: env!("CARGO_PKG_VERSION"),
        input: cohort_path.display().to_string(),
        individuals: cohort.len(),
        features: cohort.n_features(),
        config,
        fit: FitSummary {
            lambda: fitted.model.provenance.map_or(f64::NAN, |p| p.lambda),
            intercept: fitted.intercept,
            weighted: fitted.weighted,
            n_selected: fitted.model.raw_coefficients.iter().filter(|&&c| c != 0.0).count(),
            negative_features: fitted
                .model
                .negative_features()
                .into_iter()
                .map(|j| cohort.feature_names[j].clone())
                .collect(),
        },
        decisions: &DECISIONS,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    let manifest = write_file(&out_dir.join("manifest.toml"), &text)?;
    Ok(PipelineArtifacts {
        coefficients,
        cv_profile,
        scores,
        curve,
        manifest,
    })
}
