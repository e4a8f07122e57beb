//! The applied workflow on one cohort: weights → cross-validated lasso →
//! integer index → scores.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::glm::{
    compute_balancing_weights, cv_fit, fit_at_lambda, stratified_folds, CvOptions, LassoFit, SelectionRule,
    WeightVector,
};
use crate::index::{build_index_model, score, IndexModel, Provenance};

/// Whether the fit is weighted by balancing weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Weight when the cohort has stratum columns.
    #[default]
    Auto,
    /// Always weight; a cohort without strata is a configuration error.
    On,
    Off,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "on" | "balancing" => Ok(Self::On),
            "off" | "unadjusted" => Ok(Self::Off),
            _ => Err(Error::Config(format!("unknown weighting `{s}` (auto, on, off)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub weighting: Weighting,
    pub cv: CvOptions,
    /// Skip cross-validation and fit at this penalty.
    pub fixed_lambda: Option<f64>,
    /// Folds of the outer cross-validation behind the threshold curves.
    pub curve_folds: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            weighting: Weighting::Auto,
            cv: CvOptions::default(),
            fixed_lambda: None,
            curve_folds: 10,
        }
    }
}

/// A fitted index together with the fit that produced it.
#[derive(Debug, Clone)]
pub struct FittedIndex {
    pub model: IndexModel,
    pub intercept: f64,
    pub weighted: bool,
    /// Present unless the penalty was fixed.
    pub fit: Option<LassoFit>,
}

/// Weights requested by `weighting`, and whether they are balancing weights.
pub fn resolve_weights(cohort: &Cohort, weighting: Weighting) -> Result<(WeightVector, bool)> {
    match weighting {
        Weighting::Off => Ok((WeightVector::uniform(cohort.len()), false)),
        Weighting::Auto if cohort.strata.is_none() => Ok((WeightVector::uniform(cohort.len()), false)),
        Weighting::Auto | Weighting::On => Ok((compute_balancing_weights(cohort)?, true)),
    }
}

pub fn fit_index(cohort: &Cohort, config: &PipelineConfig) -> Result<FittedIndex> {
    let (w, weighted) = resolve_weights(cohort, config.weighting)?;
    match config.fixed_lambda {
        Some(lambda) => {
            let coef = fit_at_lambda(&cohort.features, &cohort.infected, &w, lambda, None, config.cv.fit)?;
            let mut model = IndexModel::from_coefficients(&coef.beta);
            model.provenance = Some(Provenance {
                lambda,
                rule: SelectionRule::Min,
                balancing_weights: weighted,
            });
            Ok(FittedIndex {
                model,
                intercept: coef.intercept,
                weighted,
                fit: None,
            })
        }
        None => {
            let fit = cv_fit(&cohort.features, &cohort.infected, &w, &cohort.ids, &config.cv)?;
            Ok(FittedIndex {
                model: build_index_model(&fit, weighted),
                intercept: fit.final_intercept,
                weighted,
                fit: Some(fit),
            })
        }
    }
}

/// Index scores of every individual from the fold that held it out.
#[derive(Debug, Clone, PartialEq)]
pub struct HeldOutScores {
    pub fold: Vec<usize>,
    pub index: Vec<i64>,
}

/// Fit on all folds but one (recomputing weights on the training part) and
/// score the held-out fold, for every fold.
pub fn cross_validated_scores(cohort: &Cohort, folds: usize, config: &PipelineConfig) -> Result<HeldOutScores> {
    let assignment = stratified_folds(&cohort.ids, &cohort.infected, folds, config.cv.seed)?;
    let per_fold: Vec<(Vec<usize>, Vec<i64>)> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..cohort.len()).partition(|&i| assignment[i] == fold);
            let fitted = fit_index(&cohort.subset(&train), config)?;
            let scores = score(&fitted.model, &cohort.features.select_rows(&test))?;
            Ok((test, scores))
        })
        .collect::<Result<_>>()?;
    let mut index = vec![0; cohort.len()];
    for (test, scores) in per_fold {
        for (i, s) in test.into_iter().zip(scores) {
            index[i] = s;
        }
    }
    Ok(HeldOutScores { fold: assignment, index })
}
