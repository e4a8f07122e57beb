//! Weighted lasso-penalized logistic regression with cross-validated
//! selection of the penalty, plus balancing weights.

mod cv;
mod solver;
mod weights;

pub use cv::{cv_fit, select_indices, stratified_folds, CvLoss, CvOptions, LassoFit, SelectionRule};
pub use solver::{
    fit_at_lambda, fit_path, geometric_path, lambda_path, Coefficients, FitDiagnostics, FitOptions,
    LassoSolver, Problem,
};
pub use weights::{balancing_weights, compute_balancing_weights, WeightVector};
