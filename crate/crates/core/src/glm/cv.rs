//! K-fold cross-validation over the regularization path.

use serde::{Deserialize, Serialize};

use super::solver::{fit_path, geometric_path, logistic_loss, Coefficients, FitOptions, Problem};
use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::rng::{hash_bytes, hash_pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Lambda with the smallest CV error.
    Min,
    /// Largest lambda whose CV error is within one standard error of the minimum.
    OneSe,
}

impl std::str::FromStr for SelectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Self::Min),
            "one_se" | "1se" => Ok(Self::OneSe),
            _ => Err(Error::Config(format!("unknown selection rule `{s}` (min, one_se)"))),
        }
    }
}

/// Held-out loss used to compare penalties.
///
/// Misclassification at probability 1/2 is flat along the whole path when one
/// class dominates (every row is predicted as the majority class), so the
/// selection rules then return the empty model. Deviance is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvLoss {
    /// Weighted share of held-out rows on the wrong side of probability 1/2.
    Misclassification,
    /// Weighted mean binomial deviance.
    #[default]
    Deviance,
}

impl std::str::FromStr for CvLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "misclassification" | "class" => Ok(Self::Misclassification),
            "deviance" => Ok(Self::Deviance),
            _ => Err(Error::Config(format!("unknown cv loss `{s}` (misclassification, deviance)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvOptions {
    pub folds: usize,
    pub loss: CvLoss,
    pub n_lambda: usize,
    pub min_ratio: f64,
    pub rule: SelectionRule,
    /// Seed for the fold assignment.
    pub seed: u64,
    #[serde(skip)]
    pub fit: FitOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            loss: CvLoss::default(),
            n_lambda: 100,
            min_ratio: 0.01,
            rule: SelectionRule::OneSe,
            seed: 1,
            fit: FitOptions::default(),
        }
    }
}

/// Regularization path with its cross-validation profile and the selected model.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub lambdas: Vec<f64>,
    pub path: Vec<Coefficients>,
    pub nonzero: Vec<usize>,
    pub cv_error: Vec<f64>,
    pub cv_se: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_1se: f64,
    pub rule: SelectionRule,
    /// Index into `lambdas` of the selected model.
    pub selected: usize,
    pub final_coefficients: Vec<f64>,
    pub final_intercept: f64,
}

impl LassoFit {
    pub fn selected_lambda(&self) -> f64 {
        self.lambdas[self.selected]
    }

    pub fn n_selected(&self) -> usize {
        self.nonzero[self.selected]
    }
}

/// Stratified fold assignment that depends only on `(seed, id)` and the label
/// classes: within each class, individuals are ordered by a hash of their id
/// and dealt round-robin, infected first, continuing the same counter through
/// the uninfected. Every fold receives both classes.
pub fn stratified_folds(ids: &[String], labels: &[bool], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::FoldDegeneracy(format!("{folds} folds requested; need at least 2")));
    }
    if ids.len() != labels.len() {
        return Err(Error::Dimension("ids and labels differ in length".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let smallest_class = positives.min(labels.len() - positives);
    if smallest_class < folds {
        return Err(Error::FoldDegeneracy(format!(
            "smallest label class has {smallest_class} members, fewer than {folds} folds"
        )));
    }
    let key = |i: usize| (hash_pair(seed, hash_bytes(ids[i].as_bytes())), ids[i].as_str(), i);
    let mut assignment = vec![0; ids.len()];
    let mut counter = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..ids.len()).filter(|&i| labels[i] == class).collect();
        members.sort_by_cached_key(|&i| key(i));
        for i in members {
            assignment[i] = counter % folds;
            counter += 1;
        }
    }
    Ok(assignment)
}

/// Sparse rows for prediction: indices of the features equal to 1.
fn row_support(x: &BinaryMatrix, rows: &[usize]) -> Vec<Vec<u32>> {
    rows.iter()
        .map(|&i| {
            x.row(i)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == 1)
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect()
}

/// Weighted held-out loss for every path entry.
fn held_out_errors(path: &[Coefficients], rows: &[Vec<u32>], a: &[bool], w: &[f64], loss: CvLoss) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    path.iter()
        .map(|coef| {
            let sum: f64 = rows
                .iter()
                .zip(a)
                .zip(w)
                .map(|((row, &label), &wi)| {
                    let eta = coef.intercept + row.iter().map(|&j| coef.beta[j as usize]).sum::<f64>();
                    wi * match loss {
                        CvLoss::Misclassification => f64::from(u8::from((eta > 0.0) != label)),
                        CvLoss::Deviance => 2.0 * logistic_loss(eta, f64::from(u8::from(label))),
                    }
                })
                .sum();
            sum / total
        })
        .collect()
}

/// Mean and standard error across folds, each fold weighted by its held-out
/// weight total.
fn aggregate(fold_errors: &[Vec<f64>], fold_weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n_lambda = fold_errors[0].len();
    let total: f64 = fold_weights.iter().sum();
    let k = fold_errors.len() as f64;
    (0..n_lambda)
        .map(|l| {
            let mean = fold_errors
                .iter()
                .zip(fold_weights)
                .map(|(e, w)| e[l] * w)
                .sum::<f64>()
                / total;
            let var = fold_errors
                .iter()
                .zip(fold_weights)
                .map(|(e, w)| w * (e[l] - mean).powi(2))
                .sum::<f64>()
                / total;
            (mean, (var / (k - 1.0)).sqrt())
        })
        .unzip()
}

/// Index of the minimum CV error (first, i.e. largest lambda, on ties) and
/// the index chosen by the one-standard-error rule.
pub fn select_indices(cv_error: &[f64], cv_se: &[f64]) -> (usize, usize) {
    let mut best = 0;
    for (i, &e) in cv_error.iter().enumerate() {
        if e < cv_error[best] {
            best = i;
        }
    }
    let bound = cv_error[best] + cv_se[best];
    let one_se = cv_error.iter().position(|&e| e <= bound).unwrap_or(best);
    (best, one_se)
}

/// Cross-validated lasso path. `ids` key the fold assignment.
pub fn cv_fit(x: &BinaryMatrix, a: &[bool], w: &[f64], ids: &[String], opts: &CvOptions) -> Result<LassoFit> {
    let n = x.nrows();
    if ids.len() != n {
        return Err(Error::Dimension(format!("{} ids for {n} rows", ids.len())));
    }
    let assignment = stratified_folds(ids, a, opts.folds, opts.seed)?;
    let full = Problem::new(x, a, w)?;
    let lambdas = geometric_path(full.lambda_max(), opts.n_lambda, opts.min_ratio)?;
    let path = fit_path(&full, &lambdas, opts.fit)?;

    let mut fold_errors = Vec::with_capacity(opts.folds);
    let mut fold_weights = Vec::with_capacity(opts.folds);
    for fold in 0..opts.folds {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| assignment[i] == fold);
        let sub = |idx: &[usize]| -> (Vec<bool>, Vec<f64>) {
            (idx.iter().map(|&i| a[i]).collect(), idx.iter().map(|&i| w[i]).collect())
        };
        let (a_train, w_train) = sub(&train);
        let (a_test, w_test) = sub(&test);
        let prob = Problem::new(&x.select_rows(&train), &a_train, &w_train)
            .map_err(|e| Error::FoldDegeneracy(format!("fold {fold}: {e}")))?;
        let fold_path = fit_path(&prob, &lambdas, opts.fit)?;
        let test_weight: f64 = w_test.iter().sum();
        if !(test_weight > 0.0) {
            return Err(Error::FoldDegeneracy(format!("fold {fold} has no held-out weight")));
        }
        fold_errors.push(held_out_errors(&fold_path, &row_support(x, &test), &a_test, &w_test, opts.loss));
        fold_weights.push(test_weight);
    }
    let (cv_error, cv_se) = aggregate(&fold_errors, &fold_weights);
    let (i_min, i_1se) = select_indices(&cv_error, &cv_se);
    let selected = match opts.rule {
        SelectionRule::Min => i_min,
        SelectionRule::OneSe => i_1se,
    };
    let chosen = path[selected].clone();
    Ok(LassoFit {
        nonzero: path.iter().map(Coefficients::nonzero).collect(),
        lambda_min: lambdas[i_min],
        lambda_1se: lambdas[i_1se],
        rule: opts.rule,
        selected,
        final_coefficients: chosen.beta,
        final_intercept: chosen.intercept,
        lambdas,
        path,
        cv_error,
        cv_se,
    })
}
