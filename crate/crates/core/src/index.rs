//! Integer index built from fitted coefficients.
//!
//! Each coefficient is rounded to the nearest tenth and multiplied by ten;
//! halves (multiples of 0.05) round away from zero. Negative coefficients are
//! kept as negative weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{LassoFit, SelectionRule};
use crate::matrix::BinaryMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub lambda: f64,
    pub rule: SelectionRule,
    pub balancing_weights: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexModel {
    pub weights: Vec<i64>,
    pub raw_coefficients: Vec<f64>,
    pub provenance: Option<Provenance>,
}

/// `round(coef, 1 decimal) * 10`, ties away from zero.
pub fn integer_weight(coef: f64) -> i64 {
    (coef * 10.0).round() as i64
}

impl IndexModel {
    pub fn from_coefficients(raw: &[f64]) -> Self {
        Self {
            weights: raw.iter().map(|&c| integer_weight(c)).collect(),
            raw_coefficients: raw.to_vec(),
            provenance: None,
        }
    }

    /// Every weight equal to one: scoring reduces to counting features.
    pub fn unit(k: usize) -> Self {
        Self {
            weights: vec![1; k],
            raw_coefficients: vec![1.0; k],
            provenance: None,
        }
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// Features whose weight is negative.
    pub fn negative_features(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&j| self.weights[j] < 0).collect()
    }
}

pub fn build_index_model(fit: &LassoFit, balancing_weights: bool) -> IndexModel {
    let mut model = IndexModel::from_coefficients(&fit.final_coefficients);
    model.provenance = Some(Provenance {
        lambda: fit.selected_lambda(),
        rule: fit.rule,
        balancing_weights,
    });
    if !model.negative_features().is_empty() {
        log::info!(
            "index has negative weights for features {:?}",
            model.negative_features().iter().map(|j| j + 1).collect::<Vec<_>>()
        );
    }
    model
}

/// `S_i = sum_k weight_k x_ik`.
pub fn score(model: &IndexModel, x: &BinaryMatrix) -> Result<Vec<i64>> {
    if x.ncols() != model.n_features() {
        return Err(Error::Dimension(format!(
            "model has {} features, matrix has {} columns",
            model.n_features(),
            x.ncols()
        )));
    }
    Ok(x.rows()
        .map(|row| {
            row.iter()
                .zip(&model.weights)
                .map(|(&v, &w)| i64::from(v) * w)
                .sum()
        })
        .collect())
}

/// Number of features present per row.
pub fn symptom_count(x: &BinaryMatrix) -> Vec<i64> {
    x.rows().map(|row| row.iter().map(|&v| i64::from(v)).sum()).collect()
}
