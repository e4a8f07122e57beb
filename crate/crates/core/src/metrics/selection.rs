use serde::Serialize;

use super::kendall::kendall_tau;
use crate::error::{Error, Result};

/// How well a fitted coefficient vector recovers the non-null features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionReport {
    pub n_selected: usize,
    /// Share of non-null features that were selected; `None` without non-null features.
    pub tpr: Option<f64>,
    /// Share of null features left out; `None` without null features.
    pub tnr: Option<f64>,
    /// Kendall tau-b between estimates and true risk ratios; `None` when undefined.
    pub kendall_tau: Option<f64>,
}

impl SelectionReport {
    pub fn tpr(&self) -> Result<f64> {
        self.tpr
            .ok_or_else(|| Error::Undefined("true positive rate without non-null features".into()))
    }

    pub fn tnr(&self) -> Result<f64> {
        self.tnr
            .ok_or_else(|| Error::Undefined("true negative rate without null features".into()))
    }
}

pub fn selection_metrics(estimated: &[f64], true_beta1: &[f64]) -> Result<SelectionReport> {
    if estimated.len() != true_beta1.len() {
        return Err(Error::Dimension(format!(
            "{} estimates for {} true effects",
            estimated.len(),
            true_beta1.len()
        )));
    }
    let mut counts = [[0usize; 2]; 2]; // [non_null][selected]
    for (&g, &b) in estimated.iter().zip(true_beta1) {
        counts[usize::from(b != 1.0)][usize::from(g != 0.0)] += 1;
    }
    let rate = |hits: usize, total: usize| (total > 0).then(|| hits as f64 / total as f64);
    Ok(SelectionReport {
        n_selected: counts[0][1] + counts[1][1],
        tpr: rate(counts[1][1], counts[1][0] + counts[1][1]),
        tnr: rate(counts[0][0], counts[0][0] + counts[0][1]),
        kendall_tau: kendall_tau(estimated, true_beta1).ok(),
    })
}
