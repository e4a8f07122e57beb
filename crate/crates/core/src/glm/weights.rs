//! Balancing weights: infected individuals keep weight 1 and uninfected
//! individuals in stratum `z` get `P(A=1 | Z=z) / P(A=0 | Z=z)`, estimated by
//! the ratio of stratum counts. Within every stratum the weighted uninfected
//! mass then equals the infected mass.

use std::ops::Deref;

use crate::cohort::Cohort;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Domain(format!("weight {i} = {} is not a nonnegative number", weights[i])));
        }
        Ok(Self(weights))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self(idx.iter().map(|&i| self.0[i]).collect())
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Weights from infection status and stratum labels (`strata[i] < n_strata`).
pub fn balancing_weights(infected: &[bool], strata: &[usize], names: &[String]) -> Result<WeightVector> {
    if infected.len() != strata.len() {
        return Err(Error::Dimension(format!(
            "{} labels but {} stratum labels",
            infected.len(),
            strata.len()
        )));
    }
    let n_strata = strata.iter().max().map_or(0, |m| m + 1).max(names.len());
    let mut counts = vec![[0usize; 2]; n_strata];
    for (&a, &z) in infected.iter().zip(strata) {
        counts[z][usize::from(a)] += 1;
    }
    let degenerate: Vec<String> = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| c[0] + c[1] > 0 && (c[0] == 0 || c[1] == 0))
        .map(|(z, c)| {
            let name = names.get(z).cloned().unwrap_or_else(|| z.to_string());
            format!("{name} ({} infected, {} uninfected)", c[1], c[0])
        })
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateStrata(degenerate));
    }
    let ratio: Vec<f64> = counts
        .iter()
        .map(|c| if c[0] == 0 { 0.0 } else { c[1] as f64 / c[0] as f64 })
        .collect();
    Ok(WeightVector(
        infected
            .iter()
            .zip(strata)
            .map(|(&a, &z)| if a { 1.0 } else { ratio[z] })
            .collect(),
    ))
}

pub fn compute_balancing_weights(cohort: &Cohort) -> Result<WeightVector> {
    let strata = cohort
        .strata
        .as_ref()
        .ok_or_else(|| Error::Config("balancing weights need stratum (z_) columns".into()))?;
    balancing_weights(&cohort.infected, &strata.labels, &strata.names)
}
