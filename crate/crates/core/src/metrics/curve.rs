//! Classification rates `score >= t` among infected and uninfected
//! individuals, as a function of the threshold `t`.

use serde::Serialize;

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::index::symptom_count;
use crate::pipeline::{cross_validated_scores, HeldOutScores, PipelineConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub threshold: f64,
    pub rate_infected: f64,
    pub rate_uninfected: f64,
}

/// Points ordered by increasing threshold, starting at a `-inf` sentinel with
/// rates (1, 1) and ending at a `+inf` sentinel with rates (0, 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub points: Vec<ThresholdPoint>,
}

impl ThresholdCurve {
    /// Uninfected rate at `infected_rate`, interpolated linearly between the
    /// two neighbouring thresholds (a randomized cut within a run of ties).
    pub fn uninfected_rate_at(&self, infected_rate: f64) -> f64 {
        // points run from rates (1, 1) down to (0, 0)
        let hi = self
            .points
            .iter()
            .rposition(|p| p.rate_infected >= infected_rate)
            .unwrap_or(0);
        let (upper, lower) = (self.points[hi], self.points[(hi + 1).min(self.points.len() - 1)]);
        let span = upper.rate_infected - lower.rate_infected;
        if span <= 0.0 {
            return upper.rate_uninfected;
        }
        let t = (infected_rate - lower.rate_infected) / span;
        lower.rate_uninfected + t * (upper.rate_uninfected - lower.rate_uninfected)
    }
}

pub fn threshold_curve(scores: &[f64], infected: &[bool]) -> Result<ThresholdCurve> {
    if scores.len() != infected.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} individuals",
            scores.len(),
            infected.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("NaN score".into()));
    }
    let n1 = infected.iter().filter(|&&a| a).count();
    let n0 = infected.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::Undefined("threshold curve needs infected and uninfected individuals".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    // sweep from the top, emitting a point after each run of tied scores
    let mut points = vec![ThresholdPoint {
        threshold: f64::INFINITY,
        rate_infected: 0.0,
        rate_uninfected: 0.0,
    }];
    let (mut above1, mut above0) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            if infected[order[k]] {
                above1 += 1;
            } else {
                above0 += 1;
            }
            k += 1;
        }
        points.push(ThresholdPoint {
            threshold: t,
            rate_infected: above1 as f64 / n1 as f64,
            rate_uninfected: above0 as f64 / n0 as f64,
        });
    }
    points.push(ThresholdPoint {
        threshold: f64::NEG_INFINITY,
        rate_infected: 1.0,
        rate_uninfected: 1.0,
    });
    points.reverse();
    Ok(ThresholdCurve { points })
}

/// Infected rates `0.01, 0.02, …, 0.99` at which fold curves are averaged.
pub fn rate_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// Per-fold curves and their pointwise average over [`rate_grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldCurves {
    pub folds: Vec<ThresholdCurve>,
    pub grid: Vec<f64>,
    pub average_uninfected: Vec<f64>,
}

impl FoldCurves {
    pub fn from_scores(scores: &[f64], infected: &[bool], fold: &[usize], folds: usize) -> Result<Self> {
        let curves = (0..folds)
            .map(|f| {
                let idx: Vec<usize> = (0..scores.len()).filter(|&i| fold[i] == f).collect();
                let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
                let a: Vec<bool> = idx.iter().map(|&i| infected[i]).collect();
                threshold_curve(&s, &a).map_err(|e| Error::FoldDegeneracy(format!("fold {f}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = rate_grid();
        let average_uninfected = grid
            .iter()
            .map(|&r| curves.iter().map(|c| c.uninfected_rate_at(r)).sum::<f64>() / folds as f64)
            .collect();
        Ok(Self {
            folds: curves,
            grid,
            average_uninfected,
        })
    }

    /// Averaged uninfected rate at the grid point nearest `infected_rate`.
    pub fn average_at(&self, infected_rate: f64) -> f64 {
        let nearest = (0..self.grid.len())
            .min_by(|&a, &b| {
                (self.grid[a] - infected_rate)
                    .abs()
                    .total_cmp(&(self.grid[b] - infected_rate).abs())
            })
            .expect("non-empty grid");
        self.average_uninfected[nearest]
    }
}

/// Held-out curves of the fitted index and of the symptom count.
#[derive(Debug, Clone)]
pub struct CvCurves {
    pub index: FoldCurves,
    pub symptom_count: FoldCurves,
    pub held_out: HeldOutScores,
}

pub fn cv_threshold_curve(cohort: &Cohort, folds: usize, config: &PipelineConfig) -> Result<CvCurves> {
    let held_out = cross_validated_scores(cohort, folds, config)?;
    let as_f64 = |v: &[i64]| v.iter().map(|&s| s as f64).collect::<Vec<_>>();
    let index = FoldCurves::from_scores(&as_f64(&held_out.index), &cohort.infected, &held_out.fold, folds)?;
    let count = as_f64(&symptom_count(&cohort.features));
    let symptom_count = FoldCurves::from_scores(&count, &cohort.infected, &held_out.fold, folds)?;
    Ok(CvCurves {
        index,
        symptom_count,
        held_out,
    })
}
