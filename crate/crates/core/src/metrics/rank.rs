//! Rank-based discrimination measures for a binary outcome.

use serde::Serialize;

use crate::error::{Error, Result};

fn counts(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Domain("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    Ok((pos, labels.len() - pos))
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    let (pos, neg) = counts(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined("both outcome classes must be present".into()));
    }
    Ok((pos, neg))
}

/// Indices ordered by score, grouped into runs of tied scores.
fn tie_groups(scores: &[f64], descending: bool) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let c = scores[a].total_cmp(&scores[b]);
        if descending { c.reverse() } else { c }
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if scores[g[0]] == scores[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    let mut below = 0.0;
    let mut wins = 0.0;
    for g in tie_groups(scores, false) {
        let p = g.iter().filter(|&&i| labels[i]).count() as f64;
        let q = g.len() as f64 - p;
        wins += p * below + 0.5 * p * q;
        below += q;
    }
    Ok(wins / (pos as f64 * neg as f64))
}

/// Average precision: precision at each distinct threshold weighted by the
/// recall gained there.
pub fn aucpr(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, _) = counts(scores, labels)?;
    if pos == 0 {
        return Err(Error::Undefined("average precision needs a positive".into()));
    }
    let (mut tp, mut fp, mut prev_recall, mut ap) = (0.0, 0.0, 0.0, 0.0);
    for g in tie_groups(scores, true) {
        let p = g.iter().filter(|&&i| labels[i]).count() as f64;
        tp += p;
        fp += g.len() as f64 - p;
        let recall = tp / pos as f64;
        ap += (recall - prev_recall) * tp / (tp + fp);
        prev_recall = recall;
    }
    Ok(ap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wilcoxon {
    /// Mann–Whitney U of the positive class.
    pub u: f64,
    /// Tie-corrected standardized statistic, no continuity correction.
    pub z: f64,
}

/// Rank-sum test comparing positive against negative scores.
pub fn wilcoxon_statistic(scores: &[f64], labels: &[bool]) -> Result<Wilcoxon> {
    let (pos, neg) = check(scores, labels)?;
    let (n1, n0) = (pos as f64, neg as f64);
    let n = n1 + n0;
    let mut rank_sum = 0.0;
    let mut tie_term = 0.0;
    let mut next_rank = 1.0;
    for g in tie_groups(scores, false) {
        let t = g.len() as f64;
        let midrank = next_rank + (t - 1.0) / 2.0;
        rank_sum += midrank * g.iter().filter(|&&i| labels[i]).count() as f64;
        tie_term += t * t * t - t;
        next_rank += t;
    }
    let u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    let var = n1 * n0 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let z = if var > 0.0 { (u - n1 * n0 / 2.0) / var.sqrt() } else { 0.0 };
    Ok(Wilcoxon { u, z })
}
