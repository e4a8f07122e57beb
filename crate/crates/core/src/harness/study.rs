use rayon::prelude::*;
use serde::Serialize;

use super::config::{Arm, StudyConfig};
use super::format::{mean, quantile, sd};
use crate::cohort::Cohort;
use crate::datagen::{sample_cohort_with, ScenarioSpec};
use crate::error::{Error, Result};
use crate::glm::{compute_balancing_weights, cv_fit, CvOptions, WeightVector};
use crate::index::{build_index_model, score, symptom_count};
use crate::metrics::{auc, aucpr, selection_metrics, wilcoxon_statistic, SelectionReport};
use crate::rng::{stream, stream_id};

/// Discrimination of latent status by one score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrimination {
    pub auc: f64,
    pub aucpr: f64,
    pub wilcoxon_z: f64,
}

impl Discrimination {
    pub fn of(scores: &[i64], latent: &[bool]) -> Result<Self> {
        let s: Vec<f64> = scores.iter().map(|&v| v as f64).collect();
        Ok(Self {
            auc: auc(&s, latent)?,
            aucpr: aucpr(&s, latent)?,
            wilcoxon_z: wilcoxon_statistic(&s, latent)?.z,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateMetrics {
    pub selection: SelectionReport,
    pub lambda: f64,
    pub index: Discrimination,
    pub symptom_count: Discrimination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub scenario: String,
    pub arm: Arm,
    pub replicate: usize,
    /// Metrics, or the error message of a failed replicate.
    pub outcome: std::result::Result<ReplicateMetrics, String>,
}

/// Summary of one scenario × arm cell over its successful replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub scenario: String,
    pub arm: Arm,
    pub succeeded: usize,
    pub failed: usize,
    pub selected_median: f64,
    pub selected_q1: f64,
    pub selected_q3: f64,
    pub tpr_mean: f64,
    pub tpr_sd: f64,
    pub tnr_mean: f64,
    pub tnr_sd: f64,
    /// Over replicates where tau is defined (it is not for empty models).
    pub tau_mean: f64,
    pub tau_sd: f64,
    pub tau_defined: usize,
    pub auc_index_mean: f64,
    pub auc_count_mean: f64,
}

impl CellSummary {
    pub fn from_records<'a>(scenario: &str, arm: Arm, records: impl IntoIterator<Item = &'a ReplicateRecord>) -> Self {
        let mut failed = 0;
        let mut ok = Vec::new();
        for r in records {
            match &r.outcome {
                Ok(m) => ok.push(m),
                Err(_) => failed += 1,
            }
        }
        let collect = |f: &dyn Fn(&ReplicateMetrics) -> Option<f64>| -> Vec<f64> {
            ok.iter().filter_map(|m| f(m)).collect()
        };
        let selected = collect(&|m| Some(m.selection.n_selected as f64));
        let tpr = collect(&|m| m.selection.tpr);
        let tnr = collect(&|m| m.selection.tnr);
        let tau = collect(&|m| m.selection.kendall_tau);
        Self {
            scenario: scenario.to_string(),
            arm,
            succeeded: ok.len(),
            failed,
            selected_median: quantile(&selected, 0.5),
            selected_q1: quantile(&selected, 0.25),
            selected_q3: quantile(&selected, 0.75),
            tpr_mean: mean(&tpr),
            tpr_sd: sd(&tpr),
            tnr_mean: mean(&tnr),
            tnr_sd: sd(&tnr),
            tau_mean: mean(&tau),
            tau_sd: sd(&tau),
            tau_defined: tau.len(),
            auc_index_mean: mean(&collect(&|m| Some(m.index.auc))),
            auc_count_mean: mean(&collect(&|m| Some(m.symptom_count.auc))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    /// Sorted by (scenario in config order, arm, replicate).
    pub records: Vec<ReplicateRecord>,
    /// One per scenario × arm, in record order.
    pub summaries: Vec<CellSummary>,
}

impl StudyResult {
    pub fn summary(&self, scenario: &str, arm: Arm) -> Option<&CellSummary> {
        self.summaries.iter().find(|s| s.scenario == scenario && s.arm == arm)
    }

    pub fn records_for<'a>(&'a self, scenario: &'a str, arm: Arm) -> impl Iterator<Item = &'a ReplicateRecord> + 'a {
        self.records.iter().filter(move |r| r.scenario == scenario && r.arm == arm)
    }
}

fn arm_weights(cohort: &Cohort, arm: Arm) -> Result<WeightVector> {
    match arm {
        Arm::Unadjusted => Ok(WeightVector::uniform(cohort.len())),
        Arm::Balancing => compute_balancing_weights(cohort),
    }
}

/// Fit one arm on a sampled cohort and score it against latent status.
pub fn evaluate_arm(spec: &ScenarioSpec, cohort: &Cohort, arm: Arm, cv: &CvOptions) -> Result<ReplicateMetrics> {
    let latent = cohort
        .latent
        .as_ref()
        .ok_or_else(|| Error::Config("study cohorts need latent status".into()))?;
    let w = arm_weights(cohort, arm)?;
    let fit = cv_fit(&cohort.features, &cohort.infected, &w, &cohort.ids, cv)?;
    let model = build_index_model(&fit, arm == Arm::Balancing);
    Ok(ReplicateMetrics {
        selection: selection_metrics(&fit.final_coefficients, &spec.beta1)?,
        lambda: fit.selected_lambda(),
        index: Discrimination::of(&score(&model, &cohort.features)?, latent)?,
        symptom_count: Discrimination::of(&symptom_count(&cohort.features), latent)?,
    })
}

/// Sample replicate `replicate` of `spec` from its own stream of `master_seed`.
pub fn replicate_cohort(spec: &ScenarioSpec, master_seed: u64, replicate: usize) -> Result<Cohort> {
    let mut rng = stream(master_seed, stream_id(&spec.name, replicate as u64));
    sample_cohort_with(spec, &mut rng)
}

fn run_unit(spec: &ScenarioSpec, arms: &[Arm], replicate: usize, config: &StudyConfig) -> Vec<ReplicateRecord> {
    let cohort = replicate_cohort(spec, config.master_seed, replicate);
    arms.iter()
        .map(|&arm| {
            let outcome = cohort
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|c| evaluate_arm(spec, c, arm, &config.cv).map_err(|e| e.to_string()));
            if let Err(e) = &outcome {
                log::warn!("{} / {} / replicate {replicate}: {e}", spec.name, arm.label());
            }
            ReplicateRecord {
                scenario: spec.name.clone(),
                arm,
                replicate,
                outcome,
            }
        })
        .collect()
}

/// Run every scenario × replicate on a pool of `config.workers` threads.
/// Each replicate samples from its own stream and both arms share the cohort,
/// so results do not depend on the worker count.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let specs = config.resolve_scenarios()?;
    let units: Vec<(usize, Vec<Arm>, usize)> = specs
        .iter()
        .enumerate()
        .flat_map(|(s, spec)| {
            let arms = config.arms.for_scenario(spec);
            (0..config.replicates).map(move |r| (s, arms.clone(), r))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut records: Vec<(usize, ReplicateRecord)> = pool.install(|| {
        units
            .par_iter()
            .flat_map_iter(|(s, arms, r)| run_unit(&specs[*s], arms, *r, config).into_iter().map(move |rec| (*s, rec)))
            .collect()
    });
    records.sort_by(|(sa, a), (sb, b)| (sa, a.arm, a.replicate).cmp(&(sb, b.arm, b.replicate)));
    let records: Vec<ReplicateRecord> = records.into_iter().map(|(_, r)| r).collect();

    let mut summaries = Vec::new();
    for spec in &specs {
        for arm in config.arms.for_scenario(spec) {
            let summary = CellSummary::from_records(&spec.name, arm, records.iter().filter(|r| r.scenario == spec.name && r.arm == arm));
            if summary.succeeded == 0 {
                let message = records
                    .iter()
                    .find_map(|r| match (&r.outcome, r.scenario == spec.name && r.arm == arm) {
                        (Err(e), true) => Some(e.clone()),
                        _ => None,
                    })
                    .unwrap_or_default();
                return Err(Error::CellFailed {
                    scenario: spec.name.clone(),
                    arm: arm.label().into(),
                    message,
                });
            }
            summaries.push(summary);
        }
    }
    Ok(StudyResult { records, summaries })
}
