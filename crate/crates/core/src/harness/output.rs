//! CSV renderings of study results.

use std::path::{Path, PathBuf};

use super::config::Arm;
use super::format::sig6;
use super::study::{CellSummary, ReplicateRecord, StudyResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableStyle {
    /// One row per scenario × arm.
    Main,
    /// One row per scenario with balancing/unadjusted column pairs.
    Confounding,
}

impl std::str::FromStr for TableStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Self::Main),
            "confounding" => Ok(Self::Confounding),
            _ => Err(Error::Config(format!("unknown table style `{s}` (main, confounding)"))),
        }
    }
}

const SUMMARY_COLUMNS: [&str; 9] = [
    "selected_median",
    "selected_q1",
    "selected_q3",
    "tpr_mean",
    "tpr_sd",
    "tnr_mean",
    "tnr_sd",
    "tau_mean",
    "tau_sd",
];

fn summary_values(s: &CellSummary) -> [f64; 9] {
    [
        s.selected_median,
        s.selected_q1,
        s.selected_q3,
        s.tpr_mean,
        s.tpr_sd,
        s.tnr_mean,
        s.tnr_sd,
        s.tau_mean,
        s.tau_sd,
    ]
}

fn to_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Selection summary table.
///
/// Main style columns: `scenario,arm,selected_median,selected_q1,selected_q3,
/// tpr_mean,tpr_sd,tnr_mean,tnr_sd,tau_mean,tau_sd`. Confounding style:
/// `scenario` followed by each summary column suffixed `_balancing` and
/// `_unadjusted`; a missing arm leaves its cells `NA`.
pub fn emit_table(result: &StudyResult, style: TableStyle) -> String {
    match style {
        TableStyle::Main => {
            let mut header = vec!["scenario".to_string(), "arm".to_string()];
            header.extend(SUMMARY_COLUMNS.iter().map(|c| c.to_string()));
            let rows = result
                .summaries
                .iter()
                .map(|s| {
                    let mut row = vec![s.scenario.clone(), s.arm.label().to_string()];
                    row.extend(summary_values(s).iter().map(|&v| sig6(v)));
                    row
                })
                .collect();
            to_csv(header, rows)
        }
        TableStyle::Confounding => {
            let arms = [Arm::Balancing, Arm::Unadjusted];
            let mut header = vec!["scenario".to_string()];
            for c in SUMMARY_COLUMNS {
                for arm in arms {
                    header.push(format!("{c}_{}", arm.label()));
                }
            }
            let mut scenarios: Vec<&str> = Vec::new();
            for s in &result.summaries {
                if !scenarios.contains(&s.scenario.as_str()) {
                    scenarios.push(&s.scenario);
                }
            }
            let rows = scenarios
                .into_iter()
                .map(|name| {
                    let values: Vec<[f64; 9]> = arms
                        .iter()
                        .map(|&arm| result.summary(name, arm).map_or([f64::NAN; 9], summary_values))
                        .collect();
                    let mut row = vec![name.to_string()];
                    for c in 0..SUMMARY_COLUMNS.len() {
                        row.extend(values.iter().map(|v| sig6(v[c])));
                    }
                    row
                })
                .collect();
            to_csv(header, rows)
        }
    }
}

/// Long-format discrimination records:
/// `scenario,arm,scorer,replicate,auc,aucpr,wilcoxon_z` with scorer
/// `index` or `symptom_count`. Failed replicates are omitted.
pub fn emit_discrimination(result: &StudyResult) -> String {
    let header = ["scenario", "arm", "scorer", "replicate", "auc", "aucpr", "wilcoxon_z"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for r in &result.records {
        if let Ok(m) = &r.outcome {
            for (scorer, d) in [("index", &m.index), ("symptom_count", &m.symptom_count)] {
                rows.push(vec![
                    r.scenario.clone(),
                    r.arm.label().to_string(),
                    scorer.to_string(),
                    r.replicate.to_string(),
                    sig6(d.auc),
                    sig6(d.aucpr),
                    sig6(d.wilcoxon_z),
                ]);
            }
        }
    }
    to_csv(header, rows)
}

/// Per-replicate records:
/// `scenario,arm,replicate,status,n_selected,tpr,tnr,tau,lambda,error`.
pub fn emit_records(records: &[ReplicateRecord]) -> String {
    let header = [
        "scenario", "arm", "replicate", "status", "n_selected", "tpr", "tnr", "tau", "lambda", "error",
    ]
    .map(String::from)
    .to_vec();
    let opt = |v: Option<f64>| sig6(v.unwrap_or(f64::NAN));
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![r.scenario.clone(), r.arm.label().to_string(), r.replicate.to_string()];
            match &r.outcome {
                Ok(m) => row.extend([
                    "ok".to_string(),
                    m.selection.n_selected.to_string(),
                    opt(m.selection.tpr),
                    opt(m.selection.tnr),
                    opt(m.selection.kendall_tau),
                    sig6(m.lambda),
                    String::new(),
                ]),
                Err(e) => {
                    row.push("failed".to_string());
                    row.extend(std::iter::repeat_n("NA".to_string(), 5));
                    row.push(e.clone());
                }
            }
            row
        })
        .collect();
    to_csv(header, rows)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Write `records.csv`, `selection.csv` (main style), `selection_confounding.csv`
/// (only when some scenario has a balancing arm) and `discrimination.csv`.
pub fn write_study(result: &StudyResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![
        write_file(&dir.join("records.csv"), &emit_records(&result.records))?,
        write_file(&dir.join("selection.csv"), &emit_table(result, TableStyle::Main))?,
    ];
    if result.summaries.iter().any(|s| s.arm == Arm::Balancing) {
        written.push(write_file(
            &dir.join("selection_confounding.csv"),
            &emit_table(result, TableStyle::Confounding),
        )?);
    }
    written.push(write_file(&dir.join("discrimination.csv"), &emit_discrimination(result))?);
    Ok(written)
}
