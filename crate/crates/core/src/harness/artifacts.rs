//! CSV artifacts of a fitted index: coefficients, CV profile, scores, curves.

use std::path::Path;

use super::format::sig6;
use crate::cohort::{Cohort, ID_COLUMN, INFECTED_COLUMN, LATENT_COLUMN};
use crate::error::{Error, Result};
use crate::glm::LassoFit;
use crate::index::IndexModel;
use crate::metrics::{CvCurves, FoldCurves};
use crate::pipeline::FittedIndex;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// `feature,raw_coefficient,index_weight,selected`.
pub fn write_coefficients(path: &Path, feature_names: &[String], model: &IndexModel) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["feature", "raw_coefficient", "index_weight", "selected"])?;
    for ((name, &raw), &weight) in feature_names.iter().zip(&model.raw_coefficients).zip(&model.weights) {
        w.write_record([
            name.clone(),
            sig6(raw),
            weight.to_string(),
            u8::from(raw != 0.0).to_string(),
        ])?;
    }
    finish(w, path)
}

/// Read a coefficients CSV. Integer weights come from `index_weight` when
/// present, otherwise they are recomputed from `raw_coefficient`.
pub fn read_coefficients(path: &Path) -> Result<(Vec<String>, IndexModel)> {
    let schema = |message: String| Error::Schema {
        path: path.to_path_buf(),
        message,
    };
    let mut r = reader(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let feature = col("feature").ok_or_else(|| schema("missing `feature` column".into()))?;
    let raw = col("raw_coefficient").ok_or_else(|| schema("missing `raw_coefficient` column".into()))?;
    let weight = col("index_weight");
    let mut names = Vec::new();
    let mut raws = Vec::new();
    let mut weights = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        names.push(rec[feature].to_string());
        let value: f64 = rec[raw]
            .parse()
            .map_err(|_| schema(format!("row {row}: `raw_coefficient` {:?} is not a number", &rec[raw])))?;
        raws.push(value);
        weights.push(match weight {
            Some(c) => rec[c]
                .parse()
                .map_err(|_| schema(format!("row {row}: `index_weight` {:?} is not an integer", &rec[c])))?,
            None => crate::index::integer_weight(value),
        });
    }
    if names.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok((
        names,
        IndexModel {
            weights,
            raw_coefficients: raws,
            provenance: None,
        },
    ))
}

/// `lambda,mean_error,se,nonzero_count,selected`.
pub fn write_cv_profile(path: &Path, fit: &LassoFit) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["lambda", "mean_error", "se", "nonzero_count", "selected"])?;
    for l in 0..fit.lambdas.len() {
        w.write_record([
            sig6(fit.lambdas[l]),
            sig6(fit.cv_error[l]),
            sig6(fit.cv_se[l]),
            fit.nonzero[l].to_string(),
            u8::from(l == fit.selected).to_string(),
        ])?;
    }
    finish(w, path)
}

/// Per-individual scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub ids: Vec<String>,
    pub infected: Vec<bool>,
    pub index: Vec<i64>,
    pub symptom_count: Vec<i64>,
    pub latent: Option<Vec<bool>>,
}

impl ScoreTable {
    pub fn new(cohort: &Cohort, index: Vec<i64>) -> Self {
        Self {
            ids: cohort.ids.clone(),
            infected: cohort.infected.clone(),
            index,
            symptom_count: crate::index::symptom_count(&cohort.features),
            latent: cohort.latent.clone(),
        }
    }

    /// `id,infected,index,symptom_count[,y_latent]`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = writer(path)?;
        let mut header = vec![ID_COLUMN, INFECTED_COLUMN, "index", "symptom_count"];
        if self.latent.is_some() {
            header.push(LATENT_COLUMN);
        }
        w.write_record(&header)?;
        for i in 0..self.ids.len() {
            let mut row = vec![
                self.ids[i].clone(),
                u8::from(self.infected[i]).to_string(),
                self.index[i].to_string(),
                self.symptom_count[i].to_string(),
            ];
            if let Some(l) = &self.latent {
                row.push(u8::from(l[i]).to_string());
            }
            w.write_record(&row)?;
        }
        finish(w, path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let schema = |message: String| Error::Schema {
            path: path.to_path_buf(),
            message,
        };
        let mut r = reader(path)?;
        let headers = r.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let need = |name: &str| col(name).ok_or_else(|| schema(format!("missing `{name}` column")));
        let (id, inf, idx, cnt) = (need(ID_COLUMN)?, need(INFECTED_COLUMN)?, need("index")?, need("symptom_count")?);
        let lat = col(LATENT_COLUMN);
        let mut t = Self {
            ids: Vec::new(),
            infected: Vec::new(),
            index: Vec::new(),
            symptom_count: Vec::new(),
            latent: lat.map(|_| Vec::new()),
        };
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 1;
            let flag = |c: usize| match &rec[c] {
                "0" => Ok(false),
                "1" => Ok(true),
                v => Err(schema(format!("row {row}, column `{}`: expected 0 or 1, found {v:?}", &headers[c]))),
            };
            let int = |c: usize| {
                rec[c]
                    .parse::<i64>()
                    .map_err(|_| schema(format!("row {row}, column `{}`: expected an integer", &headers[c])))
            };
            t.ids.push(rec[id].to_string());
            t.infected.push(flag(inf)?);
            t.index.push(int(idx)?);
            t.symptom_count.push(int(cnt)?);
            if let (Some(c), Some(l)) = (lat, t.latent.as_mut()) {
                l.push(flag(c)?);
            }
        }
        if t.ids.is_empty() {
            return Err(Error::EmptyFile(path.to_path_buf()));
        }
        Ok(t)
    }
}

/// `scorer,fold,threshold,rate_infected,rate_uninfected`: one row per point
/// of every held-out fold curve (`fold` = 0, 1, …; sentinel thresholds
/// written as `-Inf`/`Inf`), then the fold average on the infected-rate grid
/// with `fold` = `mean` and an empty threshold.
pub fn write_curves(path: &Path, curves: &CvCurves) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scorer", "fold", "threshold", "rate_infected", "rate_uninfected"])?;
    for (scorer, fc) in [("index", &curves.index), ("symptom_count", &curves.symptom_count)] {
        write_fold_curves(&mut w, scorer, fc)?;
    }
    finish(w, path)
}

fn write_fold_curves(w: &mut csv::Writer<std::fs::File>, scorer: &str, fc: &FoldCurves) -> Result<()> {
    for (f, curve) in fc.folds.iter().enumerate() {
        for p in &curve.points {
            w.write_record([
                scorer.to_string(),
                f.to_string(),
                sig6(p.threshold),
                sig6(p.rate_infected),
                sig6(p.rate_uninfected),
            ])?;
        }
    }
    for (r, u) in fc.grid.iter().zip(&fc.average_uninfected) {
        w.write_record([scorer.to_string(), "mean".into(), String::new(), sig6(*r), sig6(*u)])?;
    }
    Ok(())
}

/// Coefficients CSV of a fitted index.
pub fn write_fitted(path: &Path, cohort: &Cohort, fitted: &FittedIndex) -> Result<()> {
    write_coefficients(path, &cohort.feature_names, &fitted.model)
}
