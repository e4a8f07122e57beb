//! Cohorts (simulated or ingested) and their CSV representation.
//!
//! CSV layout, header required:
//!
//! ```text
//! id,infected,z_<name>...,x_<name>...[,y_latent]
//! ```
//!
//! `infected`, every `x_` column and `y_latent` hold `0` or `1`. `id` is
//! optional on input (row numbers starting at 1 are used when absent). Any
//! number of `z_` columns may be present; the stratum of an individual is the
//! cross-classification of all of them. `y_latent` is written only for
//! simulated cohorts whose latent status is known.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;

pub const ID_COLUMN: &str = "id";
pub const INFECTED_COLUMN: &str = "infected";
pub const LATENT_COLUMN: &str = "y_latent";
pub const FEATURE_PREFIX: &str = "x_";
pub const STRATUM_PREFIX: &str = "z_";

/// Raw values of one stratifying covariate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumColumn {
    pub name: String,
    pub values: Vec<String>,
}

/// Cross-classified stratum membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strata {
    /// Stratum index per individual.
    pub labels: Vec<usize>,
    /// Display name per stratum index.
    pub names: Vec<String>,
}

impl Strata {
    /// Cross-classify the given columns. Strata are numbered in lexicographic
    /// order of their value tuples, so numbering does not depend on row order.
    pub fn cross_classify(columns: &[StratumColumn]) -> Option<Self> {
        let n = columns.first()?.values.len();
        let keys: Vec<Vec<&str>> = (0..n)
            .map(|i| columns.iter().map(|c| c.values[i].as_str()).collect())
            .collect();
        let mut levels: BTreeMap<&[&str], usize> = BTreeMap::new();
        for k in &keys {
            levels.entry(k.as_slice()).or_insert(0);
        }
        let mut names = Vec::with_capacity(levels.len());
        for (idx, (key, slot)) in levels.iter_mut().enumerate() {
            *slot = idx;
            names.push(
                columns
                    .iter()
                    .zip(key.iter())
                    .map(|(c, v)| format!("{}={v}", c.name))
                    .collect::<Vec<_>>()
                    .join("|"),
            );
        }
        let labels = keys.iter().map(|k| levels[k.as_slice()]).collect();
        Some(Self { labels, names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub ids: Vec<String>,
    pub infected: Vec<bool>,
    pub features: BinaryMatrix,
    pub feature_names: Vec<String>,
    pub stratum_columns: Vec<StratumColumn>,
    pub strata: Option<Strata>,
    /// Latent condition status; known only for simulated cohorts.
    pub latent: Option<Vec<bool>>,
}

impl Cohort {
    /// Cohort with default ids (`1..=n`) and feature names (`x_1..x_K`).
    pub fn new(infected: Vec<bool>, features: BinaryMatrix) -> Result<Self> {
        let n = infected.len();
        let k = features.ncols();
        let cohort = Self {
            ids: (1..=n).map(|i| i.to_string()).collect(),
            infected,
            features,
            feature_names: (1..=k).map(|j| format!("{FEATURE_PREFIX}{j}")).collect(),
            stratum_columns: Vec::new(),
            strata: None,
            latent: None,
        };
        cohort.validate()?;
        Ok(cohort)
    }

    pub fn with_strata(mut self, columns: Vec<StratumColumn>) -> Result<Self> {
        self.strata = Strata::cross_classify(&columns);
        self.stratum_columns = columns;
        self.validate()?;
        Ok(self)
    }

    pub fn with_latent(mut self, latent: Vec<bool>) -> Result<Self> {
        self.latent = Some(latent);
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.infected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infected.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.infected.len();
        if self.features.nrows() != n || self.ids.len() != n {
            return Err(Error::Dimension(format!(
                "{n} labels, {} feature rows, {} ids",
                self.features.nrows(),
                self.ids.len()
            )));
        }
        if self.feature_names.len() != self.features.ncols() {
            return Err(Error::Dimension("feature name count".into()));
        }
        if self.stratum_columns.iter().any(|c| c.values.len() != n) {
            return Err(Error::Dimension("stratum column length".into()));
        }
        if let Some(latent) = &self.latent {
            if latent.len() != n {
                return Err(Error::Dimension("latent status length".into()));
            }
            if let Some(i) = latent.iter().zip(&self.infected).position(|(&y, &a)| y && !a) {
                return Err(Error::Domain(format!(
                    "individual {} has the latent condition without infection",
                    self.ids[i]
                )));
            }
        }
        Ok(())
    }

    /// Cohort restricted to `idx` (in that order).
    pub fn subset(&self, idx: &[usize]) -> Self {
        let stratum_columns: Vec<StratumColumn> = self
            .stratum_columns
            .iter()
            .map(|c| StratumColumn {
                name: c.name.clone(),
                values: idx.iter().map(|&i| c.values[i].clone()).collect(),
            })
            .collect();
        Self {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            infected: idx.iter().map(|&i| self.infected[i]).collect(),
            features: self.features.select_rows(idx),
            feature_names: self.feature_names.clone(),
            strata: Strata::cross_classify(&stratum_columns),
            stratum_columns,
            latent: self
                .latent
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i]).collect()),
        }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    /// Parse from any reader; `origin` is used in error messages.
    pub fn from_reader<R: std::io::Read>(reader: R, origin: &Path) -> Result<Self> {
        let schema = |message: String| Error::Schema {
            path: origin.to_path_buf(),
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = match rdr.headers() {
            Ok(h) if !h.is_empty() => h.clone(),
            Ok(_) => return Err(Error::EmptyFile(origin.to_path_buf())),
            Err(e) => return Err(e.into()),
        };

        let mut id_col = None;
        let mut infected_col = None;
        let mut latent_col = None;
        let mut feature_cols = Vec::new();
        let mut stratum_cols = Vec::new();
        for (c, name) in headers.iter().enumerate() {
            match name {
                ID_COLUMN => id_col = Some(c),
                INFECTED_COLUMN => infected_col = Some(c),
                LATENT_COLUMN => latent_col = Some(c),
                _ if name.starts_with(FEATURE_PREFIX) => feature_cols.push(c),
                _ if name.starts_with(STRATUM_PREFIX) => stratum_cols.push(c),
                _ => log::warn!("{}: ignoring column `{name}`", origin.display()),
            }
        }
        let infected_col =
            infected_col.ok_or_else(|| schema(format!("missing `{INFECTED_COLUMN}` column")))?;
        if feature_cols.is_empty() {
            return Err(schema(format!("no `{FEATURE_PREFIX}` feature columns")));
        }

        let binary = |v: &str, row: usize, col: usize| -> Result<bool> {
            match v {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(schema(format!(
                    "row {row}, column `{}`: expected 0 or 1, found {v:?}",
                    &headers[col]
                ))),
            }
        };

        let mut ids = Vec::new();
        let mut infected = Vec::new();
        let mut latent = Vec::new();
        let mut flat = Vec::new();
        let mut strata_values: Vec<Vec<String>> = vec![Vec::new(); stratum_cols.len()];
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let row = r + 1;
            ids.push(match id_col {
                Some(c) => record[c].to_string(),
                None => row.to_string(),
            });
            infected.push(binary(&record[infected_col], row, infected_col)?);
            if let Some(c) = latent_col {
                latent.push(binary(&record[c], row, c)?);
            }
            for &c in &feature_cols {
                flat.push(u8::from(binary(&record[c], row, c)?));
            }
            for (s, &c) in stratum_cols.iter().enumerate() {
                strata_values[s].push(record[c].to_string());
            }
        }
        if infected.is_empty() {
            return Err(Error::EmptyFile(origin.to_path_buf()));
        }

        let n = infected.len();
        let features = BinaryMatrix::from_flat(n, feature_cols.len(), flat)?;
        let stratum_columns: Vec<StratumColumn> = stratum_cols
            .iter()
            .zip(strata_values)
            .map(|(&c, values)| StratumColumn {
                name: headers[c].to_string(),
                values,
            })
            .collect();
        let cohort = Self {
            ids,
            infected,
            features,
            feature_names: feature_cols.iter().map(|&c| headers[c].to_string()).collect(),
            strata: Strata::cross_classify(&stratum_columns),
            stratum_columns,
            latent: latent_col.map(|_| latent),
        };
        cohort.validate().map_err(|e| schema(e.to_string()))?;
        Ok(cohort)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(std::io::BufWriter::new(file))
    }

    pub fn to_writer<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![ID_COLUMN.to_string(), INFECTED_COLUMN.to_string()];
        header.extend(self.stratum_columns.iter().map(|c| c.name.clone()));
        header.extend(self.feature_names.iter().cloned());
        if self.latent.is_some() {
            header.push(LATENT_COLUMN.to_string());
        }
        w.write_record(&header)?;
        let bit = |b: bool| if b { "1" } else { "0" };
        let mut record: Vec<&str> = Vec::with_capacity(header.len());
        for i in 0..self.len() {
            record.clear();
            record.push(&self.ids[i]);
            record.push(bit(self.infected[i]));
            for c in &self.stratum_columns {
                record.push(&c.values[i]);
            }
            for &v in self.features.row(i) {
                record.push(bit(v == 1));
            }
            if let Some(latent) = &self.latent {
                record.push(bit(latent[i]));
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}
