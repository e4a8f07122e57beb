use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{scenario_by_name, ScenarioSpec};
use crate::error::{Error, Result};
use crate::glm::CvOptions;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NUINDEX_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "nuindex-out";

/// `$NUINDEX_OUT_DIR`, or `nuindex-out` in the working directory.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map_or_else(|| PathBuf::from(FALLBACK_OUT_DIR), PathBuf::from)
}

/// How a replicate is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Balancing,
    Unadjusted,
}

impl Arm {
    pub fn label(self) -> &'static str {
        match self {
            Arm::Balancing => "balancing",
            Arm::Unadjusted => "unadjusted",
        }
    }
}

/// Which arms a study runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arms {
    Unadjusted,
    Balancing,
    /// Both arms for scenarios with a confounder, unadjusted otherwise.
    #[default]
    Both,
}

impl Arms {
    pub fn for_scenario(self, spec: &ScenarioSpec) -> Vec<Arm> {
        match self {
            Arms::Unadjusted => vec![Arm::Unadjusted],
            Arms::Balancing => vec![Arm::Balancing],
            Arms::Both if spec.confounder.is_some() => vec![Arm::Balancing, Arm::Unadjusted],
            Arms::Both => vec![Arm::Unadjusted],
        }
    }
}

impl std::str::FromStr for Arms {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unadjusted" => Ok(Self::Unadjusted),
            "balancing" => Ok(Self::Balancing),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!("unknown arms `{s}` (unadjusted, balancing, both)"))),
        }
    }
}

pub const DEFAULT_REPLICATES: usize = 100;

/// A replicated simulation study. Deserialized from TOML:
///
/// ```toml
/// scenarios = ["medium_uncorrelated", "medium_group_sparse"]
/// replicates = 100
/// n = 10000            # optional; overrides every scenario's n
/// master_seed = 2024
/// arms = "both"        # unadjusted | balancing | both
/// workers = 0          # 0 = one per available core
///
/// [cv]
/// folds = 10
/// loss = "deviance"
///
/// [[scenario]]         # optional inline scenarios, same keys as the catalog
/// name = "custom"
/// # ...
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub scenarios: Vec<String>,
    #[serde(rename = "scenario")]
    pub inline: Vec<ScenarioSpec>,
    pub replicates: usize,
    pub n: Option<usize>,
    pub master_seed: u64,
    pub arms: Arms,
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    pub cv: CvOptions,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            scenarios: Vec::new(),
            inline: Vec::new(),
            replicates: DEFAULT_REPLICATES,
            n: None,
            master_seed: crate::datagen::DEFAULT_SEED,
            arms: Arms::Both,
            workers: 0,
            out_dir: None,
            cv: CvOptions::default(),
        }
    }
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("study config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.n == Some(0) {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.cv.folds < 2 {
            return Err(Error::Config("cv.folds must be at least 2".into()));
        }
        self.resolve_scenarios().map(|_| ())
    }

    /// Named then inline scenarios, with the `n` override applied.
    pub fn resolve_scenarios(&self) -> Result<Vec<ScenarioSpec>> {
        let mut specs = self
            .scenarios
            .iter()
            .map(|name| scenario_by_name(name))
            .collect::<Result<Vec<_>>>()?;
        specs.extend(self.inline.iter().cloned());
        if specs.is_empty() {
            return Err(Error::Config("study lists no scenarios".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &mut specs {
            if !seen.insert(s.name.clone()) {
                return Err(Error::Config(format!("scenario `{}` listed twice", s.name)));
            }
            if let Some(n) = self.n {
                s.n = n;
            }
            s.validate()?;
        }
        Ok(specs)
    }
}
