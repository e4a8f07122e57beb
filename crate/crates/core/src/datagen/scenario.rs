//! Generative scenario configuration and the built-in scenario catalog.
//!
//! Catalog layout (K = 40 features, `beta0 = 0.2` everywhere):
//!
//! * Signal levels `low`, `medium`, `high` raise the base effects to the power
//!   `s` = 1, 1.2, 1.4: features 1-4 have `beta1 = 1.3^s`, 5-8 `1.5^s`,
//!   9-12 `1.7^s`, and 13-40 are null (`beta1 = 1`). `alpha = 0.8`,
//!   `pi = 0.2`.
//! * Correlation settings: `uncorrelated` (`rho = 0`), and two settings with
//!   `rho = 5` over nine groups of sizes 1, 2, 3, 3, 3, 5, 6, 7, 10.
//!   `group_sparse` assigns features to groups in index order, so the twelve
//!   non-null features fill the groups of sizes 1, 2, 3, 3, 3 and every group
//!   is entirely null or entirely non-null. `non_group_sparse` spreads them so every group of size two or
//!   more mixes null and non-null features (see [`NON_GROUP_SPARSE_GROUPS`]).
//! * Confounding scenarios use the medium signal, no feature correlation,
//!   `alpha = 0.7`, `P(Z=1) = 0.55` and a Z/A risk ratio of 1.7 (`positive`)
//!   or 0.65 (`negative`). Twelve features carry Z/X risk ratios evenly
//!   spaced from 1.35 to 2.0 in index order: features 1-12 (`overlap`),
//!   features 13-24 (`nonoverlap`), or no feature at all (`none`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theory::solve_conditional_from_marginal;

pub const DEFAULT_N: usize = 10_000;
pub const DEFAULT_SEED: u64 = 2024;

/// Binary confounder acting on infection and on selected features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfounderSpec {
    pub pz: f64,
    pub rr_az: f64,
    /// Per-feature Z/X risk ratio; 1 for features unrelated to Z.
    pub rr_xz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub n: usize,
    pub alpha: f64,
    pub pi: f64,
    pub beta0: Vec<f64>,
    pub beta1: Vec<f64>,
    /// Partition of the 1-based feature indices `1..=K`.
    pub groups: Vec<Vec<usize>>,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confounder: Option<ConfounderSpec>,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn n_features(&self) -> usize {
        self.beta0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.beta0.len();
        let bad = |m: String| Err(Error::Config(format!("scenario `{}`: {m}", self.name)));
        if self.n == 0 || k == 0 {
            return bad("n and the feature count must be positive".into());
        }
        if self.beta1.len() != k {
            return bad(format!("{} beta1 values for {k} features", self.beta1.len()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if !(self.pi >= 0.0 && self.pi < 1.0) {
            return bad(format!("pi = {} must lie in [0, 1)", self.pi));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return bad(format!("rho = {} must be >= 0", self.rho));
        }
        for (j, (&b0, &b1)) in self.beta0.iter().zip(&self.beta1).enumerate() {
            if !(b0 > 0.0 && b0 < 1.0 && b1 > 0.0 && b0 * b1 <= 1.0) {
                return bad(format!("feature {}: beta0 = {b0}, beta1 = {b1} inadmissible", j + 1));
            }
        }
        let mut seen = vec![false; k];
        for g in &self.groups {
            if g.is_empty() {
                return bad("empty group".into());
            }
            for &f in g {
                if f == 0 || f > k || seen[f - 1] {
                    return bad(format!("groups do not partition 1..={k} (feature {f})"));
                }
                seen[f - 1] = true;
            }
        }
        if let Some(miss) = seen.iter().position(|s| !s) {
            return bad(format!("feature {} is in no group", miss + 1));
        }
        if let Some(c) = &self.confounder {
            if c.rr_xz.len() != k {
                return bad(format!("{} rr_xz values for {k} features", c.rr_xz.len()));
            }
            self.baselines()?;
            solve_conditional_from_marginal(self.alpha, c.pz, c.rr_az)
                .map_err(|e| Error::Infeasible(format!("scenario `{}`: {e}", self.name)))?;
        }
        Ok(())
    }

    /// Per-feature baseline prevalence `[b(Z=0), b(Z=1)]`.
    pub fn baselines(&self) -> Result<Vec<[f64; 2]>> {
        let mut out = Vec::with_capacity(self.beta0.len());
        for (j, (&b0, &b1)) in self.beta0.iter().zip(&self.beta1).enumerate() {
            let pair = match &self.confounder {
                None => [b0, b0],
                Some(c) => {
                    let (p0, p1) = solve_conditional_from_marginal(b0, c.pz, c.rr_xz[j])
                        .map_err(|e| Error::Infeasible(format!("feature {}: {e}", j + 1)))?;
                    [p0, p1]
                }
            };
            if pair.iter().any(|b| b * b1 > 1.0) {
                return Err(Error::Infeasible(format!(
                    "scenario `{}`, feature {}: P(X=1 | Y=1, Z) exceeds 1",
                    self.name,
                    j + 1
                )));
            }
            out.push(pair);
        }
        Ok(out)
    }

    /// Indices (0-based) of features with a non-null latent effect.
    pub fn non_null_features(&self) -> Vec<usize> {
        (0..self.beta1.len()).filter(|&j| self.beta1[j] != 1.0).collect()
    }
}

pub const FEATURES: usize = 40;
pub const GROUP_SIZES: [usize; 9] = [1, 2, 3, 3, 3, 5, 6, 7, 10];

/// Groups for the correlated, non-group-sparse setting. Non-null features
/// (1-12) are spread over the groups; every group of size >= 2 is mixed.
pub const NON_GROUP_SPARSE_GROUPS: [&[usize]; 9] = [
    &[13],
    &[1, 14],
    &[2, 15, 16],
    &[3, 17, 18],
    &[4, 19, 20],
    &[5, 6, 21, 22, 23],
    &[7, 8, 24, 25, 26, 27],
    &[9, 10, 28, 29, 30, 31, 32],
    &[11, 12, 33, 34, 35, 36, 37, 38, 39, 40],
];

/// Groups for the group-sparse setting: features in index order, so the
/// first five groups hold exactly the non-null features 1-12.
pub const GROUP_SPARSE_GROUPS: [&[usize]; 9] = [
    &[1],
    &[2, 3],
    &[4, 5, 6],
    &[7, 8, 9],
    &[10, 11, 12],
    &[13, 14, 15, 16, 17],
    &[18, 19, 20, 21, 22, 23],
    &[24, 25, 26, 27, 28, 29, 30],
    &[31, 32, 33, 34, 35, 36, 37, 38, 39, 40],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Low,
    Medium,
    High,
}

impl Signal {
    pub fn exponent(self) -> f64 {
        match self {
            Signal::Low => 1.0,
            Signal::Medium => 1.2,
            Signal::High => 1.4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Signal::Low => "low",
            Signal::Medium => "medium",
            Signal::High => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    Uncorrelated,
    NonGroupSparse,
    GroupSparse,
}

impl Correlation {
    pub fn label(self) -> &'static str {
        match self {
            Correlation::Uncorrelated => "uncorrelated",
            Correlation::NonGroupSparse => "non_group_sparse",
            Correlation::GroupSparse => "group_sparse",
        }
    }
}

/// Latent risk ratios for the twelve-signal pattern at a given signal level.
pub fn signal_beta1(signal: Signal) -> Vec<f64> {
    let s = signal.exponent();
    (1..=FEATURES)
        .map(|k| match k {
            1..=4 => 1.3f64.powf(s),
            5..=8 => 1.5f64.powf(s),
            9..=12 => 1.7f64.powf(s),
            _ => 1.0,
        })
        .collect()
}

fn sequential_groups() -> Vec<Vec<usize>> {
    let mut next = 1;
    GROUP_SIZES
        .iter()
        .map(|&size| {
            let g: Vec<usize> = (next..next + size).collect();
            next += size;
            g
        })
        .collect()
}

fn to_groups(groups: &[&[usize]]) -> Vec<Vec<usize>> {
    groups.iter().map(|g| g.to_vec()).collect()
}

pub fn main_scenario(signal: Signal, correlation: Correlation) -> ScenarioSpec {
    let (groups, rho) = match correlation {
        Correlation::Uncorrelated => (sequential_groups(), 0.0),
        Correlation::NonGroupSparse => (to_groups(&NON_GROUP_SPARSE_GROUPS), 5.0),
        Correlation::GroupSparse => (to_groups(&GROUP_SPARSE_GROUPS), 5.0),
    };
    ScenarioSpec {
        name: format!("{}_{}", signal.label(), correlation.label()),
        n: DEFAULT_N,
        alpha: 0.8,
        pi: 0.2,
        beta0: vec![0.2; FEATURES],
        beta1: signal_beta1(signal),
        groups,
        rho,
        confounder: None,
        seed: DEFAULT_SEED,
    }
}

/// All-null scenario: no feature is related to the latent condition.
pub fn null_scenario() -> ScenarioSpec {
    let mut spec = main_scenario(Signal::Medium, Correlation::Uncorrelated);
    spec.name = "null_uncorrelated".into();
    spec.beta1 = vec![1.0; FEATURES];
    spec
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZxAssociation {
    None,
    NonOverlapping,
    Overlapping,
}

/// Z/X risk ratios assigned to the Z-associated features, ascending.
pub fn zx_risk_ratios() -> Vec<f64> {
    (0..12).map(|i| 1.35 + 0.65 * i as f64 / 11.0).collect()
}

pub fn confounding_scenario(zx: ZxAssociation, positive_za: bool) -> ScenarioSpec {
    let mut rr_xz = vec![1.0; FEATURES];
    let first = match zx {
        ZxAssociation::None => None,
        ZxAssociation::Overlapping => Some(0),
        ZxAssociation::NonOverlapping => Some(12),
    };
    if let Some(first) = first {
        rr_xz[first..first + 12].copy_from_slice(&zx_risk_ratios());
    }
    let zx_label = match zx {
        ZxAssociation::None => "none",
        ZxAssociation::NonOverlapping => "nonoverlap",
        ZxAssociation::Overlapping => "overlap",
    };
    let za_label = if positive_za { "positive" } else { "negative" };
    ScenarioSpec {
        name: format!("confound_{zx_label}_{za_label}"),
        n: DEFAULT_N,
        alpha: 0.7,
        pi: 0.2,
        beta0: vec![0.2; FEATURES],
        beta1: signal_beta1(Signal::Medium),
        groups: sequential_groups(),
        rho: 0.0,
        confounder: Some(ConfounderSpec {
            pz: 0.55,
            rr_az: if positive_za { 1.7 } else { 0.65 },
            rr_xz,
        }),
        seed: DEFAULT_SEED,
    }
}

/// The nine main scenarios followed by the six confounding scenarios.
pub fn builtin_scenarios() -> Vec<ScenarioSpec> {
    let mut out = Vec::with_capacity(15);
    for signal in [Signal::Low, Signal::Medium, Signal::High] {
        for corr in [
            Correlation::Uncorrelated,
            Correlation::NonGroupSparse,
            Correlation::GroupSparse,
        ] {
            out.push(main_scenario(signal, corr));
        }
    }
    for zx in [
        ZxAssociation::None,
        ZxAssociation::NonOverlapping,
        ZxAssociation::Overlapping,
    ] {
        for positive in [true, false] {
            out.push(confounding_scenario(zx, positive));
        }
    }
    out
}

/// Look up a catalog scenario (including `null_uncorrelated`) by name.
pub fn scenario_by_name(name: &str) -> Result<ScenarioSpec> {
    if name == "null_uncorrelated" {
        return Ok(null_scenario());
    }
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario `{name}`")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioSpec>,
}

/// Catalog as TOML (`[[scenario]]` tables).
pub fn catalog_toml(scenarios: &[ScenarioSpec]) -> String {
    toml::to_string(&Catalog {
        scenarios: scenarios.to_vec(),
    })
    .expect("scenario specs serialize")
}

pub fn parse_catalog(text: &str) -> Result<Vec<ScenarioSpec>> {
    let cat: Catalog = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for s in &cat.scenarios {
        s.validate()?;
    }
    Ok(cat.scenarios)
}
