//! Synthetic cohorts under the latent-condition feature model.
//!
//! Per individual: `Z ~ Bernoulli(pz)` when a confounder is configured;
//! `A | Z` with `P(A=1 | Z=z)` solved from the marginal infection rate and the
//! Z/A risk ratio; `Y = 0` when `A = 0`, otherwise `Y ~ Bernoulli(pi)`. Within
//! each feature group a Clayton copula vector `U` is drawn and
//! `X_k = 1{U_k > 1 - P(X_k=1 | Y, Z)}`, which keeps every conditional margin
//! exact while coupling features of the same group.

mod copula;
mod scenario;

use rand::Rng;

pub use copula::{sample_clayton_uniforms, ClaytonSampler};
pub use scenario::*;

use crate::cohort::{Cohort, StratumColumn};
use crate::error::Result;
use crate::matrix::BinaryMatrix;
use crate::rng::{self, StreamRng};
use crate::theory::solve_conditional_from_marginal;

pub const CONFOUNDER_COLUMN: &str = "z_1";

/// Sample a cohort using the scenario's own seed.
pub fn sample_cohort(spec: &ScenarioSpec) -> Result<Cohort> {
    let mut r = rng::stream(spec.seed, 0);
    sample_cohort_with(spec, &mut r)
}

/// Sample `spec.n` individuals from an explicit stream.
pub fn sample_cohort_with(spec: &ScenarioSpec, rng: &mut StreamRng) -> Result<Cohort> {
    spec.validate()?;
    let n = spec.n;
    let k = spec.n_features();
    let baselines = spec.baselines()?;
    // prevalence[j][z][y]
    let prevalence: Vec<[[f64; 2]; 2]> = baselines
        .iter()
        .zip(&spec.beta1)
        .map(|(b, &b1)| [[b[0], b[0] * b1], [b[1], b[1] * b1]])
        .collect();
    let (pz, p_infected) = match &spec.confounder {
        None => (0.0, [spec.alpha, spec.alpha]),
        Some(c) => {
            let (p0, p1) = solve_conditional_from_marginal(spec.alpha, c.pz, c.rr_az)?;
            (c.pz, [p0, p1])
        }
    };
    let groups: Vec<Vec<usize>> = spec
        .groups
        .iter()
        .map(|g| g.iter().map(|&f| f - 1).collect())
        .collect();
    let sampler = ClaytonSampler::new(spec.rho)?;
    let max_group = groups.iter().map(Vec::len).max().unwrap_or(0);
    let mut u = vec![0.0; max_group];

    let mut infected = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    let mut z_values = Vec::with_capacity(n);
    let mut x = BinaryMatrix::zeros(n, k);
    for i in 0..n {
        let z = usize::from(spec.confounder.is_some() && rng.random::<f64>() < pz);
        let a = rng.random::<f64>() < p_infected[z];
        let y = a && rng.random::<f64>() < spec.pi;
        for g in &groups {
            let u = &mut u[..g.len()];
            sampler.fill(rng, u);
            for (&j, &uj) in g.iter().zip(u.iter()) {
                x.set(i, j, uj > 1.0 - prevalence[j][z][usize::from(y)]);
            }
        }
        infected.push(a);
        latent.push(y);
        z_values.push(z);
    }

    let mut cohort = Cohort::new(infected, x)?.with_latent(latent)?;
    if spec.confounder.is_some() {
        cohort = cohort.with_strata(vec![StratumColumn {
            name: CONFOUNDER_COLUMN.to_string(),
            values: z_values.iter().map(|z| z.to_string()).collect(),
        }])?;
    }
    Ok(cohort)
}
