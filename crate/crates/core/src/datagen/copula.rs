//! Clayton copula sampling through its gamma-frailty representation.
//!
//! With `V ~ Gamma(1/rho, 1)` and i.i.d. unit exponentials `E_j`, the vector
//! `U_j = (1 + E_j / V)^(-1/rho)` has uniform margins and the Clayton copula
//! `C(u) = (sum u_j^-rho - d + 1)^(-1/rho)` as its joint distribution.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ClaytonSampler {
    rho: f64,
    frailty: Option<Gamma<f64>>,
}

impl ClaytonSampler {
    /// `rho = 0` gives independent uniforms.
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("copula parameter {rho} must be >= 0")));
        }
        let frailty = if rho > 0.0 {
            Some(Gamma::new(1.0 / rho, 1.0).map_err(|e| Error::Domain(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { rho, frailty })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Fill `out` with one draw of a `out.len()`-dimensional copula vector.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.frailty {
            None => out.iter_mut().for_each(|u| *u = rng.random::<f64>()),
            Some(gamma) => {
                let v = gamma.sample(rng);
                let inv = -1.0 / self.rho;
                for u in out.iter_mut() {
                    let e: f64 = Exp1.sample(rng);
                    *u = (1.0 + e / v).powf(inv);
                }
            }
        }
    }
}

/// One draw of `d` Clayton-dependent uniforms.
pub fn sample_clayton_uniforms<R: Rng + ?Sized>(rho: f64, d: usize, rng: &mut R) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::Domain("copula dimension must be at least 1".into()));
    }
    let sampler = ClaytonSampler::new(rho)?;
    let mut out = vec![0.0; d];
    sampler.fill(rng, &mut out);
    Ok(out)
}
