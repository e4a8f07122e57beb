//! Exact single-feature identities linking the latent risk ratio of a feature
//! to the odds ratio between infection and the feature.
//!
//! Notation used throughout: `alpha = P(A=1)`, `pi = P(Y=1 | A=1)`,
//! `beta0 = P(X=1 | Y=0)`, `beta1 = P(X=1 | Y=1) / P(X=1 | Y=0)`. Nobody
//! without infection has the latent condition (`P(Y=1 | A=0) = 0`) and X
//! depends on A only through Y (and, with a confounder, Z).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `beta0 * beta1 <= 1` for values computed in floating point.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Distances from the null closer than this are treated as equal.
pub const EQUAL_DISTANCE_TOL: f64 = 1e-12;

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must lie in (0, 1)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    alpha: f64,
    pi: f64,
    beta0: f64,
    beta1: f64,
}

impl TheoryPoint {
    pub fn new(alpha: f64, pi: f64, beta0: f64, beta1: f64) -> Result<Self> {
        open_unit("alpha", alpha)?;
        open_unit("pi", pi)?;
        open_unit("beta0", beta0)?;
        if !(beta1 > 0.0 && beta0 * beta1 <= 1.0 + BOUNDARY_SLACK) {
            return Err(Error::Domain(format!(
                "beta1 = {beta1} must lie in (0, 1/beta0] = (0, {}]",
                1.0 / beta0
            )));
        }
        Ok(Self {
            alpha,
            pi,
            beta0,
            beta1,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn pi(&self) -> f64 {
        self.pi
    }
    pub fn beta0(&self) -> f64 {
        self.beta0
    }
    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.pi, self.beta0, self.beta1)
    }

    pub fn with_beta1(self, beta1: f64) -> Result<Self> {
        Self::new(self.alpha, self.pi, self.beta0, beta1)
    }
}

/// Closed-form odds ratio between infection and the feature. Free of `alpha`.
pub fn or_closed_form(pt: &TheoryPoint) -> f64 {
    let shift = pt.pi * (1.0 - pt.beta1);
    1.0 - shift / (pt.beta0 * shift + (1.0 - pt.beta0))
}

/// `P(A=1 | X=x)` at infection prevalence `alpha`.
pub fn theta_x(pt: &TheoryPoint, alpha: f64, x: bool) -> Result<f64> {
    open_unit("alpha", alpha)?;
    let (pi, b0, b1) = (pt.pi, pt.beta0, pt.beta1);
    Ok(if x {
        (b1 + (1.0 - pi) / pi) / (b1 + (1.0 - alpha * pi) / (alpha * pi))
    } else {
        let absent_latent = (1.0 - b0 * b1) * pi;
        (absent_latent + (1.0 - b0) * (1.0 - pi)) / (absent_latent + (1.0 - b0) * (1.0 / alpha - pi))
    })
}

pub fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

/// Odds ratio obtained from `theta_x` at the point's own `alpha`.
pub fn or_from_thetas(pt: &TheoryPoint) -> f64 {
    let t1 = theta_x(pt, pt.alpha, true).expect("alpha validated");
    let t0 = theta_x(pt, pt.alpha, false).expect("alpha validated");
    odds(t1) / odds(t0)
}

/// The risk ratio at which the odds ratio and the risk ratio coincide.
pub fn phi_threshold(pi: f64, beta0: f64) -> Result<f64> {
    open_unit("pi", pi)?;
    open_unit("beta0", beta0)?;
    Ok(((1.0 - pi) / pi) * ((1.0 - beta0) / beta0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeRelation {
    /// `|OR - 1| > |beta1 - 1|`
    OrFarther,
    Equal,
    /// `|OR - 1| < |beta1 - 1|`: the odds ratio is attenuated toward the null.
    OrCloser,
}

pub fn magnitude_relation(pt: &TheoryPoint) -> MagnitudeRelation {
    let d_rr = (pt.beta1 - 1.0).abs();
    let d_or = (or_closed_form(pt) - 1.0).abs();
    if (d_rr - d_or).abs() <= EQUAL_DISTANCE_TOL {
        MagnitudeRelation::Equal
    } else if d_or > d_rr {
        MagnitudeRelation::OrFarther
    } else {
        MagnitudeRelation::OrCloser
    }
}

/// True when `beta0 < 1 - pi / (1 - pi)`: the odds ratio is closer to 1 than
/// the risk ratio for every admissible `beta1`.
pub fn null_attenuation_region(pi: f64, beta0: f64) -> Result<bool> {
    open_unit("pi", pi)?;
    open_unit("beta0", beta0)?;
    Ok(beta0 < 1.0 - pi / (1.0 - pi))
}

/// A binary confounder Z with `P(Z=1) = pz` and marginal risk ratios of A and
/// of X between `Z=1` and `Z=0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfounderDesign {
    pub pz: f64,
    pub rr_az: f64,
    pub rr_xz: f64,
}

impl ConfounderDesign {
    pub const NONE: ConfounderDesign = ConfounderDesign {
        pz: 0.5,
        rr_az: 1.0,
        rr_xz: 1.0,
    };
}

/// Solve `p1 = rr * p0` and `(1 - pz) p0 + pz p1 = marginal`.
pub fn solve_conditional_from_marginal(marginal: f64, pz: f64, rr: f64) -> Result<(f64, f64)> {
    open_unit("marginal", marginal)?;
    open_unit("pz", pz)?;
    if !(rr > 0.0 && rr.is_finite()) {
        return Err(Error::Domain(format!("risk ratio {rr} must be positive")));
    }
    let p0 = marginal / ((1.0 - pz) + pz * rr);
    let p1 = rr * p0;
    for (z, p) in [(0, p0), (1, p1)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Infeasible(format!(
                "P(.|Z={z}) = {p} for marginal {marginal}, pz {pz}, rr {rr}"
            )));
        }
    }
    Ok((p0, p1))
}

/// Exact joint distribution of `(Z, Y, A, X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTable {
    cells: [f64; 16],
}

#[inline]
fn cell(z: usize, y: usize, a: usize, x: usize) -> usize {
    ((z * 2 + y) * 2 + a) * 2 + x
}

impl JointTable {
    pub fn from_cells(cells: [f64; 16]) -> Result<Self> {
        if cells.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Domain("negative or NaN joint cell".into()));
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("joint cells sum to {total}")));
        }
        Ok(Self { cells })
    }

    /// `P(Z=z, Y=y, A=a, X=x)`.
    pub fn p(&self, z: usize, y: usize, a: usize, x: usize) -> f64 {
        self.cells[cell(z, y, a, x)]
    }

    pub fn cells(&self) -> &[f64; 16] {
        &self.cells
    }

    /// Marginal over the cells matching the filter.
    pub fn marginal(&self, mut keep: impl FnMut(usize, usize, usize, usize) -> bool) -> f64 {
        let mut s = 0.0;
        for z in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for x in 0..2 {
                        if keep(z, y, a, x) {
                            s += self.p(z, y, a, x);
                        }
                    }
                }
            }
        }
        s
    }

    /// `P(A=a, X=x, Z=z)`.
    pub fn p_axz(&self, a: usize, x: usize, z: usize) -> f64 {
        self.p(z, 0, a, x) + self.p(z, 1, a, x)
    }

    /// `P(A=a, Z=z)`.
    pub fn p_az(&self, a: usize, z: usize) -> f64 {
        self.p_axz(a, 0, z) + self.p_axz(a, 1, z)
    }
}

/// Build the exact joint table under a binary confounder. The feature baseline
/// `b(z)` satisfies `b(1) = rr_xz * b(0)` and `E_Z[b(Z)] = beta0`, so the
/// marginal baseline stays at `beta0`; `P(X=1 | Y=y, Z=z) = b(z) * beta1^y`.
pub fn build_confounded_joint(
    alpha: f64,
    pi: f64,
    beta0: f64,
    beta1: f64,
    design: &ConfounderDesign,
) -> Result<JointTable> {
    open_unit("pi", pi)?;
    if !(beta1 > 0.0) {
        return Err(Error::Domain(format!("beta1 = {beta1} must be positive")));
    }
    let pa = solve_conditional_from_marginal(alpha, design.pz, design.rr_az)?;
    let base = solve_conditional_from_marginal(beta0, design.pz, design.rr_xz)?;
    let pa = [pa.0, pa.1];
    let base = [base.0, base.1];
    for (z, b) in base.iter().enumerate() {
        if b * beta1 > 1.0 + BOUNDARY_SLACK {
            return Err(Error::Infeasible(format!(
                "P(X=1 | Y=1, Z={z}) = {} exceeds 1",
                b * beta1
            )));
        }
    }
    let pz = [1.0 - design.pz, design.pz];
    let mut cells = [0.0; 16];
    for z in 0..2 {
        for a in 0..2 {
            let p_a = if a == 1 { pa[z] } else { 1.0 - pa[z] };
            for y in 0..2 {
                let p_y = match (a, y) {
                    (0, 0) => 1.0,
                    (0, _) => 0.0,
                    (_, 1) => pi,
                    _ => 1.0 - pi,
                };
                let px1 = (base[z] * if y == 1 { beta1 } else { 1.0 }).min(1.0);
                for x in 0..2 {
                    let p_x = if x == 1 { px1 } else { 1.0 - px1 };
                    cells[cell(z, y, a, x)] = pz[z] * p_a * p_y * p_x;
                }
            }
        }
    }
    JointTable::from_cells(cells)
}

fn checked_or(t1: f64, t0: f64, what: &str) -> Result<f64> {
    for t in [t1, t0] {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::DegenerateMargin(format!(
                "{what}: P(A=1 | X=x) = {t} is not in (0, 1)"
            )));
        }
    }
    Ok(odds(t1) / odds(t0))
}

/// Odds ratio between A and X in the population (`weighted = false`) or in
/// the pseudopopulation reweighted by `w(a, z) = P(A=1|Z=z) / P(A=a|Z=z)`.
pub fn or_from_joint(jt: &JointTable, weighted: bool) -> Result<f64> {
    let weight = |a: usize, z: usize| -> Result<f64> {
        if !weighted {
            return Ok(1.0);
        }
        let (p1, p0) = (jt.p_az(1, z), jt.p_az(0, z));
        if p1 + p0 == 0.0 {
            return Ok(0.0);
        }
        if p1 <= 0.0 || p0 <= 0.0 {
            return Err(Error::DegenerateMargin(format!(
                "stratum Z={z} lacks infected or uninfected mass"
            )));
        }
        Ok(if a == 1 { 1.0 } else { p1 / p0 })
    };
    // P^w(A=a, X=x), unnormalized
    let mut m = [[0.0; 2]; 2];
    for (a, row) in m.iter_mut().enumerate() {
        for (x, slot) in row.iter_mut().enumerate() {
            for z in 0..2 {
                *slot += weight(a, z)? * jt.p_axz(a, x, z);
            }
        }
    }
    let total: f64 = m.iter().flatten().sum();
    let px1 = (m[0][1] + m[1][1]) / total;
    if !(px1 > 0.0 && px1 < 1.0) {
        return Err(Error::DegenerateMargin(format!("P(X=1) = {px1}")));
    }
    let t1 = m[1][1] / (m[0][1] + m[1][1]);
    let t0 = m[1][0] / (m[0][0] + m[1][0]);
    checked_or(t1, t0, if weighted { "weighted" } else { "unweighted" })
}

/// The balancing-weighted odds ratio written as a marginal odds ratio with
/// inverse probability of treatment weights (effect among the infected):
/// odds of X among the infected over the reweighted odds among the uninfected.
pub fn iptw_att_odds_ratio(jt: &JointTable) -> Result<f64> {
    let x1_a1: f64 = (0..2).map(|z| jt.p_axz(1, 1, z)).sum();
    let x0_a1: f64 = (0..2).map(|z| jt.p_axz(1, 0, z)).sum();
    let mut x1_a0 = 0.0;
    let mut x0_a0 = 0.0;
    for z in 0..2 {
        let (p1, p0) = (jt.p_az(1, z), jt.p_az(0, z));
        if p1 + p0 == 0.0 {
            continue;
        }
        if p1 <= 0.0 || p0 <= 0.0 {
            return Err(Error::DegenerateMargin(format!(
                "stratum Z={z} lacks infected or uninfected mass"
            )));
        }
        let w0 = p1 / p0;
        x1_a0 += w0 * jt.p_axz(0, 1, z);
        x0_a0 += w0 * jt.p_axz(0, 0, z);
    }
    if x0_a1 <= 0.0 || x1_a0 <= 0.0 || x0_a0 <= 0.0 {
        return Err(Error::DegenerateMargin("empty X margin".into()));
    }
    Ok((x1_a1 / x0_a1) / (x1_a0 / x0_a0))
}

/// One point of an odds-ratio-versus-risk-ratio curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub beta1: f64,
    pub or_unconfounded: f64,
    pub or_unadjusted: f64,
    pub or_weighted: f64,
}

/// Odds ratios across a grid of `beta1` values under `design`. Grid points that
/// make the design infeasible are skipped.
pub fn or_curve(
    alpha: f64,
    pi: f64,
    beta0: f64,
    design: &ConfounderDesign,
    beta1_grid: &[f64],
) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(beta1_grid.len());
    for &beta1 in beta1_grid {
        let pt = TheoryPoint::new(alpha, pi, beta0, beta1)?;
        let jt = match build_confounded_joint(alpha, pi, beta0, beta1, design) {
            Ok(jt) => jt,
            Err(Error::Infeasible(msg)) => {
                log::debug!("skipping beta1 = {beta1}: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        out.push(CurvePoint {
            beta1,
            or_unconfounded: or_closed_form(&pt),
            or_unadjusted: or_from_joint(&jt, false)?,
            or_weighted: or_from_joint(&jt, true)?,
        });
    }
    Ok(out)
}

/// Evenly spaced grid of `steps` interior points of `(lo, hi)`.
pub fn interior_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps + 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub pi: f64,
    pub beta0: f64,
    pub in_region: bool,
}

/// `null_attenuation_region` over an interior grid of the unit square.
pub fn region_grid(steps: usize) -> Vec<RegionPoint> {
    let grid = interior_grid(0.0, 1.0, steps);
    let mut out = Vec::with_capacity(steps * steps);
    for &pi in &grid {
        for &beta0 in &grid {
            out.push(RegionPoint {
                pi,
                beta0,
                in_region: null_attenuation_region(pi, beta0).expect("interior grid"),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(alpha: f64, pi: f64, b0: f64, b1: f64) -> TheoryPoint {
        TheoryPoint::new(alpha, pi, b0, b1).unwrap()
    }

    /// Cross-ratio from the 8-cell (Y, A, X) joint.
    fn enumerate_or(alpha: f64, pi: f64, b0: f64, b1: f64) -> f64 {
        let mut p = [[0.0; 2]; 2]; // p[a][x]
        for (a, pa) in [(0, 1.0 - alpha), (1, alpha)] {
            for (y, py) in [(0, if a == 1 { 1.0 - pi } else { 1.0 }), (1, if a == 1 { pi } else { 0.0 })] {
                let px = if y == 1 { b0 * b1 } else { b0 };
                p[a][1] += pa * py * px;
                p[a][0] += pa * py * (1.0 - px);
            }
        }
        (p[1][1] * p[0][0]) / (p[1][0] * p[0][1])
    }

    #[test]
    fn null_risk_ratio_gives_unit_odds_ratio() {
        for &(pi, b0) in &[(0.1, 0.3), (0.5, 0.5), (0.9, 0.05)] {
            assert_eq!(or_closed_form(&pt(0.4, pi, b0, 1.0)), 1.0);
        }
    }

    #[test]
    fn closed_form_fixture() {
        let p = pt(0.8, 0.25, 0.2, 2.0);
        assert!((or_closed_form(&p) - 4.0 / 3.0).abs() < 1e-14);
        assert!((enumerate_or(0.8, 0.25, 0.2, 2.0) - 4.0 / 3.0).abs() < 1e-14);
        assert!(or_closed_form(&pt(0.8, 0.25, 0.2, 0.5)) < 1.0);
    }

    #[test]
    fn thetas_are_alpha_when_uninformative() {
        let p = pt(0.37, 0.3, 0.4, 1.0);
        for x in [false, true] {
            assert!((theta_x(&p, 0.37, x).unwrap() - 0.37).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_cross_ratio_is_alpha_free() {
        let p = pt(0.5, 0.25, 0.2, 2.0);
        let ratio = |alpha: f64| {
            odds(theta_x(&p, alpha, true).unwrap()) / odds(theta_x(&p, alpha, false).unwrap())
        };
        assert!((theta_x(&p, 0.5, true).unwrap() - theta_x(&p, 0.8, true).unwrap()).abs() > 1e-3);
        assert!((ratio(0.5) - 4.0 / 3.0).abs() < 1e-12);
        assert!((ratio(0.8) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn phi_values() {
        assert!((phi_threshold(0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi_threshold(0.25, 0.2).unwrap() - 12.0).abs() < 1e-12);
        assert!(phi_threshold(0.0, 0.2).is_err());
        assert!(phi_threshold(0.3, 1.0).is_err());
    }

    #[test]
    fn magnitude_cases() {
        assert_eq!(magnitude_relation(&pt(0.5, 0.3, 0.3, 1.0)), MagnitudeRelation::Equal);
        for b1 in [0.5, 2.0, 4.9] {
            assert_eq!(magnitude_relation(&pt(0.5, 0.25, 0.2, b1)), MagnitudeRelation::OrCloser);
        }
    }

    #[test]
    fn region_examples() {
        assert!(null_attenuation_region(0.25, 0.2).unwrap());
        for b0 in [0.01, 0.3, 0.99] {
            assert!(!null_attenuation_region(0.5, b0).unwrap());
        }
    }

    #[test]
    fn conditional_solver() {
        let (p0, p1) = solve_conditional_from_marginal(0.7, 0.55, 1.7).unwrap();
        assert!((p0 - 0.7 / 1.385).abs() < 1e-15);
        assert!((p0 - 0.505415).abs() < 1e-6 && (p1 - 0.859206).abs() < 1e-6);
        assert!((0.45 * p0 + 0.55 * p1 - 0.7).abs() < 1e-15);
        let (q0, q1) = solve_conditional_from_marginal(0.7, 0.55, 0.65).unwrap();
        assert!(q1 < q0 && (0.45 * q0 + 0.55 * q1 - 0.7).abs() < 1e-15);
        assert_eq!(solve_conditional_from_marginal(0.3, 0.9, 1.0).unwrap(), (0.3, 0.3));
        assert!(matches!(
            solve_conditional_from_marginal(0.9, 0.5, 3.0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(TheoryPoint::new(0.5, 0.5, 0.2, 5.0).is_ok());
        assert!(TheoryPoint::new(0.5, 0.5, 0.2, 5.1).is_err());
        assert!(TheoryPoint::new(0.5, 0.5, 0.2, 0.0).is_err());
        assert!(TheoryPoint::new(1.0, 0.5, 0.2, 1.0).is_err());
    }

    #[test]
    fn independence_table_has_unit_odds_ratio() {
        let mut cells = [0.0; 16];
        for z in 0..2 {
            for a in 0..2 {
                for x in 0..2 {
                    let pa = if a == 1 { 0.3 } else { 0.7 };
                    let px = if x == 1 { 0.2 } else { 0.8 };
                    cells[cell(z, 0, a, x)] = 0.5 * pa * px;
                }
            }
        }
        let jt = JointTable::from_cells(cells).unwrap();
        assert!((or_from_joint(&jt, false).unwrap() - 1.0).abs() < 1e-14);
        assert!((or_from_joint(&jt, true).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unconfounded_joint_matches_closed_form() {
        let jt = build_confounded_joint(0.6, 0.25, 0.2, 2.0, &ConfounderDesign::NONE).unwrap();
        assert!((or_from_joint(&jt, false).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((or_from_joint(&jt, true).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_design() {
        let d = ConfounderDesign {
            pz: 0.5,
            rr_az: 1.0,
            rr_xz: 3.0,
        };
        // b(1) = 0.3 * 3 / 2 = 0.45, times beta1 = 3 exceeds 1
        assert!(matches!(
            build_confounded_joint(0.5, 0.3, 0.3, 3.0, &d),
            Err(Error::Infeasible(_))
        ));
    }
}
