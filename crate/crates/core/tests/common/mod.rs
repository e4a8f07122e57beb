//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nuindex_core::matrix::BinaryMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Odds ratio between infection and one feature from the full joint of
/// (latent, infected, feature), built cell by cell.
pub fn enumerated_or(alpha: f64, pi: f64, beta0: f64, beta1: f64) -> f64 {
    // p[a][x]
    let mut p = [[0.0f64; 2]; 2];
    for a in 0..2 {
        let p_a = if a == 1 { alpha } else { 1.0 - alpha };
        for y in 0..2 {
            let p_y = match (a, y) {
                (0, 0) => 1.0,
                (0, 1) => 0.0,
                (1, 1) => pi,
                _ => 1.0 - pi,
            };
            let px1 = if y == 1 { beta0 * beta1 } else { beta0 };
            p[a][1] += p_a * p_y * px1;
            p[a][0] += p_a * p_y * (1.0 - px1);
        }
    }
    (p[1][1] * p[0][0]) / (p[1][0] * p[0][1])
}

/// Uniform draw of a valid (alpha, pi, beta0, beta1), with beta1 up to and
/// including its upper bound `1 / beta0` on a small fraction of draws.
pub fn random_point<R: Rng>(r: &mut R) -> (f64, f64, f64, f64) {
    let alpha = r.random_range(0.01..0.99);
    let pi = r.random_range(0.01..0.99);
    let beta0 = r.random_range(0.01..0.99);
    let beta1 = if r.random_bool(0.02) {
        1.0 / beta0
    } else {
        r.random_range(1e-3..1.0 / beta0)
    };
    (alpha, pi, beta0, beta1)
}

/// Fixed point of `f(b) = or(b) - b` on `(eps, 1/beta0 - eps)` by bisection,
/// ignoring the trivial root at 1. `None` when there is no sign change.
pub fn bisect_fixed_point(beta0: f64, or: impl Fn(f64) -> f64) -> Option<f64> {
    let eps = 1e-9;
    let f = |b: f64| or(b) - b;
    let hi_end = 1.0 / beta0 - eps;
    // The fixed point other than 1 lies on one side of 1; try both brackets.
    for (mut lo, mut hi) in [(eps, 1.0 - 1e-6), (1.0 + 1e-6, hi_end)] {
        if hi <= lo {
            continue;
        }
        let (flo, fhi) = (f(lo), f(hi));
        if flo.signum() == fhi.signum() {
            continue;
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Some(0.5 * (lo + hi));
    }
    None
}

/// One row of the casewise analysis of how the latent risk ratio and the
/// odds ratio compare.
#[derive(Debug, Clone, Copy)]
pub struct CompareCase {
    pub id: usize,
    /// Expect `beta1 < OR` (otherwise `beta1 > OR`).
    pub rr_below_or: bool,
    /// Expect `|beta1 - 1| > |OR - 1|` (otherwise `<`).
    pub rr_farther: bool,
}

pub const COMPARE_CASES: [CompareCase; 10] = [
    CompareCase { id: 1, rr_below_or: true, rr_farther: true },
    CompareCase { id: 2, rr_below_or: false, rr_farther: false },
    CompareCase { id: 3, rr_below_or: true, rr_farther: false },
    CompareCase { id: 4, rr_below_or: true, rr_farther: true },
    CompareCase { id: 5, rr_below_or: true, rr_farther: false },
    CompareCase { id: 6, rr_below_or: true, rr_farther: true },
    CompareCase { id: 7, rr_below_or: false, rr_farther: true },
    CompareCase { id: 8, rr_below_or: true, rr_farther: false },
    CompareCase { id: 9, rr_below_or: true, rr_farther: true },
    CompareCase { id: 10, rr_below_or: false, rr_farther: true },
];

fn inside<R: Rng>(r: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.random_range(0.02..0.98)
}

/// Draw `(pi, beta0, beta1)` satisfying the conditions of case `id`.
pub fn sample_case<R: Rng>(id: usize, r: &mut R) -> (f64, f64, f64) {
    let phi = |pi: f64, b0: f64| (1.0 - pi) / pi * (1.0 - b0) / b0;
    match id {
        // phi < 1  <=>  beta0 > 1 - pi
        1..=3 => {
            let pi: f64 = r.random_range(0.05..0.95);
            let b0 = inside(r, 1.0 - pi, 1.0);
            let f = phi(pi, b0);
            let b1 = match id {
                1 => inside(r, 0.0, f),
                2 => inside(r, f, 1.0),
                _ => inside(r, 1.0, 1.0 / b0),
            };
            (pi, b0, b1)
        }
        // phi = 1  <=>  beta0 = 1 - pi
        4 | 5 => {
            let pi: f64 = r.random_range(0.05..0.95);
            let b0 = 1.0 - pi;
            let b1 = if id == 4 { inside(r, 0.0, 1.0) } else { inside(r, 1.0, 1.0 / b0) };
            (pi, b0, b1)
        }
        // 1 < phi <= 1/beta0
        6..=8 => {
            let pi: f64 = r.random_range(0.05..0.95);
            let lo = (1.0 - pi / (1.0 - pi)).max(0.01);
            let b0 = inside(r, lo, 1.0 - pi);
            let f = phi(pi, b0);
            let b1 = match id {
                6 => inside(r, 0.0, 1.0),
                7 => inside(r, 1.0, f),
                _ => inside(r, f, 1.0 / b0),
            };
            (pi, b0, b1)
        }
        // 1/beta0 < phi  <=>  beta0 < 1 - pi/(1-pi), needs pi < 1/2
        9 | 10 => {
            let pi: f64 = r.random_range(0.05..0.45);
            let b0 = inside(r, 0.01, 1.0 - pi / (1.0 - pi));
            let b1 = if id == 9 { inside(r, 0.0, 1.0) } else { inside(r, 1.0, 1.0 / b0) };
            (pi, b0, b1)
        }
        _ => panic!("no case {id}"),
    }
}

/// O(n^2) tau-b.
pub fn brute_kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut s, mut tx, mut ty) = (0.0, 0.0, 0.0);
    let n0 = (n * (n - 1) / 2) as f64;
    for i in 0..n {
        for j in i + 1..n {
            let dx = (x[i] - x[j]).signum() * ((x[i] != x[j]) as i32 as f64);
            let dy = (y[i] - y[j]).signum() * ((y[i] != y[j]) as i32 as f64);
            s += dx * dy;
            tx += (dx == 0.0) as i32 as f64;
            ty += (dy == 0.0) as i32 as f64;
        }
    }
    s / ((n0 - tx) * (n0 - ty)).sqrt()
}

/// O(n^2) AUC: P(score_pos > score_neg) + P(tie)/2.
pub fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut num, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1.0;
            num += if scores[i] > scores[j] {
                1.0
            } else if scores[i] == scores[j] {
                0.5
            } else {
                0.0
            };
        }
    }
    num / pairs
}

/// Brute-force threshold curve: one point per distinct score.
pub fn brute_threshold_points(scores: &[f64], infected: &[bool]) -> Vec<(f64, f64, f64)> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let n1 = infected.iter().filter(|&&a| a).count() as f64;
    let n0 = infected.len() as f64 - n1;
    distinct
        .into_iter()
        .map(|t| {
            let (mut c1, mut c0) = (0.0, 0.0);
            for (&s, &a) in scores.iter().zip(infected) {
                if s >= t {
                    if a {
                        c1 += 1.0;
                    } else {
                        c0 += 1.0;
                    }
                }
            }
            (t, c1 / n1, c0 / n0)
        })
        .collect()
}

/// Two-feature lasso data collapsed to the four feature patterns, with
/// normalized weight mass of infected and uninfected per pattern.
pub struct TwoFeatureCells {
    pub mass: [[f64; 2]; 4],
}

impl TwoFeatureCells {
    pub fn new(x: &BinaryMatrix, a: &[bool], w: &[f64]) -> Self {
        let total: f64 = w.iter().sum();
        let mut mass = [[0.0; 2]; 4];
        for i in 0..a.len() {
            let cell = (x.get(i, 0) as usize) * 2 + x.get(i, 1) as usize;
            mass[cell][a[i] as usize] += w[i] / total;
        }
        Self { mass }
    }

    fn loss(&self, b0: f64, b1: f64, b2: f64) -> f64 {
        let mut loss = 0.0;
        for (cell, m) in self.mass.iter().enumerate() {
            let eta = b0 + b1 * (cell / 2) as f64 + b2 * (cell % 2) as f64;
            // -log sigmoid(eta) for a=1, -log(1 - sigmoid(eta)) for a=0
            let log1p_exp = |t: f64| if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
            loss += m[1] * log1p_exp(-eta) + m[0] * log1p_exp(eta);
        }
        loss
    }

    /// Objective with the intercept profiled out by golden-section search.
    pub fn profiled(&self, b1: f64, b2: f64, lambda: f64) -> f64 {
        let (mut lo, mut hi) = (-20.0f64, 20.0f64);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = hi - g * (hi - lo);
        let mut d = lo + g * (hi - lo);
        while hi - lo > 1e-10 {
            if self.loss(c, b1, b2) < self.loss(d, b1, b2) {
                hi = d;
            } else {
                lo = c;
            }
            c = hi - g * (hi - lo);
            d = lo + g * (hi - lo);
        }
        self.loss(0.5 * (lo + hi), b1, b2) + lambda * (b1.abs() + b2.abs())
    }

    /// Minimum over a grid of spacing 1e-3, located coarse-to-fine (the
    /// profiled objective is convex).
    pub fn grid_minimum(&self, lambda: f64) -> (f64, f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let scan = |c1: f64, c2: f64, half: i64, step: f64, best: &mut (f64, f64, f64)| {
            for i in -half..=half {
                for j in -half..=half {
                    let b1 = ((c1 + i as f64 * step) * 1000.0).round() / 1000.0;
                    let b2 = ((c2 + j as f64 * step) * 1000.0).round() / 1000.0;
                    let f = self.profiled(b1, b2, lambda);
                    if f < best.0 {
                        *best = (f, b1, b2);
                    }
                }
            }
        };
        scan(0.0, 0.0, 40, 0.1, &mut best);
        let (_, c1, c2) = best;
        scan(c1, c2, 12, 0.01, &mut best);
        let (_, c1, c2) = best;
        scan(c1, c2, 12, 0.001, &mut best);
        best
    }
}

/// Deterministic two-feature fixture with `n` rows.
pub fn two_feature_fixture(n: usize, seed: u64) -> (BinaryMatrix, Vec<bool>) {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = r.random_bool(0.4);
        let x2 = r.random_bool(0.5);
        let eta = -0.2 + 0.9 * x1 as i32 as f64 + 0.25 * x2 as i32 as f64;
        a.push(r.random_bool(1.0 / (1.0 + (-eta).exp())));
        rows.push(vec![x1 as u8, x2 as u8]);
    }
    (BinaryMatrix::from_rows(&rows).unwrap(), a)
}

/// Random binary design with a few informative columns.
pub fn random_design(n: usize, k: usize, seed: u64) -> (BinaryMatrix, Vec<bool>) {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<u8> = (0..k).map(|_| r.random_bool(0.3) as u8).collect();
        let eta: f64 = 0.3 + row.iter().take(3).enumerate().map(|(j, &v)| (0.8 - 0.3 * j as f64) * v as f64).sum::<f64>();
        a.push(r.random_bool(1.0 / (1.0 + (-eta).exp())));
        rows.push(row);
    }
    (BinaryMatrix::from_rows(&rows).unwrap(), a)
}
