//! L1-penalized logistic regression on binary features.
//!
//! Minimizes
//!
//! ```text
//! F(b0, beta) = sum_i s_i [log(1 + exp(eta_i)) - a_i eta_i] + lambda * sum_k |beta_k|
//! ```
//!
//! with `eta_i = b0 + sum_k beta_k x_ik` and `s_i = w_i / sum(w)`, so scaling
//! every weight by a constant leaves the problem unchanged. The intercept is
//! not penalized and features are used on their raw 0/1 scale.
//!
//! Outer loop: quadratic (IRLS) approximation of the loss at the current
//! point. Inner loop: cyclic coordinate descent with soft-thresholding,
//! alternating full sweeps with sweeps over the active set. Each outer step
//! is accepted only if it does not increase `F`; otherwise it is halved.
//! Columns are stored as row-index lists, so a coordinate update costs
//! O(column count) rather than O(n).

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;

/// Lower bound on `p (1 - p)` in the working weights.
const MIN_CURVATURE: f64 = 1e-5;
const MAX_HALVINGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Convergence threshold on the largest absolute coefficient update.
    pub tol: f64,
    /// Budget of coordinate sweeps per fit (full and active-set sweeps).
    pub max_sweeps: usize,
    /// A fit whose intercept exceeds this magnitude is reported as separated.
    pub intercept_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 100_000,
            intercept_cap: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub intercept: f64,
    pub beta: Vec<f64>,
}

impl Coefficients {
    pub fn zeros(k: usize) -> Self {
        Self {
            intercept: 0.0,
            beta: vec![0.0; k],
        }
    }

    pub fn nonzero(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.beta
            .iter()
            .zip(&other.beta)
            .map(|(a, b)| (a - b).abs())
            .fold((self.intercept - other.intercept).abs(), f64::max)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitDiagnostics {
    pub outer_iterations: usize,
    pub sweeps: usize,
    /// Penalized objective at the start and after every outer iteration.
    pub objective_trace: Vec<f64>,
}

/// Fitting data: column supports, labels and normalized weights.
#[derive(Debug, Clone)]
pub struct Problem {
    n: usize,
    support: Vec<Vec<u32>>,
    /// Row-wise supports in compressed form: row `i` owns
    /// `row_cols[row_start[i]..row_start[i + 1]]`.
    row_start: Vec<usize>,
    row_cols: Vec<u16>,
    labels: Vec<f64>,
    weights: Vec<f64>,
    mean_label: f64,
}

impl Problem {
    pub fn new(x: &BinaryMatrix, a: &[bool], w: &[f64]) -> Result<Self> {
        let n = x.nrows();
        if a.len() != n || w.len() != n {
            return Err(Error::Dimension(format!(
                "{n} rows, {} labels, {} weights",
                a.len(),
                w.len()
            )));
        }
        if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(format!("weight {i} = {} is invalid", w[i])));
        }
        let total: f64 = w.iter().sum();
        let positive: f64 = w.iter().zip(a).filter(|(_, &l)| l).map(|(v, _)| v).sum();
        if !(total > 0.0) || positive <= 0.0 || positive >= total {
            return Err(Error::Domain(
                "both label classes need positive total weight".into(),
            ));
        }
        let weights: Vec<f64> = w.iter().map(|v| v / total).collect();
        let labels: Vec<f64> = a.iter().map(|&l| f64::from(u8::from(l))).collect();
        let mean_label = labels.iter().zip(&weights).map(|(l, s)| l * s).sum();
        if x.ncols() > usize::from(u16::MAX) {
            return Err(Error::Dimension(format!("{} features exceed the supported maximum", x.ncols())));
        }
        let support = x.column_support();
        let mut row_start = Vec::with_capacity(n + 1);
        let mut row_cols = Vec::new();
        row_start.push(0);
        for row in x.rows() {
            row_cols.extend((0..row.len()).filter(|&j| row[j] == 1).map(|j| j as u16));
            row_start.push(row_cols.len());
        }
        for (j, col) in support.iter().enumerate() {
            if col.is_empty() || col.len() == n {
                log::warn!("feature {} is constant; it is excluded from lambda_max", j + 1);
            }
        }
        Ok(Self {
            n,
            support,
            row_start,
            row_cols,
            labels,
            weights,
            mean_label,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    /// Weighted mean label.
    pub fn mean_label(&self) -> f64 {
        self.mean_label
    }

    pub fn null_intercept(&self) -> f64 {
        (self.mean_label / (1.0 - self.mean_label)).ln()
    }

    /// Smallest lambda at which every coefficient is zero:
    /// `max_k |sum_i s_i x_ik (a_i - mean)|`.
    pub fn lambda_max(&self) -> f64 {
        self.support
            .iter()
            .filter(|col| !col.is_empty() && col.len() < self.n)
            .map(|col| {
                col.iter()
                    .map(|&i| self.weights[i as usize] * (self.labels[i as usize] - self.mean_label))
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    fn linear_predictor(&self, coef: &Coefficients, eta: &mut [f64]) {
        eta.fill(coef.intercept);
        for (col, &b) in self.support.iter().zip(&coef.beta) {
            if b != 0.0 {
                for &i in col {
                    eta[i as usize] += b;
                }
            }
        }
    }

    /// Penalized objective.
    pub fn objective(&self, coef: &Coefficients, lambda: f64) -> f64 {
        let mut eta = vec![0.0; self.n];
        self.linear_predictor(coef, &mut eta);
        let loss: f64 = eta
            .iter()
            .zip(&self.labels)
            .zip(&self.weights)
            .map(|((&e, &a), &s)| s * logistic_loss(e, a))
            .sum();
        loss + lambda * l1(&coef.beta)
    }

    /// Loss gradient components `g_k = sum_i s_i x_ik (a_i - p_i)` (the negative
    /// partial derivatives) and the intercept component.
    pub fn score(&self, coef: &Coefficients) -> (f64, Vec<f64>) {
        let mut eta = vec![0.0; self.n];
        self.linear_predictor(coef, &mut eta);
        let resid: Vec<f64> = eta
            .iter()
            .zip(&self.labels)
            .zip(&self.weights)
            .map(|((&e, &a), &s)| s * (a - sigmoid(e)))
            .collect();
        let g = self
            .support
            .iter()
            .map(|col| col.iter().map(|&i| resid[i as usize]).sum())
            .collect();
        (resid.iter().sum(), g)
    }

    /// Largest violation of the lasso optimality conditions at `coef`.
    pub fn kkt_violation(&self, coef: &Coefficients, lambda: f64) -> f64 {
        let (g0, g) = self.score(coef);
        g.iter()
            .zip(&coef.beta)
            .map(|(&gk, &b)| {
                if b == 0.0 {
                    (gk.abs() - lambda).max(0.0)
                } else {
                    (gk - b.signum() * lambda).abs()
                }
            })
            .fold(g0.abs(), f64::max)
    }
}

#[inline]
pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(eta)) - a * eta`, evaluated stably.
#[inline]
pub(crate) fn logistic_loss(eta: f64, a: f64) -> f64 {
    (-eta.abs()).exp().ln_1p() + eta.max(0.0) - a * eta
}

fn l1(beta: &[f64]) -> f64 {
    beta.iter().map(|b| b.abs()).sum()
}

#[inline]
fn soft_threshold(u: f64, t: f64) -> f64 {
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

/// Reusable workspace for fits on one [`Problem`].
pub struct LassoSolver<'a> {
    prob: &'a Problem,
    opts: FitOptions,
    lambda_max: f64,
    eta: Vec<f64>,
    /// Working weights `s_i p_i (1 - p_i)`.
    v: Vec<f64>,
    /// Working residuals `s_i (a_i - p_i)`.
    r: Vec<f64>,
    /// Diagonal of the weighted Gram matrix, `sum_i v_i x_ij`.
    h: Vec<f64>,
    /// Coefficients the working vectors were last computed at, with the loss there.
    evaluated: Option<(Coefficients, f64)>,
    /// Row-major `k x k` weighted Gram matrix.
    gram: Vec<f64>,
    /// Loss gradient of the quadratic model at the current coefficients.
    grad: Vec<f64>,
    active: Vec<usize>,
}


impl<'a> LassoSolver<'a> {
    pub fn new(prob: &'a Problem, opts: FitOptions) -> Self {
        let n = prob.n;
        Self {
            prob,
            opts,
            lambda_max: prob.lambda_max(),
            eta: vec![0.0; n],
            v: vec![0.0; n],
            r: vec![0.0; n],
            h: vec![0.0; prob.k()],
            evaluated: None,
            gram: vec![0.0; prob.k() * prob.k()],
            grad: vec![0.0; prob.k()],
            active: Vec::new(),
        }
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    fn null_model(&self) -> Coefficients {
        Coefficients {
            intercept: self.prob.null_intercept(),
            beta: vec![0.0; self.prob.k()],
        }
    }

    /// Refresh eta, working weights and residuals at `coef`; return the
    /// penalized objective.
    fn evaluate(&mut self, coef: &Coefficients, lambda: f64) -> f64 {
        let penalty = lambda * l1(&coef.beta);
        if let Some((at, loss)) = &self.evaluated {
            if at == coef {
                return loss + penalty;
            }
        }
        let p = self.prob;
        p.linear_predictor(coef, &mut self.eta);
        let mut loss = 0.0;
        for i in 0..p.n {
            let e = self.eta[i];
            let a = p.labels[i];
            let s = p.weights[i];
            let t = (-e.abs()).exp();
            let prob = if e >= 0.0 { 1.0 / (1.0 + t) } else { t / (1.0 + t) };
            loss += s * (t.ln_1p() + e.max(0.0) - a * e);
            self.v[i] = s * (prob * (1.0 - prob)).max(MIN_CURVATURE);
            self.r[i] = s * (a - prob);
        }
        self.evaluated = Some((coef.clone(), loss));
        loss + penalty
    }

    fn build_gram(&mut self) {
        let prob = self.prob;
        let k = prob.k();
        self.gram.fill(0.0);
        for i in 0..prob.n {
            let vi = self.v[i];
            let cols = &prob.row_cols[prob.row_start[i]..prob.row_start[i + 1]];
            for (pos, &a) in cols.iter().enumerate() {
                let row = &mut self.gram[usize::from(a) * k..(usize::from(a) + 1) * k];
                for &b in &cols[pos..] {
                    row[usize::from(b)] += vi;
                }
            }
        }
        for a in 0..k {
            self.h[a] = self.gram[a * k + a];
            for b in a + 1..k {
                self.gram[b * k + a] = self.gram[a * k + b];
            }
        }
    }

    /// Coordinate descent on the quadratic model built by `evaluate`.
    ///
    /// Works on the weighted Gram matrix `G = X' V X` and the gradient vector
    /// rather than on per-row residuals: each coordinate update then costs
    /// O(k) instead of a pass over its column. Because features are binary,
    /// `G_jj` is also the cross term between feature `j` and the intercept.
    fn solve_quadratic(&mut self, coef: &mut Coefficients, lambda: f64, sweeps: &mut usize) -> Result<()> {
        let prob = self.prob;
        let k = prob.k();
        for (gj, col) in self.grad.iter_mut().zip(&prob.support) {
            *gj = col.iter().map(|&i| self.r[i as usize]).sum();
        }
        self.build_gram();
        let total_v: f64 = self.v.iter().sum();
        let mut grad0: f64 = self.r.iter().sum();

        let mut full = true;
        loop {
            *sweeps += 1;
            if *sweeps > self.opts.max_sweeps {
                return Err(Error::NonConvergence {
                    lambda,
                    sweeps: *sweeps,
                });
            }
            let mut max_delta = 0.0f64;
            let count = if full { k } else { self.active.len() };
            for idx in 0..count {
                let j = if full { idx } else { self.active[idx] };
                let hj = self.h[j];
                if hj <= 0.0 {
                    coef.beta[j] = 0.0;
                    continue;
                }
                let old = coef.beta[j];
                let new = soft_threshold(hj * old + self.grad[j], lambda) / hj;
                let d = new - old;
                if d != 0.0 {
                    let row = &self.gram[j * k..(j + 1) * k];
                    for (g, &gjm) in self.grad.iter_mut().zip(row) {
                        *g -= gjm * d;
                    }
                    grad0 -= hj * d;
                    coef.beta[j] = new;
                    max_delta = max_delta.max(d.abs());
                }
            }
            let d0 = grad0 / total_v;
            if d0 != 0.0 {
                for (g, &hj) in self.grad.iter_mut().zip(&self.h) {
                    *g -= hj * d0;
                }
                grad0 = 0.0;
                coef.intercept += d0;
                max_delta = max_delta.max(d0.abs());
            }

            if full {
                self.active.clear();
                self.active.extend((0..k).filter(|&j| coef.beta[j] != 0.0));
                if max_delta < self.opts.tol {
                    return Ok(());
                }
                full = false;
            } else if max_delta < self.opts.tol {
                full = true;
            }
        }
    }

    /// Minimize the penalized objective at `lambda`, starting from `start`.
    pub fn fit(&mut self, lambda: f64, start: &Coefficients) -> Result<(Coefficients, FitDiagnostics)> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda = {lambda} must be >= 0")));
        }
        if start.beta.len() != self.prob.k() {
            return Err(Error::Dimension(format!(
                "warm start has {} coefficients, problem has {}",
                start.beta.len(),
                self.prob.k()
            )));
        }
        let mut diag = FitDiagnostics::default();
        if lambda >= self.lambda_max {
            let coef = self.null_model();
            diag.objective_trace.push(self.prob.objective(&coef, lambda));
            return Ok((coef, diag));
        }

        let mut coef = start.clone();
        let mut obj = self.evaluate(&coef, lambda);
        diag.objective_trace.push(obj);
        loop {
            diag.outer_iterations += 1;
            let old = coef.clone();
            self.solve_quadratic(&mut coef, lambda, &mut diag.sweeps)?;

            let mut new_obj = self.evaluate(&coef, lambda);
            let slack = 1e-13 * obj.abs().max(1.0);
            let mut halvings = 0;
            while new_obj > obj + slack && halvings < MAX_HALVINGS {
                for (b, o) in coef.beta.iter_mut().zip(&old.beta) {
                    *b = 0.5 * (*b + o);
                }
                coef.intercept = 0.5 * (coef.intercept + old.intercept);
                new_obj = self.evaluate(&coef, lambda);
                halvings += 1;
            }
            if new_obj > obj + slack {
                // no descent direction left at working precision
                coef = old;
                self.evaluate(&coef, lambda);
                diag.objective_trace.push(obj);
                break;
            }
            obj = new_obj;
            diag.objective_trace.push(obj);

            if coef.intercept.abs() > self.opts.intercept_cap {
                return Err(Error::Separation {
                    lambda,
                    intercept: coef.intercept,
                    cap: self.opts.intercept_cap,
                });
            }
            if coef.max_abs_diff(&old) < self.opts.tol {
                break;
            }
            if diag.sweeps > self.opts.max_sweeps {
                return Err(Error::NonConvergence {
                    lambda,
                    sweeps: diag.sweeps,
                });
            }
        }
        Ok((coef, diag))
    }
}

/// Fit at a single lambda. `warm` defaults to the all-zero model.
pub fn fit_at_lambda(
    x: &BinaryMatrix,
    a: &[bool],
    w: &[f64],
    lambda: f64,
    warm: Option<&Coefficients>,
    opts: FitOptions,
) -> Result<Coefficients> {
    let prob = Problem::new(x, a, w)?;
    let mut solver = LassoSolver::new(&prob, opts);
    let zero = Coefficients::zeros(prob.k());
    Ok(solver.fit(lambda, warm.unwrap_or(&zero))?.0)
}

/// Geometric sequence of `n_lambda` values from `lambda_max` down to
/// `lambda_max * min_ratio`.
pub fn geometric_path(lambda_max: f64, n_lambda: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if n_lambda == 0 {
        return Err(Error::Domain("n_lambda must be positive".into()));
    }
    if !(min_ratio > 0.0 && min_ratio < 1.0) {
        return Err(Error::Domain(format!("min_ratio = {min_ratio} must lie in (0, 1)")));
    }
    if !(lambda_max > 0.0) {
        return Err(Error::Domain(
            "lambda_max is zero: no feature varies with the labels".into(),
        ));
    }
    if n_lambda == 1 {
        return Ok(vec![lambda_max]);
    }
    let step = min_ratio.ln() / (n_lambda - 1) as f64;
    Ok((0..n_lambda)
        .map(|i| lambda_max * (step * i as f64).exp())
        .collect())
}

pub fn lambda_path(
    x: &BinaryMatrix,
    a: &[bool],
    w: &[f64],
    n_lambda: usize,
    min_ratio: f64,
) -> Result<Vec<f64>> {
    geometric_path(Problem::new(x, a, w)?.lambda_max(), n_lambda, min_ratio)
}

/// Warm-started fits along a descending lambda sequence.
pub fn fit_path(prob: &Problem, lambdas: &[f64], opts: FitOptions) -> Result<Vec<Coefficients>> {
    let mut solver = LassoSolver::new(prob, opts);
    let mut current = Coefficients::zeros(prob.k());
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        current = solver.fit(lambda, &current)?.0;
        out.push(current.clone());
    }
    Ok(out)
}
