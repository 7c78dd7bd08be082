//! Ridge-penalized GLM fitting by iteratively reweighted least squares.
//!
//! The fitted objective is `D(y, μ)/2 + (λ/2)‖β‖²` with an unpenalized
//! intercept, which equals the negative log-likelihood kernel plus the ridge
//! term up to a constant. When the design has more columns than rows every
//! IRLS step is solved in the n-dimensional dual form `β = X'v` using the
//! Gram matrix `XX'`, so no p×p matrix is ever formed and the per-step cost
//! does not depend on p.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cv;
use crate::error::{Result, SparError};
use crate::family::{Family, FamilyLink, Link};
use crate::linalg::{cholesky_solve, dot, mat_t_vec, mat_vec, outer_gram, select_rows};

/// Iteration controls for the IRLS solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrlsConfig {
    pub max_iter: usize,
    /// Relative gradient-norm tolerance, scaled by max(1, ‖gradient at start‖).
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        IrlsConfig { max_iter: 100, tol: 1e-7, max_halvings: 30 }
    }
}

/// A single penalized fit.
#[derive(Debug, Clone)]
pub struct RidgeFit {
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub deviance: f64,
    pub null_deviance: f64,
    pub deviance_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Penalized objective after the start point and after every accepted step.
    pub objective_trace: Vec<f64>,
    dual: Option<Vec<f64>>,
}

impl RidgeFit {
    /// Linear predictor `intercept + X·beta` for new rows.
    pub fn predict_eta(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.beta.len() {
            return Err(SparError::dim(format!("expected {} columns, got {}", self.beta.len(), x.ncols())));
        }
        Ok(mat_vec(x, &self.beta).into_iter().map(|v| v + self.intercept).collect())
    }
}

/// Penalized GLM solver bound to one design and response.
pub struct RidgeSolver<'a> {
    x: &'a DMatrix<f64>,
    y: &'a [f64],
    fl: FamilyLink,
    null_deviance: f64,
    degenerate: bool,
    gram: Option<DMatrix<f64>>,
    config: IrlsConfig,
}

struct Iterate {
    intercept: f64,
    /// Dual coefficients `v` (dual mode) or `β` (primal mode).
    coef: Vec<f64>,
    /// X·β, excluding the intercept.
    lin: Vec<f64>,
    eta: Vec<f64>,
    penalty: f64,
    objective: f64,
    grad_norm: f64,
}

impl<'a> RidgeSolver<'a> {
    /// Builds a solver. Responses are checked against the relaxed family
    /// domain, so fractional binomial and non-integer Poisson responses are
    /// accepted.
    pub fn new(x: &'a DMatrix<f64>, y: &'a [f64], fl: FamilyLink, config: IrlsConfig) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n {
            return Err(SparError::dim(format!("design has {n} rows, response has {}", y.len())));
        }
        if n < 2 {
            return Err(SparError::param("at least two observations are required"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SparError::Data("design contains non-finite values".into()));
        }
        fl.check_response(y, false)?;
        let null = fl.null_deviance(y);
        let gram = (x.ncols() > n).then(|| outer_gram(x));
        Ok(RidgeSolver { x, y, fl, null_deviance: null.value, degenerate: null.degenerate, gram, config })
    }

    pub fn family_link(&self) -> FamilyLink {
        self.fl
    }

    pub fn null_deviance(&self) -> f64 {
        self.null_deviance
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Whether steps are solved in the dual (kernel) form.
    pub fn is_dual(&self) -> bool {
        self.gram.is_some()
    }

    /// Fits at `lambda` from the null-model start.
    pub fn fit(&self, lambda: f64) -> Result<RidgeFit> {
        self.fit_inner(lambda, None)
    }

    /// Fits at `lambda` starting from the given coefficients. In dual mode the
    /// start is projected onto the row space of the design.
    pub fn fit_from(&self, lambda: f64, intercept: f64, beta: &[f64]) -> Result<RidgeFit> {
        if beta.len() != self.x.ncols() {
            return Err(SparError::dim(format!("warm start has {} entries, design has {} columns", beta.len(), self.x.ncols())));
        }
        let coef = match &self.gram {
            None => beta.to_vec(),
            Some(k) => {
                let xb = DVector::from_vec(mat_vec(self.x, beta));
                let jitter = 1e-10 * (k.trace() / k.nrows() as f64).max(1e-300);
                let a = k + DMatrix::identity(k.nrows(), k.nrows()) * jitter;
                cholesky_solve(a, &xb)
                    .ok_or_else(|| SparError::numerical("could not project warm start onto the row space"))?
                    .as_slice()
                    .to_vec()
            }
        };
        self.fit_inner(lambda, Some((intercept, coef)))
    }

    /// Fits at `lambda` warm-started from a previous fit of this solver.
    pub fn fit_warm(&self, lambda: f64, prev: &RidgeFit) -> Result<RidgeFit> {
        match (&self.gram, &prev.dual) {
            (Some(_), Some(v)) => self.fit_inner(lambda, Some((prev.intercept, v.clone()))),
            _ => self.fit_from(lambda, prev.intercept, &prev.beta),
        }
    }

    /// Penalized objective `D/2 + (λ/2)‖β‖²` at arbitrary coefficients.
    pub fn objective(&self, lambda: f64, intercept: f64, beta: &[f64]) -> f64 {
        let eta: Vec<f64> = mat_vec(self.x, beta).into_iter().map(|v| v + intercept).collect();
        0.5 * self.fl.deviance_eta(self.y, &eta) + 0.5 * lambda * dot(beta, beta)
    }

    /// Gradient of the penalized objective: (d/dβ₀, d/dβ).
    pub fn gradient(&self, lambda: f64, intercept: f64, beta: &[f64]) -> (f64, Vec<f64>) {
        let eta: Vec<f64> = mat_vec(self.x, beta).into_iter().map(|v| v + intercept).collect();
        let s = self.score(&eta);
        let xs = mat_t_vec(self.x, &s);
        let g: Vec<f64> = xs.iter().zip(beta).map(|(a, b)| lambda * b - a).collect();
        (-s.iter().sum::<f64>(), g)
    }

    fn score(&self, eta: &[f64]) -> Vec<f64> {
        self.y
            .iter()
            .zip(eta)
            .map(|(&y, &e)| (y - self.fl.linkinv_scalar(e)) * self.fl.score_factor(e))
            .collect()
    }

    fn evaluate(&self, lambda: f64, intercept: f64, coef: Vec<f64>, lin: Vec<f64>) -> Iterate {
        let eta: Vec<f64> = lin.iter().map(|v| v + intercept).collect();
        let penalty = dot(&coef, &lin_or_coef(self.gram.is_some(), &lin, &coef));
        let objective = 0.5 * self.fl.deviance_eta(self.y, &eta) + 0.5 * lambda * penalty;
        let s = self.score(&eta);
        let g0 = s.iter().sum::<f64>();
        let gb2 = match &self.gram {
            Some(k) => {
                let r: Vec<f64> = coef.iter().zip(&s).map(|(v, si)| lambda * v - si).collect();
                let kr = k * DVector::from_column_slice(&r);
                dot(&r, kr.as_slice()).max(0.0)
            }
            None => {
                let xs = mat_t_vec(self.x, &s);
                xs.iter().zip(&coef).map(|(a, b)| (lambda * b - a).powi(2)).sum()
            }
        };
        Iterate { intercept, coef, lin, eta, penalty, objective, grad_norm: (g0 * g0 + gb2).sqrt() }
    }

    fn linear_part(&self, coef: &[f64]) -> Vec<f64> {
        match &self.gram {
            Some(k) => (k * DVector::from_column_slice(coef)).as_slice().to_vec(),
            None => mat_vec(self.x, coef),
        }
    }

    fn fit_inner(&self, lambda: f64, start: Option<(f64, Vec<f64>)>) -> Result<RidgeFit> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(SparError::param(format!("lambda must be positive and finite, got {lambda}")));
        }
        let n = self.y.len();
        let dim = self.gram.as_ref().map_or(self.x.ncols(), |k| k.nrows());
        let (b0, coef) = start.unwrap_or_else(|| {
            let ybar = self.y.iter().sum::<f64>() / n as f64;
            (self.fl.initial_eta(ybar), vec![0.0; dim])
        });
        let lin = self.linear_part(&coef);
        let mut cur = self.evaluate(lambda, b0, coef, lin);
        if !cur.objective.is_finite() {
            return Err(SparError::numerical("objective is not finite at the start point"));
        }
        let tol = self.config.tol * cur.grad_norm.max(1.0);
        let mut trace = vec![cur.objective];
        let mut iterations = 0;
        let mut converged = cur.grad_norm <= tol;

        while !converged && iterations < self.config.max_iter {
            iterations += 1;
            let (t_b0, t_coef) = self.newton_target(lambda, &cur)?;
            let t_lin = self.linear_part(&t_coef);
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=self.config.max_halvings {
                let coef: Vec<f64> = cur.coef.iter().zip(&t_coef).map(|(a, b)| a + step * (b - a)).collect();
                let lin: Vec<f64> = cur.lin.iter().zip(&t_lin).map(|(a, b)| a + step * (b - a)).collect();
                let cand = self.evaluate(lambda, cur.intercept + step * (t_b0 - cur.intercept), coef, lin);
                let slack = 1e-12 * (1.0 + cur.objective.abs());
                if cand.objective.is_finite()
                    && (cand.objective < cur.objective
                        || (cand.objective <= cur.objective + slack && cand.grad_norm < cur.grad_norm))
                {
                    accepted = Some(cand);
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some(next) => {
                    cur = next;
                    trace.push(cur.objective);
                    converged = cur.grad_norm <= tol;
                }
                None => break,
            }
        }

        let deviance = self.fl.deviance_eta(self.y, &cur.eta);
        let deviance_ratio = if self.null_deviance > 0.0 { 1.0 - deviance / self.null_deviance } else { 0.0 };
        let (beta, dual) = match &self.gram {
            Some(_) => (mat_t_vec(self.x, &cur.coef), Some(cur.coef)),
            None => (cur.coef, None),
        };
        debug_assert!(cur.penalty >= 0.0);
        Ok(RidgeFit {
            beta,
            intercept: cur.intercept,
            lambda,
            deviance,
            null_deviance: self.null_deviance,
            deviance_ratio,
            iterations,
            converged,
            objective_trace: trace,
            dual,
        })
    }

    /// Minimizer of the weighted least-squares surrogate at the current iterate.
    fn newton_target(&self, lambda: f64, cur: &Iterate) -> Result<(f64, Vec<f64>)> {
        let n = self.y.len();
        let mut sw = vec![0.0; n];
        let mut swz = vec![0.0; n];
        for i in 0..n {
            let e = cur.eta[i];
            let mu = self.fl.linkinv_scalar(e);
            let sd = self.fl.variance(mu).max(f64::EPSILON).sqrt();
            sw[i] = self.fl.mu_eta(e) / sd;
            swz[i] = sw[i] * e + (self.y[i] - mu) / sd;
        }
        let w: Vec<f64> = sw.iter().map(|s| s * s).collect();
        let s: f64 = w.iter().sum();
        let zbar = dot(&sw, &swz) / s;
        let rhs: Vec<f64> = swz.iter().zip(&sw).map(|(a, b)| a - b * zbar).collect();

        match &self.gram {
            Some(k) => {
                let kw = (k * DVector::from_column_slice(&w)).as_slice().to_vec();
                let wkw = dot(&w, &kw);
                let a = DMatrix::from_fn(n, n, |i, j| {
                    let kc = k[(i, j)] - kw[i] / s - kw[j] / s + wkw / (s * s);
                    sw[i] * sw[j] * kc + if i == j { lambda } else { 0.0 }
                });
                let c = solve_spd(a, &rhs)?;
                let av: Vec<f64> = sw.iter().zip(&c).map(|(a, b)| a * b).collect();
                let sa: f64 = av.iter().sum();
                let v: Vec<f64> = av.iter().zip(&w).map(|(a, wi)| a - wi * sa / s).collect();
                let kv = (k * DVector::from_column_slice(&v)).as_slice().to_vec();
                let b0 = zbar - dot(&w, &kv) / s;
                Ok((b0, v))
            }
            None => {
                let p = self.x.ncols();
                let xbar: Vec<f64> = mat_t_vec(self.x, &w).into_iter().map(|v| v / s).collect();
                let m = DMatrix::from_fn(n, p, |i, j| sw[i] * (self.x[(i, j)] - xbar[j]));
                let mut h = m.tr_mul(&m);
                for j in 0..p {
                    h[(j, j)] += lambda;
                }
                let g = m.tr_mul(&DVector::from_vec(rhs));
                let beta = solve_spd(h, g.as_slice())?;
                let b0 = zbar - dot(&xbar, &beta);
                Ok((b0, beta))
            }
        }
    }
}

fn lin_or_coef<'v>(dual: bool, lin: &'v [f64], coef: &'v [f64]) -> &'v [f64] {
    // ‖β‖² is v'Kv in dual mode and β'β in primal mode.
    if dual {
        lin
    } else {
        coef
    }
}

/// Cholesky solve with a small diagonal boost on failure.
fn solve_spd(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    let b = DVector::from_column_slice(b);
    let scale = (a.trace() / n as f64).abs().max(f64::MIN_POSITIVE);
    let mut boost = 0.0;
    for _ in 0..6 {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] += boost;
        }
        if let Some(x) = cholesky_solve(m, &b) {
            return Ok(x.as_slice().to_vec());
        }
        boost = if boost == 0.0 { 1e-12 * scale } else { boost * 100.0 };
    }
    Err(SparError::numerical("IRLS system is not positive definite"))
}

/// Controls for the λ grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub n_lambda: usize,
    /// Smallest λ as a fraction of λ_max.
    pub ratio_min: f64,
    /// Stop descending once a fit's deviance ratio exceeds this value.
    pub stop_above: Option<f64>,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { n_lambda: 100, ratio_min: 1e-4, stop_above: None }
    }
}

/// Ridge fits along a log-equally-spaced decreasing λ grid.
#[derive(Debug, Clone)]
pub struct LambdaPath {
    /// The full grid; `fits` may be shorter when the path stopped early.
    pub values: Vec<f64>,
    pub fits: Vec<RidgeFit>,
    pub null_deviance: f64,
}

/// Log-equally-spaced grid from `lambda_max` down to `lambda_max·ratio_min`.
pub fn lambda_grid(lambda_max: f64, n_lambda: usize, ratio_min: f64) -> Vec<f64> {
    let step = ratio_min.ln() / (n_lambda - 1) as f64;
    let mut values: Vec<f64> = (0..n_lambda).map(|i| lambda_max * (step * i as f64).exp()).collect();
    values[n_lambda - 1] = lambda_max * ratio_min;
    values
}

/// Smallest λ worth considering: the fit explains under 1% of the null deviance.
pub fn lambda_max(solver: &RidgeSolver<'_>) -> Result<(f64, RidgeFit)> {
    let y = solver.y;
    let fl = solver.fl;
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let eta0 = fl.initial_eta(ybar);
    let s0: Vec<f64> = y.iter().map(|&yi| (yi - ybar) * fl.score_factor(eta0)).collect();
    let q = mat_t_vec(solver.x, &s0).iter().map(|v| v * v).sum::<f64>();
    let mut lambda = if q > 1e-300 { q / (0.0025 * solver.null_deviance) } else { 1.0 };
    for _ in 0..30 {
        let fit = solver.fit(lambda)?;
        if fit.deviance_ratio < 0.01 {
            return Ok((lambda, fit));
        }
        lambda *= 10.0;
    }
    Err(SparError::numerical("could not find a lambda with deviance ratio below 0.01"))
}

/// Fits the ridge path with warm starts in decreasing λ order.
pub fn lambda_path(solver: &RidgeSolver<'_>, config: &PathConfig) -> Result<LambdaPath> {
    if config.n_lambda < 2 {
        return Err(SparError::param("n_lambda must be at least 2"));
    }
    if !(config.ratio_min > 0.0 && config.ratio_min < 1.0) {
        return Err(SparError::param("ratio_min must lie in (0, 1)"));
    }
    if solver.degenerate {
        return Err(SparError::DegenerateResponse("null deviance is zero".into()));
    }
    let (lmax, first) = lambda_max(solver)?;
    let values = lambda_grid(lmax, config.n_lambda, config.ratio_min);
    let mut fits = vec![first];
    for &lambda in &values[1..] {
        let prev = fits.last().expect("path starts with one fit");
        if let Some(stop) = config.stop_above {
            if fits.len() >= 2 && prev.deviance_ratio > stop {
                break;
            }
        }
        let fit = solver.fit_warm(lambda, prev)?;
        fits.push(fit);
    }
    Ok(LambdaPath { values, fits, null_deviance: solver.null_deviance })
}

/// Default deviance-ratio threshold for λ selection.
pub fn default_ratio_threshold(fl: FamilyLink) -> f64 {
    match fl.family() {
        Family::Gaussian => 0.999,
        Family::Binomial | Family::Poisson => 0.8,
    }
}

/// Outcome of a λ selection rule.
#[derive(Debug, Clone)]
pub struct LambdaSelection {
    pub lambda: f64,
    /// Position of the chosen λ on the path grid.
    pub index: usize,
    pub fit: RidgeFit,
    /// Every fitted λ exceeded the threshold; the largest λ was returned.
    pub saturated: bool,
}

/// Smallest λ on the path whose deviance ratio does not exceed the threshold.
pub fn select_lambda_min(path: &LambdaPath, fl: FamilyLink, threshold: Option<f64>) -> Result<LambdaSelection> {
    if path.fits.is_empty() {
        return Err(SparError::param("lambda path is empty"));
    }
    let threshold = threshold.unwrap_or_else(|| default_ratio_threshold(fl));
    let chosen = (0..path.fits.len()).rev().find(|&i| path.fits[i].deviance_ratio <= threshold);
    match chosen {
        Some(i) => Ok(LambdaSelection { lambda: path.fits[i].lambda, index: i, fit: path.fits[i].clone(), saturated: false }),
        None => {
            log::warn!("every lambda on the path explains more than {threshold} of the null deviance; using the largest");
            Ok(LambdaSelection { lambda: path.fits[0].lambda, index: 0, fit: path.fits[0].clone(), saturated: true })
        }
    }
}

/// λ with the smallest training deviance, i.e. the end of the fitted path.
pub fn select_lambda_train_dev(path: &LambdaPath) -> Result<LambdaSelection> {
    let (index, fit) = path
        .fits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.deviance.total_cmp(&b.1.deviance))
        .ok_or_else(|| SparError::param("lambda path is empty"))?;
    Ok(LambdaSelection { lambda: fit.lambda, index, fit: fit.clone(), saturated: false })
}

/// K-fold cross-validated λ by held-out deviance over the full-data grid.
pub fn select_lambda_cv<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    y: &[f64],
    fl: FamilyLink,
    irls: IrlsConfig,
    path_config: &PathConfig,
    folds: usize,
    rng: &mut R,
) -> Result<LambdaSelection> {
    let solver = RidgeSolver::new(x, y, fl, irls)?;
    let full = lambda_path(&solver, &PathConfig { stop_above: None, ..*path_config })?;
    let assignment = cv::assign_folds(y, fl, folds, rng)?;
    let per_fold: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|f| -> Result<Vec<f64>> {
            let (train, test) = cv::split(&assignment, f);
            let xtr = select_rows(x, &train);
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let xte = select_rows(x, &test);
            let yte: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            let fold_solver = RidgeSolver::new(&xtr, &ytr, fl, irls)?;
            let mut out = Vec::with_capacity(full.values.len());
            let mut prev: Option<RidgeFit> = None;
            for &lambda in &full.values {
                let fit = match &prev {
                    Some(p) => fold_solver.fit_warm(lambda, p)?,
                    None => fold_solver.fit(lambda)?,
                };
                out.push(fl.deviance_eta(&yte, &fit.predict_eta(&xte)?));
                prev = Some(fit);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let index = (0..full.values.len())
        .min_by(|&a, &b| {
            let sa: f64 = per_fold.iter().map(|d| d[a]).sum();
            let sb: f64 = per_fold.iter().map(|d| d[b]).sum();
            sa.total_cmp(&sb)
        })
        .expect("grid has at least two values");
    let fit = full.fits[index].clone();
    Ok(LambdaSelection { lambda: fit.lambda, index, fit, saturated: false })
}

/// Location estimator removed from columns and from g(y) before the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centering {
    Mean,
    Median,
    None,
}

/// Settings for the closed-form small-λ limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolpConfig {
    pub centering: Centering,
    /// Diagonal jitter added to XX'; `None` uses 1e-8·trace(XX')/n.
    pub jitter: Option<f64>,
    /// Replacement for Poisson zeros before taking logs.
    pub poisson_zero: f64,
    /// Replacements for binomial 0 and 1 responses.
    pub binomial_low: f64,
    pub binomial_high: f64,
}

impl Default for HolpConfig {
    fn default() -> Self {
        HolpConfig { centering: Centering::Mean, jitter: None, poisson_zero: 0.5, binomial_low: 0.25, binomial_high: 0.75 }
    }
}

/// Closed-form limit coefficient and whether the response needed correcting.
#[derive(Debug, Clone)]
pub struct HolpLimit {
    pub beta: Vec<f64>,
    /// Some responses were moved off the boundary of the link's domain.
    pub corrected: bool,
}

/// Applies the continuity corrections that make g(y) finite.
pub fn corrected_response(y: &[f64], fl: FamilyLink, config: &HolpConfig) -> (Vec<f64>, bool) {
    let mut corrected = false;
    let out = y
        .iter()
        .map(|&v| match fl.family() {
            Family::Poisson if v <= 0.0 => {
                corrected = true;
                config.poisson_zero
            }
            Family::Binomial if v <= 0.0 => {
                corrected = true;
                config.binomial_low
            }
            Family::Binomial if v >= 1.0 => {
                corrected = true;
                config.binomial_high
            }
            _ => v,
        })
        .collect();
    (out, corrected)
}

/// `X_c'(X_cX_c' + jitter·I)⁻¹ g_c(y)`, the limit of the ridge estimator as λ → 0
/// for canonical links.
pub fn holp_glm_limit(x: &DMatrix<f64>, y: &[f64], fl: FamilyLink, config: &HolpConfig) -> Result<HolpLimit> {
    if !fl.is_canonical() {
        return Err(SparError::param(format!("the closed-form limit requires a canonical link, got {fl}")));
    }
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(SparError::dim(format!("design has {n} rows, response has {}", y.len())));
    }
    if fl.link() != Link::Identity {
        fl.check_response(y, false)?;
    }
    let (yc, corrected) = corrected_response(y, fl, config);
    let mut g = fl.linkfun(&yc)?;
    let mut xc = x.clone();
    let locate = |v: &mut Vec<f64>| match config.centering {
        Centering::Mean => v.iter().sum::<f64>() / v.len() as f64,
        Centering::Median => median(v),
        Centering::None => 0.0,
    };
    for j in 0..p {
        let mut col: Vec<f64> = xc.column(j).iter().copied().collect();
        let c = locate(&mut col);
        xc.column_mut(j).add_scalar_mut(-c);
    }
    let gc = locate(&mut g.clone());
    g.iter_mut().for_each(|v| *v -= gc);

    let mut k = outer_gram(&xc);
    let jitter = match config.jitter {
        Some(j) if j >= 0.0 => j,
        Some(j) => return Err(SparError::param(format!("jitter must be nonnegative, got {j}"))),
        None => 1e-8 * k.trace() / n as f64,
    };
    for i in 0..n {
        k[(i, i)] += jitter;
    }
    let c = cholesky_solve(k, &DVector::from_vec(g))
        .ok_or_else(|| SparError::numerical("XX' is singular; increase the jitter"))?;
    Ok(HolpLimit { beta: mat_t_vec(&xc, c.as_slice()), corrected })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
