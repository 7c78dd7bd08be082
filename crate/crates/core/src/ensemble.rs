//! The SPAR ensemble: screened, randomly projected marginal GLMs that are
//! thresholded and averaged, with optional cross-validation of the number of
//! models and the threshold.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cv;
use crate::error::{Result, SparError};
use crate::family::FamilyLink;
use crate::linalg::select_rows;
use crate::projection::CwProjection;
use crate::ridge::{IrlsConfig, RidgeFit, RidgeSolver};
use crate::rng::{stream, SparRng, FOLD_STREAM};
use crate::screening::{compute_screening_coefficient, sample_screening_set, screening_weights, ScreeningCoefficient, ScreeningConfig};

/// Stream used by the screening-coefficient selector (only the CV selector draws from it).
const SCREENING_STREAM: u64 = u64::MAX - 1;

/// Per-column centers and scales of a training design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
    /// Zero-variance columns; standardized to 0 and never screened or projected.
    pub degenerate: Vec<bool>,
}

impl Scaling {
    /// Identity scaling for `p` columns.
    pub fn identity(p: usize) -> Self {
        Scaling { centers: vec![0.0; p], scales: vec![1.0; p], degenerate: vec![false; p] }
    }

    pub fn dim(&self) -> usize {
        self.centers.len()
    }

    /// Applies the stored centering and scaling to new rows.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.dim() {
            return Err(SparError::dim(format!("expected {} columns, got {}", self.dim(), x.ncols())));
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            if self.degenerate[j] {
                0.0
            } else {
                (x[(i, j)] - self.centers[j]) / self.scales[j]
            }
        }))
    }

    /// Maps standardized-scale coefficients and intercept to the original scale.
    pub fn back_transform(&self, beta_std: &[f64], intercept_std: f64) -> (Vec<f64>, f64) {
        let beta: Vec<f64> = beta_std
            .iter()
            .enumerate()
            .map(|(j, &b)| if self.degenerate[j] { 0.0 } else { b / self.scales[j] })
            .collect();
        let shift: f64 = beta.iter().zip(&self.centers).map(|(b, c)| b * c).sum();
        (beta, intercept_std - shift)
    }
}

/// A design standardized to column mean 0 and unit sample standard deviation.
#[derive(Debug, Clone)]
pub struct StandardizedDesign {
    pub x: DMatrix<f64>,
    pub scaling: Scaling,
}

impl StandardizedDesign {
    pub fn eligible(&self) -> Vec<bool> {
        self.scaling.degenerate.iter().map(|d| !d).collect()
    }
}

/// Centers each column and divides by its sample standard deviation (divisor n − 1).
pub fn standardize(x: &DMatrix<f64>) -> Result<StandardizedDesign> {
    let (n, p) = x.shape();
    if n < 2 {
        return Err(SparError::param("standardization needs at least two rows"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SparError::Data("design contains non-finite values".into()));
    }
    let mut out = x.clone();
    let mut centers = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    let mut degenerate = Vec::with_capacity(p);
    for mut col in out.column_iter_mut() {
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        let flat = !(sd > 0.0) || col.iter().all(|v| *v == col[0]);
        centers.push(mean);
        if flat {
            col.fill(0.0);
            scales.push(1.0);
        } else {
            col.iter_mut().for_each(|v| *v = (*v - mean) / sd);
            scales.push(sd);
        }
        degenerate.push(flat);
    }
    Ok(StandardizedDesign { x: out, scaling: Scaling { centers, scales, degenerate } })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Average linear predictors (coefficients) across members.
    Link,
    /// Average member predictions on the response scale.
    Response,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    MinScore,
    OneStandardError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningMode {
    /// Each member draws 2n columns with probability proportional to |α̂|.
    Probabilistic,
    /// Every member uses all non-degenerate columns.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalMode {
    /// Projection diagonal carries the screening coefficient.
    Screening,
    /// Independent ±1 diagonal.
    RandomSign,
}

/// Settings of a SPAR fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparConfig {
    pub family_link: FamilyLink,
    /// Number of members; defaults to 20, or 50 with cross-validation.
    pub m_max: Option<usize>,
    /// Threshold used when cross-validation is off.
    pub nu: f64,
    pub cv: bool,
    pub cv_folds: usize,
    pub nu_grid_size: usize,
    pub selection_rule: SelectionRule,
    pub averaging: Averaging,
    /// Relative ridge penalty of member fits, scaled by null deviance / m_k.
    pub marginal_ridge_penalty: f64,
    pub screening: ScreeningConfig,
    pub screening_mode: ScreeningMode,
    pub diagonal: DiagonalMode,
    /// Fixed projection dimension instead of the random draw.
    pub m_override: Option<usize>,
    pub member_irls: IrlsConfig,
    pub seed: u64,
}

impl SparConfig {
    pub fn new(family_link: FamilyLink) -> Self {
        SparConfig {
            family_link,
            m_max: None,
            nu: 0.0,
            cv: false,
            cv_folds: 10,
            nu_grid_size: 20,
            selection_rule: SelectionRule::MinScore,
            averaging: Averaging::Link,
            marginal_ridge_penalty: 1e-4,
            screening: ScreeningConfig::default(),
            screening_mode: ScreeningMode::Probabilistic,
            diagonal: DiagonalMode::Screening,
            m_override: None,
            member_irls: IrlsConfig::default(),
            seed: 0,
        }
    }

    pub fn models(&self) -> usize {
        self.m_max.unwrap_or(if self.cv { 50 } else { 20 })
    }

    fn needs_screening_coefficient(&self) -> bool {
        self.screening_mode == ScreeningMode::Probabilistic || self.diagonal == DiagonalMode::Screening
    }

    fn validate(&self) -> Result<()> {
        if self.models() == 0 {
            return Err(SparError::param("the ensemble needs at least one model"));
        }
        if self.cv && self.cv_folds < 2 {
            return Err(SparError::param("cross-validation needs at least two folds"));
        }
        if self.cv && self.nu_grid_size == 0 {
            return Err(SparError::param("the threshold grid is empty"));
        }
        if !(self.nu >= 0.0) {
            return Err(SparError::param("threshold must be nonnegative"));
        }
        if !(self.marginal_ridge_penalty > 0.0 && self.marginal_ridge_penalty.is_finite()) {
            return Err(SparError::param("marginal ridge penalty must be positive"));
        }
        if self.m_override == Some(0) {
            return Err(SparError::param("projection dimension must be positive"));
        }
        Ok(())
    }
}

/// One ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalModel {
    /// Screened columns, sorted.
    pub indices: Vec<usize>,
    pub projection: CwProjection,
    pub gamma: Vec<f64>,
    pub intercept: f64,
    /// Standardized-scale coefficients of `indices`, equal to Φ'γ.
    pub beta: Vec<f64>,
    pub penalty: f64,
    pub converged: bool,
}

impl MarginalModel {
    pub fn m(&self) -> usize {
        self.projection.m()
    }

    /// Coefficients as a dense length-`p` vector.
    pub fn beta_dense(&self, p: usize) -> Vec<f64> {
        let mut b = vec![0.0; p];
        for (&j, &v) in self.indices.iter().zip(&self.beta) {
            b[j] = v;
        }
        b
    }

    /// Linear predictor on standardized rows with coefficients below `nu` zeroed.
    pub fn eta(&self, x_std: &DMatrix<f64>, nu: f64) -> Vec<f64> {
        let mut eta = vec![self.intercept; x_std.nrows()];
        for (&j, &b) in self.indices.iter().zip(&self.beta) {
            if b.abs() >= nu && b != 0.0 {
                for (e, v) in eta.iter_mut().zip(x_std.column(j).iter()) {
                    *e += b * v;
                }
            }
        }
        eta
    }
}

/// Draws the member structure and fits its reduced GLM.
pub fn fit_marginal(
    design: &StandardizedDesign,
    y: &[f64],
    config: &SparConfig,
    alpha: Option<&ScreeningCoefficient>,
    k: u64,
) -> Result<MarginalModel> {
    let mut rng = stream(config.seed, k);
    let (n, p) = design.x.shape();
    let eligible = design.eligible();
    let indices = match (config.screening_mode, alpha) {
        (ScreeningMode::Probabilistic, Some(a)) => sample_screening_set(&a.alpha, n, Some(&eligible), &mut rng)?,
        (ScreeningMode::Probabilistic, None) => return Err(SparError::param("probabilistic screening needs a screening coefficient")),
        (ScreeningMode::None, _) => (0..p).filter(|&j| eligible[j]).collect(),
    };
    if indices.is_empty() {
        return Err(SparError::param("no non-degenerate columns to project"));
    }
    let q = indices.len();
    let m = match config.m_override {
        Some(m) => m.min(q),
        None => draw_projection_dim(n, p, q, &mut rng),
    };
    let projection = match config.diagonal {
        DiagonalMode::Screening => {
            let a = alpha.ok_or_else(|| SparError::param("data-informed projection needs a screening coefficient"))?;
            let weights = screening_weights(&a.alpha, Some(&eligible))?;
            let floor = weights.iter().copied().filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
            let diag = indices.iter().map(|&j| if a.alpha[j] != 0.0 { a.alpha[j] } else { floor }).collect();
            CwProjection::sample(m, diag, &mut rng)?
        }
        DiagonalMode::RandomSign => CwProjection::sample_random_sign(m, q, &mut rng)?,
    };
    let z = projection.apply_columns(&design.x, &indices);
    let null = config.family_link.null_deviance(y).value;
    let mut penalty = config.marginal_ridge_penalty * null.max(f64::MIN_POSITIVE) / m as f64;
    let solver = RidgeSolver::new(&z, y, config.family_link, config.member_irls)?;
    let mut fit = solver.fit(penalty)?;
    if !fit.converged {
        log::warn!("member {k} did not converge; refitting with a 10x penalty");
        penalty *= 10.0;
        fit = solver.fit(penalty)?;
    }
    let beta = projection.back_project(&fit.beta);
    Ok(MarginalModel { indices, projection, gamma: fit.beta, intercept: fit.intercept, beta, penalty, converged: fit.converged })
}

/// m_k uniform on {⌈ln p⌉, …, ⌊n/2⌋}, capped at the screened count.
fn draw_projection_dim(n: usize, p: usize, q: usize, rng: &mut SparRng) -> usize {
    let lo = ((p as f64).ln().ceil() as usize).max(1);
    let hi = (n / 2).max(1);
    let m = if lo > hi { hi } else { rng.random_range(lo..=hi) };
    m.min(q).max(1)
}

/// Zeroes member coefficients below `nu`, averages the first `m` members on
/// the standardized scale and back-transforms to the original scale.
pub fn threshold_and_average(members: &[MarginalModel], nu: f64, m: usize, scaling: &Scaling) -> Result<(Vec<f64>, f64)> {
    if m == 0 || m > members.len() {
        return Err(SparError::param(format!("cannot average {m} of {} members", members.len())));
    }
    let p = scaling.dim();
    let mut beta = vec![0.0; p];
    let mut intercept = 0.0;
    for member in &members[..m] {
        for (&j, &b) in member.indices.iter().zip(&member.beta) {
            if b.abs() >= nu {
                beta[j] += b;
            }
        }
        intercept += member.intercept;
    }
    let inv = 1.0 / m as f64;
    beta.iter_mut().for_each(|b| *b *= inv);
    Ok(scaling.back_transform(&beta, intercept * inv))
}

/// Cross-validation scores over the (ν, M) grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvTable {
    pub nu_grid: Vec<f64>,
    /// Ensemble sizes 1..=M_max.
    pub m_grid: Vec<usize>,
    /// Mean held-out deviance per observation, indexed `[nu][m]`.
    pub mean: Vec<Vec<f64>>,
    /// Standard error of the fold scores, indexed `[nu][m]`.
    pub se: Vec<Vec<f64>>,
    /// Nonzeros of the full-data averaged coefficient, indexed `[nu][m]`.
    pub nonzeros: Vec<Vec<usize>>,
    /// Fold of every training observation.
    pub fold_of: Vec<usize>,
    /// Per-fold scores, indexed `[fold][nu][m]`.
    pub fold_scores: Vec<Vec<Vec<f64>>>,
}

/// Cell with the smallest mean score; ties go to larger ν, then smaller M.
pub fn min_score_select(table: &CvTable) -> (usize, f64) {
    let (i, j) = best_cell(table);
    (table.m_grid[j], table.nu_grid[i])
}

fn best_cell(table: &CvTable) -> (usize, usize) {
    let mut best = (0, 0);
    for i in 0..table.nu_grid.len() {
        for j in 0..table.m_grid.len() {
            let (bi, bj) = best;
            let (s, bs) = (table.mean[i][j], table.mean[bi][bj]);
            if s < bs || (s == bs && prefer(table, (i, j), (bi, bj))) {
                best = (i, j);
            }
        }
    }
    best
}

fn prefer(table: &CvTable, a: (usize, usize), b: (usize, usize)) -> bool {
    let (nu_a, nu_b) = (table.nu_grid[a.0], table.nu_grid[b.0]);
    nu_a > nu_b || (nu_a == nu_b && table.m_grid[a.1] < table.m_grid[b.1])
}

/// Among cells within one standard error of the best mean score, the one with
/// the sparsest averaged coefficient; ties go to larger ν, then smaller M.
pub fn one_standard_error_select(table: &CvTable) -> (usize, f64) {
    let (bi, bj) = best_cell(table);
    let limit = table.mean[bi][bj] + table.se[bi][bj];
    let mut chosen = (bi, bj);
    for i in 0..table.nu_grid.len() {
        for j in 0..table.m_grid.len() {
            if table.mean[i][j] > limit {
                continue;
            }
            let (ci, cj) = chosen;
            let (nz, cnz) = (table.nonzeros[i][j], table.nonzeros[ci][cj]);
            if nz < cnz || (nz == cnz && prefer(table, (i, j), chosen)) {
                chosen = (i, j);
            }
        }
    }
    (table.m_grid[chosen.1], table.nu_grid[chosen.0])
}

/// Type-7 sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 0 followed by `size − 1` equally spaced quantiles of the pooled nonzero
/// member coefficient magnitudes.
pub fn nu_grid(members: &[MarginalModel], size: usize) -> Result<Vec<f64>> {
    if size == 0 {
        return Err(SparError::param("the threshold grid is empty"));
    }
    let mut pooled: Vec<f64> = members.iter().flat_map(|m| m.beta.iter().map(|b| b.abs())).filter(|b| *b > 0.0).collect();
    let mut grid = vec![0.0];
    if pooled.is_empty() {
        return Ok(grid);
    }
    pooled.sort_by(f64::total_cmp);
    grid.extend((1..size).map(|i| quantile_sorted(&pooled, i as f64 / size as f64)));
    Ok(grid)
}

/// Fitted ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparModel {
    pub config: SparConfig,
    pub scaling: Scaling,
    pub screening: Option<ScreeningCoefficient>,
    /// All fitted members; the first `n_models` form the ensemble.
    pub members: Vec<MarginalModel>,
    pub n_models: usize,
    pub nu: f64,
    /// Averaged coefficients on the original predictor scale.
    pub beta_hat: Vec<f64>,
    pub intercept_hat: f64,
    pub cv_table: Option<CvTable>,
    pub train_response_mean: f64,
    pub n_train: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictKind {
    Link,
    Response,
}

impl SparModel {
    pub fn family_link(&self) -> FamilyLink {
        self.config.family_link
    }

    pub fn nonzeros(&self) -> usize {
        self.beta_hat.iter().filter(|b| **b != 0.0).count()
    }

    /// Training deviance ratio of the averaged model.
    pub fn deviance_ratio(&self, x: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
        let fl = self.family_link();
        let null = fl.null_deviance(y).value;
        if null == 0.0 {
            return Err(SparError::DegenerateResponse("null deviance is zero".into()));
        }
        let dev = match self.config.averaging {
            Averaging::Link => fl.deviance_eta(y, &self.predict(x, PredictKind::Link)?),
            Averaging::Response => fl.deviance(y, &self.predict(x, PredictKind::Response)?)?,
        };
        Ok(1.0 - dev / null)
    }

    /// Predictions for new rows on the original predictor scale.
    pub fn predict(&self, x: &DMatrix<f64>, kind: PredictKind) -> Result<Vec<f64>> {
        if x.ncols() != self.beta_hat.len() {
            return Err(SparError::dim(format!("model has {} predictors, data has {}", self.beta_hat.len(), x.ncols())));
        }
        let fl = self.family_link();
        match (self.config.averaging, kind) {
            (Averaging::Link, _) => {
                let eta: Vec<f64> =
                    crate::linalg::mat_vec(x, &self.beta_hat).into_iter().map(|v| v + self.intercept_hat).collect();
                Ok(if kind == PredictKind::Link { eta } else { fl.linkinv(&eta) })
            }
            (Averaging::Response, PredictKind::Link) => {
                Err(SparError::param("link-scale predictions are undefined under response-level averaging"))
            }
            (Averaging::Response, PredictKind::Response) => {
                let xs = self.scaling.transform(x)?;
                let mut out = vec![0.0; x.nrows()];
                for member in &self.members[..self.n_models] {
                    for (o, e) in out.iter_mut().zip(member.eta(&xs, self.nu)) {
                        *o += fl.linkinv_scalar(e);
                    }
                }
                let inv = 1.0 / self.n_models as f64;
                out.iter_mut().for_each(|o| *o *= inv);
                Ok(out)
            }
        }
    }
}

/// Fits SPAR on a raw design.
pub fn spar_fit(x: &DMatrix<f64>, y: &[f64], config: &SparConfig) -> Result<SparModel> {
    spar_fit_with(x, y, config, None)
}

/// Fits SPAR with an externally supplied standardized-scale screening
/// coefficient instead of computing one.
pub fn spar_fit_with(x: &DMatrix<f64>, y: &[f64], config: &SparConfig, alpha: Option<ScreeningCoefficient>) -> Result<SparModel> {
    config.validate()?;
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(SparError::dim(format!("design has {n} rows, response has {}", y.len())));
    }
    if n < 10 {
        return Err(SparError::param("at least 10 observations are required"));
    }
    if p < 2 {
        return Err(SparError::param("at least 2 predictors are required"));
    }
    let fl = config.family_link;
    fl.check_response(y, true)?;
    if fl.null_deviance(y).degenerate {
        return Err(SparError::DegenerateResponse("null deviance is zero".into()));
    }
    let design = standardize(x)?;
    let screening = match alpha {
        Some(a) => {
            if a.alpha.len() != p {
                return Err(SparError::dim(format!("screening coefficient has {} entries, design has {p} columns", a.alpha.len())));
            }
            Some(a)
        }
        None if config.needs_screening_coefficient() => {
            let mut rng = stream(config.seed, SCREENING_STREAM);
            Some(compute_screening_coefficient(&design.x, y, fl, &config.screening, &mut rng)?)
        }
        None => None,
    };
    let m_max = config.models();
    let members: Vec<MarginalModel> = (0..m_max as u64)
        .into_par_iter()
        .map(|k| fit_marginal(&design, y, config, screening.as_ref(), k))
        .collect::<Result<_>>()?;

    let (n_models, nu, cv_table) = if config.cv {
        let table = cross_validate(&design, y, config, &members)?;
        let (m, nu) = match config.selection_rule {
            SelectionRule::MinScore => min_score_select(&table),
            SelectionRule::OneStandardError => one_standard_error_select(&table),
        };
        (m, nu, Some(table))
    } else {
        (m_max, config.nu, None)
    };
    let (beta_hat, intercept_hat) = threshold_and_average(&members, nu, n_models, &design.scaling)?;
    Ok(SparModel {
        config: *config,
        scaling: design.scaling,
        screening,
        members,
        n_models,
        nu,
        beta_hat,
        intercept_hat,
        cv_table,
        train_response_mean: y.iter().sum::<f64>() / n as f64,
        n_train: n,
    })
}

/// Refits every member's reduced coefficients on each training fold with the
/// member structure held fixed and scores held-out deviance on the (ν, M) grid.
fn cross_validate(design: &StandardizedDesign, y: &[f64], config: &SparConfig, members: &[MarginalModel]) -> Result<CvTable> {
    let fl = config.family_link;
    let k_folds = config.cv_folds;
    let fold_of = cv::assign_folds(y, fl, k_folds, &mut stream(config.seed, FOLD_STREAM))?;
    let grid = nu_grid(members, config.nu_grid_size)?;
    let m_max = members.len();
    let z: Vec<DMatrix<f64>> = members.par_iter().map(|m| m.projection.apply_columns(&design.x, &m.indices)).collect();

    let fold_scores: Vec<Vec<Vec<f64>>> = (0..k_folds)
        .into_par_iter()
        .map(|f| -> Result<Vec<Vec<f64>>> {
            let (train, test) = cv::split(&fold_of, f);
            let ytr: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let yte: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            let xte = select_rows(&design.x, &test);
            let mut refits = Vec::with_capacity(m_max);
            for (member, zk) in members.iter().zip(&z) {
                let ztr = select_rows(zk, &train);
                let fit: RidgeFit = RidgeSolver::new(&ztr, &ytr, fl, config.member_irls)?.fit(member.penalty)?;
                refits.push(MarginalModel {
                    beta: member.projection.back_project(&fit.beta),
                    gamma: fit.beta,
                    intercept: fit.intercept,
                    converged: fit.converged,
                    ..member.clone()
                });
            }
            let mut scores = vec![vec![0.0; m_max]; grid.len()];
            for (i, &nu) in grid.iter().enumerate() {
                let mut sum = vec![0.0; test.len()];
                for (j, refit) in refits.iter().enumerate() {
                    for (s, e) in sum.iter_mut().zip(refit.eta(&xte, nu)) {
                        *s += e;
                    }
                    let inv = 1.0 / (j + 1) as f64;
                    let eta: Vec<f64> = sum.iter().map(|s| s * inv).collect();
                    scores[i][j] = fl.deviance_eta(&yte, &eta) / test.len() as f64;
                }
            }
            Ok(scores)
        })
        .collect::<Result<_>>()?;

    let kf = k_folds as f64;
    let mut mean = vec![vec![0.0; m_max]; grid.len()];
    let mut se = vec![vec![0.0; m_max]; grid.len()];
    let mut nonzeros = vec![vec![0usize; m_max]; grid.len()];
    for (i, &nu) in grid.iter().enumerate() {
        for j in 0..m_max {
            let vals: Vec<f64> = fold_scores.iter().map(|f| f[i][j]).collect();
            let mu = vals.iter().sum::<f64>() / kf;
            let var = vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (kf - 1.0);
            mean[i][j] = mu;
            se[i][j] = (var / kf).sqrt();
            let (b, _) = threshold_and_average(members, nu, j + 1, &design.scaling)?;
            nonzeros[i][j] = b.iter().filter(|v| **v != 0.0).count();
        }
    }
    Ok(CvTable { nu_grid: grid, m_grid: (1..=m_max).collect(), mean, se, nonzeros, fold_of, fold_scores })
}

/// Member coefficients of one variable on the original scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableCoefficients {
    pub count: usize,
    pub values: Vec<f64>,
}

/// For every variable, the coefficients it received in the members that
/// screened it (first `n_models` members, original scale).
pub fn coefficient_distribution(model: &SparModel) -> Vec<VariableCoefficients> {
    let p = model.scaling.dim();
    let mut out = vec![VariableCoefficients { count: 0, values: Vec::new() }; p];
    for member in &model.members[..model.n_models] {
        for (&j, &b) in member.indices.iter().zip(&member.beta) {
            let v = if model.scaling.degenerate[j] { 0.0 } else { b / model.scaling.scales[j] };
            out[j].count += 1;
            out[j].values.push(v);
        }
    }
    out
}
