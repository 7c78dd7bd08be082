//! Simulation experiments: screening recovery, single-projection comparisons
//! and ensemble benchmarks, reported as long-format result rows.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{spar_fit, standardize, DiagonalMode, PredictKind, SparConfig, ScreeningMode, StandardizedDesign};
use crate::error::{Result, SparError};
use crate::family::FamilyLink;
use crate::linalg::{mat_t_vec, mat_vec};
use crate::metrics;
use crate::projection::{sample_gaussian_rp, CwProjection};
use crate::ridge::RidgeSolver;
use crate::rng::{derive_seed, stream};
use crate::screening::{compute_screening_coefficient, screening_weights, ScreeningConfig, ScreeningSelector};
use crate::sim::{simulate, CovarianceKind, SimSpec, Simulation, Sparsity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ScreeningRecovery,
    ProjectionComparison,
    SparBenchmark,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::ScreeningRecovery => "screening_recovery",
            Scenario::ProjectionComparison => "projection_comparison",
            Scenario::SparBenchmark => "spar_benchmark",
        }
    }

    /// Every method the scenario understands.
    pub fn methods(&self) -> Vec<Method> {
        use Coefficient::*;
        match self {
            Scenario::ScreeningRecovery => {
                [L2Dev08, L2Dev095, L2Dev0999, L2Cv, HolpLimit, MarginalGlm].into_iter().map(Method::Screening).collect()
            }
            Scenario::ProjectionComparison => {
                let mut m: Vec<Method> = [L2Dev08, L2Dev095, L2Dev0999, L2Cv, HolpLimit, TrueBeta]
                    .into_iter()
                    .map(|c| Method::Projection(ProjectionDiagonal::Coefficient(c)))
                    .collect();
                m.push(Method::Projection(ProjectionDiagonal::RandomSign));
                m.push(Method::Projection(ProjectionDiagonal::GaussianRp));
                m
            }
            Scenario::SparBenchmark => vec![Method::Spar, Method::SparCv, Method::CwRandomSignEnsemble],
        }
    }

    pub fn parse_method(&self, name: &str) -> Result<Method> {
        self.methods()
            .into_iter()
            .find(|m| m.name() == name.trim())
            .ok_or_else(|| SparError::param(format!("unknown method '{name}' for scenario {}", self.name())))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = SparError;

    fn from_str(s: &str) -> Result<Self> {
        [Scenario::ScreeningRecovery, Scenario::ProjectionComparison, Scenario::SparBenchmark]
            .into_iter()
            .find(|sc| sc.name() == s.trim().replace('-', "_"))
            .ok_or_else(|| SparError::param(format!("unknown scenario '{s}'")))
    }
}

/// Coefficient estimates used for screening or as a projection diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    L2Dev08,
    L2Dev095,
    L2Dev0999,
    L2Cv,
    HolpLimit,
    TrueBeta,
    /// Slopes of per-predictor GLMs with intercept.
    MarginalGlm,
}

impl Coefficient {
    pub fn name(&self) -> &'static str {
        match self {
            Coefficient::L2Dev08 => "l2_dev08",
            Coefficient::L2Dev095 => "l2_dev095",
            Coefficient::L2Dev0999 => "l2_dev0999",
            Coefficient::L2Cv => "l2_cv",
            Coefficient::HolpLimit => "holp_limit",
            Coefficient::TrueBeta => "true_beta",
            Coefficient::MarginalGlm => "marginal_glm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionDiagonal {
    Coefficient(Coefficient),
    RandomSign,
    GaussianRp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spar,
    SparCv,
    /// 50 random-sign CW projections of all predictors, no screening.
    CwRandomSignEnsemble,
    Projection(ProjectionDiagonal),
    Screening(Coefficient),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Spar => "spar",
            Method::SparCv => "spar_cv",
            Method::CwRandomSignEnsemble => "cw_random_sign_ensemble",
            Method::Projection(ProjectionDiagonal::Coefficient(c)) | Method::Screening(c) => c.name(),
            Method::Projection(ProjectionDiagonal::RandomSign) => "random_sign",
            Method::Projection(ProjectionDiagonal::GaussianRp) => "gaussian_rp",
        }
    }
}

/// One simulation setting of an experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub family_link: FamilyLink,
    pub n: usize,
    pub p: usize,
    pub sparsity: Sparsity,
    pub covariance: CovarianceKind,
    pub n_test: usize,
    pub replications: usize,
}

impl GridCell {
    pub fn sim_spec(&self) -> SimSpec {
        SimSpec { n_test: self.n_test, ..SimSpec::new(self.family_link, self.n, self.p, self.sparsity, self.covariance) }
    }
}

fn default_timing() -> bool {
    true
}

/// A complete experiment description; also the layout of experiment config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub cells: Vec<GridCell>,
    /// Method names; empty means every method of the scenario.
    #[serde(default)]
    pub methods: Vec<String>,
    pub seed: u64,
    /// Target dimension of single projections; defaults to n/4.
    #[serde(default)]
    pub projection_dim: Option<usize>,
    /// Record wall-clock seconds. Disable for byte-reproducible output.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn resolved_methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Ok(self.scenario.methods());
        }
        self.methods.iter().map(|m| self.scenario.parse_method(m)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(SparError::param("the experiment grid is empty"));
        }
        for c in &self.cells {
            if c.replications == 0 {
                return Err(SparError::param("replications must be at least 1"));
            }
            if self.scenario != Scenario::ScreeningRecovery && c.n_test < 2 {
                return Err(SparError::param("prediction scenarios need n_test ≥ 2"));
            }
        }
        if self.projection_dim == Some(0) {
            return Err(SparError::param("projection dimension must be positive"));
        }
        self.resolved_methods().map(|_| ())
    }
}

/// One line of the long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub cell_id: usize,
    pub family_link: FamilyLink,
    pub p: usize,
    pub n: usize,
    pub sparsity: Sparsity,
    pub covariance: CovarianceKind,
    pub replication: usize,
    pub method: String,
    pub metric: String,
    /// Missing when the metric is undefined or the method was skipped.
    pub value: Option<f64>,
    pub seconds: f64,
    pub reason: Option<String>,
}

/// Column order of the results CSV.
pub const RESULT_COLUMNS: [&str; 12] =
    ["cell_id", "family_link", "p", "n", "sparsity", "covariance", "replication", "method", "metric", "value", "seconds", "reason"];

/// FNV-1a, so method seeds do not depend on method order.
fn name_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed of the data of one (cell, replication) work item.
pub fn item_seed(seed: u64, cell: usize, rep: usize) -> u64 {
    derive_seed(&[seed, cell as u64, rep as u64])
}

/// Seed handed to `method` within a work item.
pub fn method_seed(item_seed: u64, method: &str) -> u64 {
    derive_seed(&[item_seed, name_hash(method)])
}

/// Runs the whole grid. Work items run in parallel; rows come back ordered by
/// cell, replication and the requested method order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let methods = spec.resolved_methods()?;
    let items: Vec<(usize, usize)> =
        spec.cells.iter().enumerate().flat_map(|(c, cell)| (0..cell.replications).map(move |r| (c, r))).collect();
    let chunks: Vec<Vec<ResultRow>> = items
        .par_iter()
        .map(|&(c, r)| run_item(spec, &methods, c, r))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Output of one method on one replication, before it is turned into rows.
struct MethodOutcome {
    metrics: Vec<(&'static str, std::result::Result<f64, String>)>,
}

fn run_item(spec: &ExperimentSpec, methods: &[Method], cell_id: usize, rep: usize) -> Result<Vec<ResultRow>> {
    let cell = spec.cells[cell_id];
    let seed = item_seed(spec.seed, cell_id, rep);
    let sim = simulate(&cell.sim_spec(), &mut stream(seed, 0))?;
    let design = standardize(&sim.train.x)?;
    let mut rows = Vec::new();
    for method in methods {
        let name = method.name();
        let mseed = method_seed(seed, name);
        let start = Instant::now();
        let outcome = run_method(*method, &sim, &design, spec, mseed);
        let seconds = if spec.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        let row = |metric: &str, value: Option<f64>, reason: Option<String>| ResultRow {
            cell_id,
            family_link: cell.family_link,
            p: cell.p,
            n: cell.n,
            sparsity: cell.sparsity,
            covariance: cell.covariance,
            replication: rep,
            method: name.to_string(),
            metric: metric.to_string(),
            value,
            seconds,
            reason,
        };
        match outcome {
            Ok(out) => {
                for (metric, v) in out.metrics {
                    rows.push(match v {
                        Ok(v) => row(metric, Some(v), None),
                        Err(reason) => row(metric, None, Some(reason)),
                    });
                }
            }
            Err(e) => {
                log::warn!("{name} skipped on cell {cell_id}, replication {rep}: {e}");
                rows.push(row("skipped", None, Some(e.to_string())));
            }
        }
    }
    Ok(rows)
}

fn run_method(method: Method, sim: &Simulation, design: &StandardizedDesign, spec: &ExperimentSpec, seed: u64) -> Result<MethodOutcome> {
    let fl = sim.spec.family_link;
    match method {
        Method::Screening(c) => {
            let alpha = coefficient(c, sim, design, seed)?;
            let truth = &sim.model;
            let (a, b): (Vec<f64>, Vec<f64>) =
                (0..alpha.len()).filter(|&j| truth.active[j]).map(|j| (alpha[j], truth.beta[j])).unzip();
            let scores: Vec<f64> = alpha.iter().map(|v| v.abs()).collect();
            Ok(MethodOutcome {
                metrics: vec![
                    ("correlation", pearson(&a, &b)),
                    ("pauc", metrics::pauc(&truth.active, &scores, sim.spec.n).map_err(|e| e.to_string())),
                ],
            })
        }
        Method::Projection(diag) => {
            let (beta, b0) = single_projection(diag, sim, design, spec.projection_dim, seed)?;
            let test = test_set(sim)?;
            let eta_hat: Vec<f64> = mat_vec(&test.x, &beta).into_iter().map(|v| v + b0).collect();
            let y_hat = fl.linkinv(&eta_hat);
            Ok(prediction_metrics(sim, &beta, &eta_hat, &y_hat))
        }
        Method::Spar | Method::SparCv | Method::CwRandomSignEnsemble => {
            let base = SparConfig { seed, ..SparConfig::new(fl) };
            let config = match method {
                Method::Spar => base,
                Method::SparCv => SparConfig { cv: true, ..base },
                _ => SparConfig {
                    m_max: Some(50),
                    screening_mode: ScreeningMode::None,
                    diagonal: DiagonalMode::RandomSign,
                    ..base
                },
            };
            let model = spar_fit(&sim.train.x, &sim.train.y, &config)?;
            let test = test_set(sim)?;
            let eta_hat = model.predict(&test.x, PredictKind::Link)?;
            let y_hat = model.predict(&test.x, PredictKind::Response)?;
            let mut out = prediction_metrics(sim, &model.beta_hat, &eta_hat, &y_hat);
            out.metrics.push(("models", Ok(model.n_models as f64)));
            out.metrics.push(("nu", Ok(model.nu)));
            Ok(out)
        }
    }
}

fn test_set(sim: &Simulation) -> Result<&crate::sim::Dataset> {
    sim.test.as_ref().ok_or_else(|| SparError::param("scenario needs a test set"))
}

fn prediction_metrics(sim: &Simulation, beta: &[f64], eta_hat: &[f64], y_hat: &[f64]) -> MethodOutcome {
    let test = sim.test.as_ref().expect("checked by caller");
    let fl = sim.spec.family_link;
    let ybar = sim.train.y.iter().sum::<f64>() / sim.train.y.len() as f64;
    let s = |r: Result<f64>| r.map_err(|e| e.to_string());
    let scores: Vec<f64> = beta.iter().map(|b| b.abs()).collect();
    let mut m = vec![
        ("mspe", s(metrics::mspe(&test.y, y_hat))),
        ("rmspe", s(metrics::rmspe(&test.y, y_hat, ybar))),
        ("msle", s(metrics::msle(&test.eta, eta_hat))),
        ("rmsle", s(metrics::rmsle(&test.eta, eta_hat))),
    ];
    if fl.family() == crate::family::Family::Binomial {
        let labels: Vec<bool> = test.y.iter().map(|v| *v > 0.5).collect();
        m.push(("auc", s(metrics::auc(&labels, y_hat))));
    }
    m.push(("pauc", s(metrics::pauc(&sim.model.active, &scores, sim.spec.n))));
    m.push(("nonzeros", Ok(beta.iter().filter(|b| **b != 0.0).count() as f64)));
    MethodOutcome { metrics: m }
}

fn pearson(a: &[f64], b: &[f64]) -> std::result::Result<f64, String> {
    let n = a.len() as f64;
    if a.len() < 2 {
        return Err("fewer than two active coefficients".into());
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if saa == 0.0 || sbb == 0.0 {
        return Err("constant coefficients".into());
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Coefficient estimate on the standardized training design.
fn coefficient(c: Coefficient, sim: &Simulation, design: &StandardizedDesign, seed: u64) -> Result<Vec<f64>> {
    let fl = sim.spec.family_link;
    let y = &sim.train.y;
    let selector = match c {
        Coefficient::L2Dev08 => ScreeningSelector::DevianceRatio { threshold: Some(0.8) },
        Coefficient::L2Dev095 => ScreeningSelector::DevianceRatio { threshold: Some(0.95) },
        Coefficient::L2Dev0999 => ScreeningSelector::DevianceRatio { threshold: Some(0.999) },
        Coefficient::L2Cv => ScreeningSelector::Cv { folds: 10 },
        Coefficient::HolpLimit => ScreeningSelector::HolpLimit,
        Coefficient::TrueBeta => {
            return Ok(sim.model.beta.iter().zip(&design.scaling.scales).map(|(b, s)| b * s).collect());
        }
        Coefficient::MarginalGlm => return marginal_glm(&design.x, y, fl),
    };
    let cfg = ScreeningConfig { selector, ..ScreeningConfig::default() };
    Ok(compute_screening_coefficient(&design.x, y, fl, &cfg, &mut stream(seed, 0))?.alpha)
}

/// Penalty for the effectively unpenalized one-predictor fits.
const MARGINAL_LAMBDA: f64 = 1e-8;

/// Slope of a GLM of y on each single predictor with an intercept.
pub fn marginal_glm(x: &DMatrix<f64>, y: &[f64], fl: FamilyLink) -> Result<Vec<f64>> {
    (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let col = DMatrix::from_column_slice(x.nrows(), 1, x.column(j).as_slice());
            if col.iter().all(|v| *v == col[0]) {
                return Ok(0.0);
            }
            Ok(RidgeSolver::new(&col, y, fl, Default::default())?.fit(MARGINAL_LAMBDA)?.beta[0])
        })
        .collect()
}

/// Projects all non-degenerate predictors once, fits the reduced GLM and
/// returns coefficients on the original scale.
fn single_projection(
    diag: ProjectionDiagonal,
    sim: &Simulation,
    design: &StandardizedDesign,
    dim: Option<usize>,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    let fl = sim.spec.family_link;
    let y = &sim.train.y;
    let (n, p) = design.x.shape();
    let eligible = design.eligible();
    let cols: Vec<usize> = (0..p).filter(|&j| eligible[j]).collect();
    let q = cols.len();
    let m = dim.unwrap_or((n / 4).max(1)).min(q);
    let mut rng = stream(seed, 1);
    let sub = DMatrix::from_fn(n, q, |i, k| design.x[(i, cols[k])]);
    let (z, back): (DMatrix<f64>, Box<dyn Fn(&[f64]) -> Vec<f64>>) = match diag {
        ProjectionDiagonal::GaussianRp => {
            let phi = sample_gaussian_rp(m, q, &mut rng)?;
            let z = &sub * phi.transpose();
            (z, Box::new(move |g: &[f64]| mat_t_vec(&phi, g)))
        }
        ProjectionDiagonal::RandomSign => {
            let proj = CwProjection::sample_random_sign(m, q, &mut rng)?;
            (proj.apply(&sub)?, Box::new(move |g: &[f64]| proj.back_project(g)))
        }
        ProjectionDiagonal::Coefficient(c) => {
            let alpha = coefficient(c, sim, design, seed)?;
            let w = screening_weights(&alpha, Some(&eligible))?;
            let floor = cols.iter().map(|&j| w[j]).fold(f64::INFINITY, f64::min);
            let d: Vec<f64> = cols.iter().map(|&j| if alpha[j] != 0.0 { alpha[j] } else { floor }).collect();
            let proj = CwProjection::sample(m, d, &mut rng)?;
            (proj.apply(&sub)?, Box::new(move |g: &[f64]| proj.back_project(g)))
        }
    };
    let penalty = SparConfig::new(fl).marginal_ridge_penalty * fl.null_deviance(y).value.max(f64::MIN_POSITIVE) / m as f64;
    let fit = RidgeSolver::new(&z, y, fl, Default::default())?.fit(penalty)?;
    let beta_sub = back(&fit.beta);
    let mut beta_std = vec![0.0; p];
    for (k, &j) in cols.iter().enumerate() {
        beta_std[j] = beta_sub[k];
    }
    Ok(design.scaling.back_transform(&beta_std, fit.intercept))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

/// Writes rows as CSV in the fixed column order.
pub fn write_results<W: std::io::Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.cell_id.to_string(),
            r.family_link.to_string(),
            r.p.to_string(),
            r.n.to_string(),
            r.sparsity.to_string(),
            r.covariance.to_string(),
            r.replication.to_string(),
            r.method.clone(),
            r.metric.clone(),
            fmt_opt(r.value),
            format!("{:?}", r.seconds),
            r.reason.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_file(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_results(std::io::BufWriter::new(std::fs::File::create(path)?), rows)
}

/// Mean rank of a method within one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRank {
    pub cell_id: usize,
    pub method: String,
    pub mean_rank: f64,
    /// Replications in which the method had a value.
    pub replications: usize,
}

/// Ranks methods within each (cell, replication) on `metric` (rank 1 = best,
/// ties share the average rank) and averages the ranks per cell.
pub fn mean_ranks(rows: &[ResultRow], metric: &str, lower_is_better: bool) -> Vec<MeanRank> {
    let mut groups: BTreeMap<(usize, usize), Vec<(&str, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == metric) {
        if let Some(v) = r.value.filter(|v| !v.is_nan()) {
            groups.entry((r.cell_id, r.replication)).or_default().push((&r.method, if lower_is_better { v } else { -v }));
        }
    }
    let mut acc: BTreeMap<(usize, &str), (f64, usize)> = BTreeMap::new();
    for ((cell, _), vals) in &groups {
        for &(method, v) in vals {
            let below = vals.iter().filter(|(_, u)| *u < v).count() as f64;
            let equal = vals.iter().filter(|(_, u)| *u == v).count() as f64;
            let e = acc.entry((*cell, method)).or_insert((0.0, 0));
            e.0 += below + (equal + 1.0) / 2.0;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|((cell_id, method), (sum, k))| MeanRank { cell_id, method: method.to_string(), mean_rank: sum / k as f64, replications: k })
        .collect()
}

/// Values of one (cell, method, metric) across replications.
pub fn metric_values(rows: &[ResultRow], cell_id: usize, method: &str, metric: &str) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.cell_id == cell_id && r.method == method && r.metric == metric)
        .filter_map(|r| r.value)
        .collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { (v[k / 2 - 1] + v[k / 2]) / 2.0 })
}
