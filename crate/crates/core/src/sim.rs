//! Synthetic data: structured covariances, sparse coefficients, signal and
//! intercept calibration, and response sampling.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SparError};
use crate::family::{Family, FamilyLink, Link};
use crate::rng::SparRng;

const BLOCK_SIZE: usize = 100;
const COMPOUND_RHO: f64 = 0.5;
const AR_RHO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    Identity,
    Compound,
    Autocorrelated,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sparsity {
    Sparse,
    Medium,
    Dense,
}

macro_rules! string_enum {
    ($ty:ty, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn name(&self) -> &'static str {
                match self {
                    $($variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = SparError;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    other => Err(SparError::param(format!(
                        "unknown {} '{other}' (expected one of {})",
                        stringify!($ty),
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

string_enum!(CovarianceKind,
    CovarianceKind::Identity => "identity",
    CovarianceKind::Compound => "compound",
    CovarianceKind::Autocorrelated => "autocorrelated",
    CovarianceKind::Block => "block",
);

string_enum!(Sparsity,
    Sparsity::Sparse => "sparse",
    Sparsity::Medium => "medium",
    Sparsity::Dense => "dense",
);

#[derive(Debug, Clone, Copy, PartialEq)]
enum Block {
    Identity(usize),
    Compound(usize, f64),
    Ar(usize, f64),
}

impl Block {
    fn len(&self) -> usize {
        match *self {
            Block::Identity(l) | Block::Compound(l, _) | Block::Ar(l, _) => l,
        }
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        match *self {
            _ if i == j => 1.0,
            Block::Identity(_) => 0.0,
            Block::Compound(_, rho) => rho,
            Block::Ar(_, rho) => rho.powi(i.abs_diff(j) as i32),
        }
    }

    fn quad_form(&self, b: &[f64]) -> f64 {
        let ss: f64 = b.iter().map(|v| v * v).sum();
        match *self {
            Block::Identity(_) => ss,
            Block::Compound(_, rho) => {
                let s: f64 = b.iter().sum();
                (1.0 - rho) * ss + rho * s * s
            }
            Block::Ar(_, rho) => {
                // carry = Σ_{i<j} ρ^{j−i} b_i
                let mut carry = 0.0;
                let mut cross = 0.0;
                for j in 1..b.len() {
                    carry = rho * (carry + b[j - 1]);
                    cross += b[j] * carry;
                }
                ss + 2.0 * cross
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match *self {
            Block::Identity(_) => out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal)),
            Block::Compound(_, rho) => {
                let shared = rho.sqrt() * rng.sample::<f64, _>(StandardNormal);
                let own = (1.0 - rho).sqrt();
                out.iter_mut().for_each(|v| *v = shared + own * rng.sample::<f64, _>(StandardNormal));
            }
            Block::Ar(_, rho) => {
                let innov = (1.0 - rho * rho).sqrt();
                let mut prev: f64 = rng.sample(StandardNormal);
                out[0] = prev;
                for v in out.iter_mut().skip(1) {
                    prev = rho * prev + innov * rng.sample::<f64, _>(StandardNormal);
                    *v = prev;
                }
            }
        }
    }
}

/// Structured covariance of the predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma {
    kind: CovarianceKind,
    blocks: Vec<Block>,
}

impl Sigma {
    pub fn new(kind: CovarianceKind, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(SparError::param("dimension must be positive"));
        }
        let blocks = match kind {
            CovarianceKind::Identity => vec![Block::Identity(p)],
            CovarianceKind::Compound => vec![Block::Compound(p, COMPOUND_RHO)],
            CovarianceKind::Autocorrelated => vec![Block::Ar(p, AR_RHO)],
            CovarianceKind::Block => {
                let count = p.div_ceil(BLOCK_SIZE);
                let compound = count / 2;
                (0..count)
                    .map(|b| {
                        let len = BLOCK_SIZE.min(p - b * BLOCK_SIZE);
                        if b + 1 == count {
                            Block::Identity(len)
                        } else if b < compound {
                            Block::Compound(len, COMPOUND_RHO)
                        } else {
                            Block::Ar(len, AR_RHO)
                        }
                    })
                    .collect()
            }
        };
        Ok(Sigma { kind, blocks })
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Block::len).sum()
    }

    /// Block composition as (kind, size) pairs.
    pub fn layout(&self) -> Vec<(CovarianceKind, usize)> {
        self.blocks
            .iter()
            .map(|b| match *b {
                Block::Identity(l) => (CovarianceKind::Identity, l),
                Block::Compound(l, _) => (CovarianceKind::Compound, l),
                Block::Ar(l, _) => (CovarianceKind::Autocorrelated, l),
            })
            .collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let mut start = 0;
        for b in &self.blocks {
            let end = start + b.len();
            if i < end {
                return if j >= start && j < end { b.entry(i - start, j - start) } else { 0.0 };
            }
            start = end;
        }
        panic!("index ({i}, {j}) outside a {}-dimensional covariance", self.dim());
    }

    /// Dense p×p matrix; meant for small dimensions.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let p = self.dim();
        DMatrix::from_fn(p, p, |i, j| self.entry(i, j))
    }

    /// β'Σβ without forming Σ.
    pub fn quad_form(&self, beta: &[f64]) -> f64 {
        let mut start = 0;
        let mut total = 0.0;
        for b in &self.blocks {
            total += b.quad_form(&beta[start..start + b.len()]);
            start += b.len();
        }
        total
    }

    /// One draw from N(0, Σ).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let mut start = 0;
        for b in &self.blocks {
            b.sample(rng, &mut out[start..start + b.len()]);
            start += b.len();
        }
    }

    /// n×p matrix with iid N(0, Σ) rows.
    pub fn sample_matrix<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<f64> {
        let p = self.dim();
        let mut x = DMatrix::zeros(n, p);
        let mut row = vec![0.0; p];
        for i in 0..n {
            self.sample_into(rng, &mut row);
            for (j, v) in row.iter().enumerate() {
                x[(i, j)] = *v;
            }
        }
        x
    }
}

/// Number of active coefficients.
pub fn active_count(p: usize, n: usize, sparsity: Sparsity) -> usize {
    let lp = (p as f64).ln();
    let raw = match sparsity {
        Sparsity::Sparse => 2.0 * lp,
        Sparsity::Medium => 2.0 * lp + n as f64 / 2.0,
        Sparsity::Dense => p as f64 / 4.0,
    };
    (raw + 0.5).floor() as usize
}

/// Sparse coefficient vector at uniformly random positions, with entries
/// (−1)^u·(4·ln n/√n + |z|), u ~ Bernoulli(0.4), z ~ N(0, 1).
pub fn make_beta<R: Rng + ?Sized>(p: usize, n: usize, sparsity: Sparsity, rng: &mut R) -> Result<(Vec<f64>, Vec<bool>)> {
    if n < 2 {
        return Err(SparError::param("n must be at least 2"));
    }
    let a = active_count(p, n, sparsity);
    if a > p || a == 0 {
        return Err(SparError::param(format!("active count {a} is not in [1, {p}]")));
    }
    let base = 4.0 * (n as f64).ln() / (n as f64).sqrt();
    let mut beta = vec![0.0; p];
    let mut active = vec![false; p];
    let mut positions = index::sample(rng, p, a).into_vec();
    positions.sort_unstable();
    for j in positions {
        let sign = if rng.random_bool(0.4) { -1.0 } else { 1.0 };
        let z: f64 = rng.sample(StandardNormal);
        beta[j] = sign * (base + z.abs());
        active[j] = true;
    }
    Ok((beta, active))
}

/// Scales β so that β'Σβ = c.
pub fn rescale_beta(beta: &mut [f64], sigma: &Sigma, c: f64) -> Result<()> {
    if !(c > 0.0) {
        return Err(SparError::param("signal strength must be positive"));
    }
    if beta.len() != sigma.dim() {
        return Err(SparError::dim(format!("beta has {} entries, covariance is {}-dimensional", beta.len(), sigma.dim())));
    }
    let q = sigma.quad_form(beta);
    if !(q > 0.0) {
        return Err(SparError::param("cannot rescale a zero coefficient vector"));
    }
    let f = (c / q).sqrt();
    beta.iter_mut().for_each(|b| *b *= f);
    Ok(())
}

/// Signal strength β'Σβ used for each family-link.
pub fn default_signal(fl: FamilyLink) -> f64 {
    match (fl.family(), fl.link()) {
        (Family::Binomial, Link::Logit) => 100.0,
        (Family::Binomial, _) => 1000.0,
        (Family::Poisson, _) => 0.25,
        (Family::Gaussian, Link::Identity) => 10.0,
        (Family::Gaussian, _) => 0.125,
    }
}

/// Average mean response the intercept is calibrated to.
pub fn default_target_mean(fl: FamilyLink) -> f64 {
    match (fl.family(), fl.link()) {
        (Family::Binomial, Link::Logit) => 0.5,
        (Family::Binomial, _) => 0.7,
        (Family::Poisson, _) => 10.0,
        (Family::Gaussian, Link::Identity) => 1.0,
        (Family::Gaussian, _) => 10.0,
    }
}

/// β₀ such that mean(g⁻¹(β₀ + xᵢ'β)) equals `target` on the given design.
pub fn calibrate_intercept(fl: FamilyLink, xbeta: &[f64], target: f64) -> Result<f64> {
    if xbeta.is_empty() {
        return Err(SparError::param("empty design"));
    }
    if !fl.mean_in_domain(target) {
        return Err(SparError::param(format!("target mean {target} outside the {fl} mean domain")));
    }
    let n = xbeta.len() as f64;
    if fl == FamilyLink::GAUSSIAN_IDENTITY {
        return Ok(target - xbeta.iter().sum::<f64>() / n);
    }
    let gap = |b0: f64| xbeta.iter().map(|v| fl.linkinv_scalar(b0 + v)).sum::<f64>() / n - target;
    let (mut lo, mut hi) = (-50.0, 50.0);
    let mut expansions = 0;
    while gap(lo) > 0.0 || gap(hi) < 0.0 {
        if expansions == 60 {
            return Err(SparError::numerical("intercept calibration bracket did not enclose the target"));
        }
        if gap(lo) > 0.0 {
            lo *= 2.0;
        }
        if gap(hi) < 0.0 {
            hi *= 2.0;
        }
        expansions += 1;
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..400 {
        mid = 0.5 * (lo + hi);
        let g = gap(mid);
        if g.abs() < 1e-10 || mid <= lo || mid >= hi {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Data-generating coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueModel {
    pub beta: Vec<f64>,
    pub beta0: f64,
    pub active: Vec<bool>,
    pub family_link: FamilyLink,
    pub signal_c: f64,
    pub target_mean: f64,
}

impl TrueModel {
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn eta(&self, x: &DMatrix<f64>) -> Vec<f64> {
        crate::linalg::mat_vec(x, &self.beta).into_iter().map(|v| v + self.beta0).collect()
    }
}

/// Predictors, responses and the true linear predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Draws a response for each linear predictor (Gaussian noise has unit variance).
pub fn sample_response<R: Rng + ?Sized>(fl: FamilyLink, eta: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    eta.iter()
        .map(|&e| {
            let mu = fl.linkinv_scalar(e);
            Ok(match fl.family() {
                Family::Gaussian => mu + rng.sample::<f64, _>(StandardNormal),
                Family::Binomial => (rng.random::<f64>() < mu) as u8 as f64,
                Family::Poisson => {
                    if mu <= 0.0 {
                        0.0
                    } else {
                        Poisson::new(mu).map_err(|e| SparError::numerical(format!("poisson mean {mu}: {e}")))?.sample(rng)
                    }
                }
            })
        })
        .collect()
}

/// Rows from N(0, Σ), η = β₀ + Xβ, and responses from the family.
pub fn sample_dataset<R: Rng + ?Sized>(n: usize, sigma: &Sigma, model: &TrueModel, rng: &mut R) -> Result<Dataset> {
    let x = sigma.sample_matrix(n, rng);
    let eta = model.eta(&x);
    let y = sample_response(model.family_link, &eta, rng)?;
    Ok(Dataset { x, y, eta })
}

/// One simulation setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub family_link: FamilyLink,
    pub n: usize,
    pub p: usize,
    pub sparsity: Sparsity,
    pub covariance: CovarianceKind,
    pub n_test: usize,
    /// Overrides the family default signal strength.
    pub signal_c: Option<f64>,
    /// Overrides the family default target mean.
    pub target_mean: Option<f64>,
}

impl SimSpec {
    pub fn new(family_link: FamilyLink, n: usize, p: usize, sparsity: Sparsity, covariance: CovarianceKind) -> Self {
        SimSpec { family_link, n, p, sparsity, covariance, n_test: 0, signal_c: None, target_mean: None }
    }
}

/// A simulated training set, optional test set and the generating model.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub spec: SimSpec,
    pub model: TrueModel,
    pub train: Dataset,
    pub test: Option<Dataset>,
}

/// Runs the full generator: β, signal rescaling, training design, intercept
/// calibration on that design, responses, then an independent test set.
pub fn simulate(spec: &SimSpec, rng: &mut SparRng) -> Result<Simulation> {
    let fl = spec.family_link;
    let sigma = Sigma::new(spec.covariance, spec.p)?;
    let signal_c = spec.signal_c.unwrap_or_else(|| default_signal(fl));
    let target_mean = spec.target_mean.unwrap_or_else(|| default_target_mean(fl));
    let (mut beta, active) = make_beta(spec.p, spec.n, spec.sparsity, rng)?;
    rescale_beta(&mut beta, &sigma, signal_c)?;
    let x = sigma.sample_matrix(spec.n, rng);
    let xbeta = crate::linalg::mat_vec(&x, &beta);
    let beta0 = calibrate_intercept(fl, &xbeta, target_mean)?;
    let model = TrueModel { beta, beta0, active, family_link: fl, signal_c, target_mean };
    let eta: Vec<f64> = xbeta.iter().map(|v| v + beta0).collect();
    let y = sample_response(fl, &eta, rng)?;
    let train = Dataset { x, y, eta };
    let test = if spec.n_test > 0 { Some(sample_dataset(spec.n_test, &sigma, &model, rng)?) } else { None };
    Ok(Simulation { spec: *spec, model, train, test })
}
