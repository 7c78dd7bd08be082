//! Ridge-based screening coefficients and probabilistic screening sets.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SparError};
use crate::family::FamilyLink;
use crate::ridge::{
    default_ratio_threshold, holp_glm_limit, lambda_path, select_lambda_cv, select_lambda_min, select_lambda_train_dev,
    HolpConfig, IrlsConfig, PathConfig, RidgeSolver,
};

/// Where a screening coefficient came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningSource {
    RidgeDevThreshold,
    RidgeCv,
    RidgeTrainDev,
    HolpLimit,
}

/// Rule used to pick the ridge penalty for the screening coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScreeningSelector {
    /// Smallest λ whose deviance ratio stays at or below the threshold
    /// (family default when `None`).
    DevianceRatio { threshold: Option<f64> },
    /// K-fold cross-validated held-out deviance.
    Cv { folds: usize },
    /// λ with the smallest training deviance on the path.
    TrainDev,
    /// Closed-form small-λ limit (canonical links only).
    HolpLimit,
}

impl Default for ScreeningSelector {
    fn default() -> Self {
        ScreeningSelector::DevianceRatio { threshold: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScreeningConfig {
    pub selector: ScreeningSelector,
    pub path: PathConfig,
    pub irls: IrlsConfig,
    pub holp: HolpConfig,
}

/// The coefficient whose magnitudes drive screening and the projection diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningCoefficient {
    pub alpha: Vec<f64>,
    /// Penalty of the selected ridge fit; absent for the closed-form limit.
    pub lambda_used: Option<f64>,
    pub deviance_ratio: Option<f64>,
    pub source: ScreeningSource,
}

/// Computes α̂ on a standardized design.
pub fn compute_screening_coefficient<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    y: &[f64],
    fl: FamilyLink,
    config: &ScreeningConfig,
    rng: &mut R,
) -> Result<ScreeningCoefficient> {
    let coef = match config.selector {
        ScreeningSelector::DevianceRatio { threshold } => {
            let threshold = threshold.unwrap_or_else(|| default_ratio_threshold(fl));
            let solver = RidgeSolver::new(x, y, fl, config.irls)?;
            let path = lambda_path(&solver, &PathConfig { stop_above: Some(threshold), ..config.path })?;
            let sel = select_lambda_min(&path, fl, Some(threshold))?;
            ScreeningCoefficient {
                lambda_used: Some(sel.lambda),
                deviance_ratio: Some(sel.fit.deviance_ratio),
                alpha: sel.fit.beta,
                source: ScreeningSource::RidgeDevThreshold,
            }
        }
        ScreeningSelector::Cv { folds } => {
            let sel = select_lambda_cv(x, y, fl, config.irls, &config.path, folds, rng)?;
            ScreeningCoefficient {
                lambda_used: Some(sel.lambda),
                deviance_ratio: Some(sel.fit.deviance_ratio),
                alpha: sel.fit.beta,
                source: ScreeningSource::RidgeCv,
            }
        }
        ScreeningSelector::TrainDev => {
            let solver = RidgeSolver::new(x, y, fl, config.irls)?;
            let path = lambda_path(&solver, &config.path)?;
            let sel = select_lambda_train_dev(&path)?;
            ScreeningCoefficient {
                lambda_used: Some(sel.lambda),
                deviance_ratio: Some(sel.fit.deviance_ratio),
                alpha: sel.fit.beta,
                source: ScreeningSource::RidgeTrainDev,
            }
        }
        ScreeningSelector::HolpLimit => {
            if fl.null_deviance(y).degenerate {
                return Err(SparError::DegenerateResponse("null deviance is zero".into()));
            }
            let h = holp_glm_limit(x, y, fl, &config.holp)?;
            ScreeningCoefficient { alpha: h.beta, lambda_used: None, deviance_ratio: None, source: ScreeningSource::HolpLimit }
        }
    };
    if coef.alpha.iter().any(|a| !a.is_finite()) {
        return Err(SparError::numerical("screening coefficient has non-finite entries"));
    }
    if coef.alpha.iter().all(|&a| a == 0.0) {
        return Err(SparError::SignalAbsent);
    }
    Ok(coef)
}

/// Weights `|α_j|` with zeros lifted to `1e-12·max|α|`; ineligible columns get 0.
pub fn screening_weights(alpha: &[f64], eligible: Option<&[bool]>) -> Result<Vec<f64>> {
    let ok = |j: usize| eligible.is_none_or(|e| e[j]);
    let max = (0..alpha.len()).filter(|&j| ok(j)).map(|j| alpha[j].abs()).fold(0.0, f64::max);
    if max == 0.0 || !max.is_finite() {
        return Err(SparError::SignalAbsent);
    }
    let floor = 1e-12 * max;
    Ok((0..alpha.len()).map(|j| if ok(j) { alpha[j].abs().max(floor) } else { 0.0 }).collect())
}

/// Draws the screening set: all eligible columns when there are at most 2n of
/// them, otherwise 2n distinct columns by successive weighted draws. The
/// returned indices are sorted.
pub fn sample_screening_set<R: Rng + ?Sized>(
    alpha: &[f64],
    n: usize,
    eligible: Option<&[bool]>,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if let Some(e) = eligible {
        if e.len() != alpha.len() {
            return Err(SparError::dim("eligibility mask and coefficient differ in length"));
        }
    }
    let weights = screening_weights(alpha, eligible)?;
    let pool: Vec<usize> = (0..alpha.len()).filter(|&j| weights[j] > 0.0).collect();
    if pool.len() <= 2 * n {
        return Ok(pool);
    }
    let mut set = weighted_sample_without_replacement(&weights, 2 * n, rng)?;
    set.sort_unstable();
    Ok(set)
}

/// Successive weighted draws without replacement, in draw order.
pub fn weighted_sample_without_replacement<R: Rng + ?Sized>(weights: &[f64], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(SparError::param("weights must be finite and nonnegative"));
    }
    let positive = weights.iter().filter(|w| **w > 0.0).count();
    if k > positive {
        return Err(SparError::param(format!("cannot draw {k} items from {positive} with positive weight")));
    }
    let mut tree = SumTree::new(weights);
    Ok((0..k).map(|_| tree.draw_and_remove(rng)).collect())
}

/// Complete binary tree of partial sums; parents are recomputed from their
/// children after each removal so no rounding drift accumulates.
struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(weights: &[f64]) -> Self {
        let leaves = weights.len().next_power_of_two().max(1);
        let mut nodes = vec![0.0; 2 * leaves];
        nodes[leaves..leaves + weights.len()].copy_from_slice(weights);
        for i in (1..leaves).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        SumTree { leaves, nodes }
    }

    fn draw_and_remove<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let mut u = rng.random::<f64>() * self.nodes[1];
        let mut i = 1;
        while i < self.leaves {
            let (left, right) = (self.nodes[2 * i], self.nodes[2 * i + 1]);
            if (u < left && left > 0.0) || right <= 0.0 {
                i *= 2;
            } else {
                u -= left;
                i = 2 * i + 1;
            }
        }
        let leaf = i - self.leaves;
        self.nodes[i] = 0.0;
        i /= 2;
        while i >= 1 {
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
            i /= 2;
        }
        leaf
    }
}
