//! Prediction and variable-ranking metrics.

use crate::error::{Result, SparError};

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(SparError::dim(format!("length mismatch: {a} vs {b}")));
    }
    if a == 0 {
        return Err(SparError::UndefinedMetric("empty input".into()));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Mean squared prediction error (the Brier score for binary responses).
pub fn mspe(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_len(y.len(), y_hat.len())?;
    Ok(sq_dist(y, y_hat) / y.len() as f64)
}

/// `Σ(y − ŷ)² / Σ(y − ȳ_train)²`.
pub fn rmspe(y: &[f64], y_hat: &[f64], y_bar_train: f64) -> Result<f64> {
    check_len(y.len(), y_hat.len())?;
    let den: f64 = y.iter().map(|v| (v - y_bar_train).powi(2)).sum();
    if den == 0.0 {
        return Err(SparError::UndefinedMetric("test responses all equal the training mean".into()));
    }
    Ok(sq_dist(y, y_hat) / den)
}

/// Mean squared error on the link scale.
pub fn msle(eta: &[f64], eta_hat: &[f64]) -> Result<f64> {
    check_len(eta.len(), eta_hat.len())?;
    Ok(sq_dist(eta, eta_hat) / eta.len() as f64)
}

/// `Σ(η − η̂)² / Σ η̂²`.
pub fn rmsle(eta: &[f64], eta_hat: &[f64]) -> Result<f64> {
    check_len(eta.len(), eta_hat.len())?;
    let den: f64 = eta_hat.iter().map(|v| v * v).sum();
    if den == 0.0 {
        return Err(SparError::UndefinedMetric("estimated linear predictor is identically zero".into()));
    }
    Ok(sq_dist(eta, eta_hat) / den)
}

/// Tie groups in decreasing score order as (positives, negatives) counts.
fn tie_groups(labels: &[bool], scores: &[f64]) -> Result<(Vec<(i128, i128)>, i128, i128)> {
    if labels.len() != scores.len() {
        return Err(SparError::dim(format!("{} labels but {} scores", labels.len(), scores.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(SparError::UndefinedMetric("scores contain NaN".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups: Vec<(i128, i128)> = Vec::new();
    let mut last: Option<f64> = None;
    for i in order {
        // -0.0 and 0.0 form one tie group
        if last != Some(scores[i]) {
            groups.push((0, 0));
            last = Some(scores[i]);
        }
        let g = groups.last_mut().expect("group pushed above");
        if labels[i] {
            g.0 += 1;
        } else {
            g.1 += 1;
        }
    }
    let pos: i128 = groups.iter().map(|g| g.0).sum();
    let neg: i128 = groups.iter().map(|g| g.1).sum();
    if pos == 0 || neg == 0 {
        return Err(SparError::UndefinedMetric("both classes must be present".into()));
    }
    Ok((groups, pos, neg))
}

/// Area under the ROC curve: P(score⁺ > score⁻) + ½P(tie).
pub fn auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    let (groups, pos, neg) = tie_groups(labels, scores)?;
    // twice the Mann–Whitney statistic, accumulated from the lowest scores up
    let mut neg_below = 0i128;
    let mut u2 = 0i128;
    for &(p, n) in groups.iter().rev() {
        u2 += p * (2 * neg_below + n);
        neg_below += n;
    }
    Ok(u2 as f64 / (2 * pos * neg) as f64)
}

/// Partial AUC of a variable ranking with the false-positive count capped at
/// `n/2`, rescaled by the maximal false-positive rate so that it lies in [0, 1].
pub fn pauc(active: &[bool], scores: &[f64], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(SparError::param("sample size must be positive"));
    }
    let (groups, pos, neg) = tie_groups(active, scores)?;
    // all horizontal quantities are in half false-positive units
    let cap2 = (n as i128).min(2 * neg);
    let mut fp2 = 0i128;
    let mut tp = 0i128;
    let mut area2 = 0i128;
    for &(dy, dx) in &groups {
        if fp2 + 2 * dx <= cap2 {
            area2 += dx * (2 * tp + dy);
            fp2 += 2 * dx;
            tp += dy;
            if fp2 == cap2 {
                break;
            }
        } else {
            let t2 = cap2 - fp2;
            let num = 4 * dx * area2 + t2 * (4 * tp * dx + dy * t2);
            let den = 4 * dx * pos * cap2;
            return Ok(num as f64 / den as f64);
        }
    }
    Ok(area2 as f64 / (pos * cap2) as f64)
}
