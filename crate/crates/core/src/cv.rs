//! Fold assignment for K-fold cross-validation.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Result, SparError};
use crate::family::{Family, FamilyLink};

/// Assigns each observation to one of `k` folds. Binomial responses are
/// stratified by class so that no fold misses a class when avoidable.
pub fn assign_folds<R: Rng + ?Sized>(y: &[f64], fl: FamilyLink, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = y.len();
    if k < 2 || k > n {
        return Err(SparError::param(format!("fold count {k} must lie in [2, {n}]")));
    }
    let mut folds = vec![0usize; n];
    let groups: Vec<Vec<usize>> = if fl.family() == Family::Binomial {
        let (ones, zeros): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| y[i] >= 0.5);
        vec![zeros, ones]
    } else {
        vec![(0..n).collect()]
    };
    let mut slot = 0usize;
    for mut group in groups {
        group.shuffle(rng);
        for i in group {
            folds[i] = slot % k;
            slot += 1;
        }
    }
    Ok(folds)
}

/// (train, test) index lists for fold `fold`.
pub fn split(folds: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != fold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn folds_are_balanced_and_stratified() {
        let y: Vec<f64> = (0..50).map(|i| if i < 10 { 1.0 } else { 0.0 }).collect();
        let folds = assign_folds(&y, FamilyLink::BINOMIAL_LOGIT, 10, &mut stream(3, 0)).unwrap();
        for f in 0..10 {
            let (_, test) = split(&folds, f);
            assert_eq!(test.len(), 5);
            assert_eq!(test.iter().filter(|&&i| y[i] == 1.0).count(), 1);
        }
    }

    #[test]
    fn rejects_bad_fold_counts() {
        let y = vec![0.0; 5];
        assert!(assign_folds(&y, FamilyLink::GAUSSIAN_IDENTITY, 1, &mut stream(0, 0)).is_err());
        assert!(assign_folds(&y, FamilyLink::GAUSSIAN_IDENTITY, 6, &mut stream(0, 0)).is_err());
    }
}
