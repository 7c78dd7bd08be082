use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use spar_core::ensemble::{spar_fit_with, DiagonalMode, ScreeningMode};
use spar_core::metrics::{mspe, pauc};
use spar_core::rng::stream;
use spar_core::screening::{compute_screening_coefficient, ScreeningCoefficient, ScreeningConfig, ScreeningSource};
use spar_core::sim::{self, CovarianceKind, Sigma, SimSpec, Sparsity};
use spar_core::{spar_fit, FamilyLink, PredictKind, SparConfig};

fn normal_matrix(n: usize, p: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

fn oracle(beta: &[f64]) -> ScreeningCoefficient {
    ScreeningCoefficient { alpha: beta.to_vec(), lambda_used: None, deviance_ratio: None, source: ScreeningSource::HolpLimit }
}

#[test]
fn block_covariance_sample_moments() {
    let sigma = Sigma::new(CovarianceKind::Block, 400).unwrap();
    let kinds: Vec<CovarianceKind> = sigma.layout().into_iter().map(|(k, _)| k).collect();
    assert_eq!(
        kinds,
        [CovarianceKind::Compound, CovarianceKind::Compound, CovarianceKind::Autocorrelated, CovarianceKind::Identity]
    );
    let n = 40_000;
    let x = sigma.sample_matrix(n, &mut stream(11, 0));
    let pairs = [
        (0, 0), (0, 1), (5, 97), (99, 100), (100, 150), (199, 199), (200, 201), (200, 202), (210, 215),
        (250, 290), (299, 300), (300, 301), (350, 350), (399, 0), (150, 250),
    ];
    for (i, j) in pairs {
        let c = x.column(i).dot(&x.column(j)) / n as f64;
        let want = sigma.entry(i, j);
        assert!((c - want).abs() < 0.02, "Σ[{i},{j}]: sample {c:.4}, expected {want:.4}");
    }
}

#[test]
fn screening_ranks_a_single_relevant_column_first() {
    let (n, p) = (100, 1000);
    let mut hits = 0;
    for rep in 0..100u64 {
        let mut rng = stream(rep, 0);
        let x = normal_matrix(n, p, &mut rng);
        let j = rng.random_range(0..p);
        let y: Vec<f64> = (0..n).map(|i| 2.0 * x[(i, j)] + rng.sample::<f64, _>(StandardNormal)).collect();
        let fl = FamilyLink::GAUSSIAN_IDENTITY;
        let a = compute_screening_coefficient(&x, &y, fl, &ScreeningConfig::default(), &mut stream(rep, 1)).unwrap();
        let top = (0..p).max_by(|&a1, &a2| a.alpha[a1].abs().total_cmp(&a.alpha[a2].abs())).unwrap();
        hits += usize::from(top == j);
    }
    assert!(hits >= 95, "relevant column ranked first in {hits}/100 replications");
}

#[test]
fn oracle_diagonal_member_beats_random_signs() {
    let fl = FamilyLink::GAUSSIAN_IDENTITY;
    let mut wins = 0;
    for rep in 0..100u64 {
        let mut spec = SimSpec::new(fl, 100, 500, Sparsity::Sparse, CovarianceKind::Block);
        spec.n_test = 200;
        let s = sim::simulate(&spec, &mut stream(1000 + rep, 0)).unwrap();
        let test = s.test.unwrap();
        let base = SparConfig {
            m_max: Some(1),
            m_override: Some(25),
            screening_mode: ScreeningMode::None,
            seed: rep,
            ..SparConfig::new(fl)
        };
        let informed = spar_fit_with(&s.train.x, &s.train.y, &base, Some(oracle(&s.model.beta))).unwrap();
        let signs = spar_fit(&s.train.x, &s.train.y, &SparConfig { diagonal: DiagonalMode::RandomSign, ..base }).unwrap();
        let err = |m: &spar_core::SparModel| mspe(&test.y, &m.predict(&test.x, PredictKind::Response).unwrap()).unwrap();
        wins += usize::from(err(&informed) < err(&signs));
    }
    assert!(wins >= 80, "oracle diagonal won {wins}/100 replications");
}

#[test]
fn oracle_screening_recovers_the_active_set() {
    for (k, fl) in FamilyLink::all().into_iter().enumerate() {
        let spec = SimSpec::new(fl, 200, 1000, Sparsity::Sparse, CovarianceKind::Identity);
        let s = sim::simulate(&spec, &mut stream(50 + k as u64, 0)).unwrap();
        let cfg = SparConfig { seed: 3, ..SparConfig::new(fl) };
        let model = spar_fit_with(&s.train.x, &s.train.y, &cfg, Some(oracle(&s.model.beta))).unwrap();
        // every member screens inside the support plus floored padding, so the
        // averaged coefficients rank the truly active variables first
        let score = pauc(&s.model.active, &model.beta_hat.iter().map(|b| b.abs()).collect::<Vec<_>>(), 200).unwrap();
        assert!(score > 0.95, "{fl}: pAUC {score:.3}");
        let signs_agree = (0..1000)
            .filter(|&j| s.model.active[j])
            .filter(|&j| model.beta_hat[j] * s.model.beta[j] > 0.0)
            .count();
        assert!(signs_agree * 10 >= 9 * s.model.active_count(), "{fl}: {signs_agree} of {} signs", s.model.active_count());
    }
}

#[test]
fn fits_are_reproducible_and_seed_dependent() {
    let fl = FamilyLink::POISSON_LOG;
    let spec = SimSpec::new(fl, 80, 300, Sparsity::Medium, CovarianceKind::Autocorrelated);
    let s = sim::simulate(&spec, &mut stream(9, 0)).unwrap();
    let cfg = SparConfig { cv: true, m_max: Some(12), cv_folds: 5, seed: 21, ..SparConfig::new(fl) };
    let a = spar_fit(&s.train.x, &s.train.y, &cfg).unwrap();
    let b = spar_fit(&s.train.x, &s.train.y, &cfg).unwrap();
    assert_eq!(a, b);
    let c = spar_fit(&s.train.x, &s.train.y, &SparConfig { seed: 22, ..cfg }).unwrap();
    assert_ne!(a.beta_hat, c.beta_hat);
}
