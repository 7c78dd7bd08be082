//! Exponential-dispersion families and their link functions.
//!
//! Only the five family-link pairs used by the simulation design are
//! constructible. All fitting works with the kernel `y·θ − b(θ)` of the
//! log-likelihood and with the deviance; the dispersion enters nowhere
//! except the Gaussian dispersion estimate reported after a fit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SparError};

/// Linear predictors on the logit and cloglog scales are clamped to this
/// magnitude before exponentiation.
pub const ETA_CLAMP: f64 = 30.0;

/// Log-link predictors are clamped to this magnitude to keep `exp` finite.
const LOG_ETA_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Log,
    Logit,
    Cloglog,
}

/// How the dispersion parameter is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionRule {
    /// a(φ) = 1 (binomial, Poisson).
    FixedOne,
    /// Estimated after fitting for reporting only (Gaussian).
    EstimateForReporting,
}

/// A supported family-link combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FamilyLink {
    family: Family,
    link: Link,
}

/// Intercept-only deviance together with a flag for constant responses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullDeviance {
    pub value: f64,
    pub degenerate: bool,
}

impl FamilyLink {
    pub const GAUSSIAN_IDENTITY: FamilyLink = FamilyLink { family: Family::Gaussian, link: Link::Identity };
    pub const GAUSSIAN_LOG: FamilyLink = FamilyLink { family: Family::Gaussian, link: Link::Log };
    pub const BINOMIAL_LOGIT: FamilyLink = FamilyLink { family: Family::Binomial, link: Link::Logit };
    pub const BINOMIAL_CLOGLOG: FamilyLink = FamilyLink { family: Family::Binomial, link: Link::Cloglog };
    pub const POISSON_LOG: FamilyLink = FamilyLink { family: Family::Poisson, link: Link::Log };

    pub fn new(family: Family, link: Link) -> Result<Self> {
        let fl = FamilyLink { family, link };
        if Self::all().contains(&fl) {
            Ok(fl)
        } else {
            Err(SparError::param(format!("unsupported family-link combination {family:?}-{link:?}")))
        }
    }

    pub fn all() -> [FamilyLink; 5] {
        [
            Self::BINOMIAL_LOGIT,
            Self::BINOMIAL_CLOGLOG,
            Self::POISSON_LOG,
            Self::GAUSSIAN_IDENTITY,
            Self::GAUSSIAN_LOG,
        ]
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn is_canonical(&self) -> bool {
        matches!(
            (self.family, self.link),
            (Family::Gaussian, Link::Identity) | (Family::Binomial, Link::Logit) | (Family::Poisson, Link::Log)
        )
    }

    pub fn dispersion_rule(&self) -> DispersionRule {
        match self.family {
            Family::Gaussian => DispersionRule::EstimateForReporting,
            Family::Binomial | Family::Poisson => DispersionRule::FixedOne,
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.family, self.link) {
            (Family::Gaussian, Link::Identity) => "gaussian-identity",
            (Family::Gaussian, Link::Log) => "gaussian-log",
            (Family::Binomial, Link::Logit) => "binomial-logit",
            (Family::Binomial, Link::Cloglog) => "binomial-cloglog",
            (Family::Poisson, Link::Log) => "poisson-log",
            _ => unreachable!("only supported combinations are constructible"),
        }
    }

    /// Inverse link g⁻¹(η) for a single predictor value.
    pub fn linkinv_scalar(&self, eta: f64) -> f64 {
        match self.link {
            Link::Identity => eta,
            Link::Log => eta.clamp(-LOG_ETA_CLAMP, LOG_ETA_CLAMP).exp(),
            Link::Logit => {
                let e = eta.clamp(-ETA_CLAMP, ETA_CLAMP);
                if e >= 0.0 {
                    1.0 / (1.0 + (-e).exp())
                } else {
                    let t = e.exp();
                    t / (1.0 + t)
                }
            }
            Link::Cloglog => {
                let e = eta.clamp(-ETA_CLAMP, ETA_CLAMP);
                (-(-e.exp()).exp_m1()).clamp(f64::EPSILON, 1.0 - f64::EPSILON)
            }
        }
    }

    pub fn linkinv(&self, eta: &[f64]) -> Vec<f64> {
        eta.iter().map(|&e| self.linkinv_scalar(e)).collect()
    }

    fn link_at(&self, index: usize, mu: f64) -> Result<f64> {
        let boundary = |reason: &str| SparError::Domain {
            index,
            reason: format!("mean {mu} {reason}; a continuity correction is required upstream"),
        };
        if !mu.is_finite() {
            return Err(boundary("is not finite"));
        }
        match self.link {
            Link::Identity => Ok(mu),
            Link::Log => {
                if mu <= 0.0 {
                    Err(boundary("is not positive"))
                } else {
                    Ok(mu.ln())
                }
            }
            Link::Logit => {
                if mu <= 0.0 || mu >= 1.0 {
                    Err(boundary("is outside (0, 1)"))
                } else {
                    Ok(mu.ln() - (-mu).ln_1p())
                }
            }
            Link::Cloglog => {
                if mu <= 0.0 || mu >= 1.0 {
                    Err(boundary("is outside (0, 1)"))
                } else {
                    Ok((-(-mu).ln_1p()).ln())
                }
            }
        }
    }

    /// Link g(μ) for a single mean; boundary means are a domain error.
    pub fn link_scalar(&self, mu: f64) -> Result<f64> {
        self.link_at(0, mu)
    }

    pub fn linkfun(&self, mu: &[f64]) -> Result<Vec<f64>> {
        mu.iter().enumerate().map(|(i, &m)| self.link_at(i, m)).collect()
    }

    /// dμ/dη, floored at machine epsilon for use as an IRLS weight.
    pub fn mu_eta(&self, eta: f64) -> f64 {
        let d = match self.link {
            Link::Identity => 1.0,
            Link::Log => self.linkinv_scalar(eta),
            Link::Logit => {
                let mu = self.linkinv_scalar(eta);
                mu * (1.0 - mu)
            }
            Link::Cloglog => {
                let e = eta.clamp(-ETA_CLAMP, ETA_CLAMP);
                (e - e.exp()).exp()
            }
        };
        d.max(f64::EPSILON)
    }

    /// Variance function V(μ) = b''(θ(μ)).
    pub fn variance(&self, mu: f64) -> f64 {
        match self.family {
            Family::Gaussian => 1.0,
            Family::Binomial => mu * (1.0 - mu),
            Family::Poisson => mu,
        }
    }

    /// The ratio (dμ/dη)/V(μ), i.e. the derivative of the log-likelihood
    /// kernel with respect to η divided by (y − μ). Equals one for canonical links.
    pub fn score_factor(&self, eta: f64) -> f64 {
        match (self.family, self.link) {
            (Family::Gaussian, Link::Identity) | (Family::Binomial, Link::Logit) | (Family::Poisson, Link::Log) => 1.0,
            (Family::Gaussian, Link::Log) => self.linkinv_scalar(eta),
            (Family::Binomial, Link::Cloglog) => {
                let e = eta.clamp(-ETA_CLAMP, ETA_CLAMP);
                e.exp() / self.linkinv_scalar(e)
            }
            _ => unreachable!("only supported combinations are constructible"),
        }
    }

    /// Log-partition function b(θ).
    pub fn cumulant(&self, theta: f64) -> f64 {
        match self.family {
            Family::Gaussian => 0.5 * theta * theta,
            Family::Binomial => softplus(theta),
            Family::Poisson => theta.exp(),
        }
    }

    /// b'(θ), the mean as a function of the natural parameter.
    pub fn cumulant_deriv(&self, theta: f64) -> f64 {
        match self.family {
            Family::Gaussian => theta,
            Family::Binomial => sigmoid(theta),
            Family::Poisson => theta.exp(),
        }
    }

    /// b''(θ), the variance as a function of the natural parameter.
    pub fn cumulant_second(&self, theta: f64) -> f64 {
        match self.family {
            Family::Gaussian => 1.0,
            Family::Binomial => {
                let s = sigmoid(theta);
                s * (1.0 - s)
            }
            Family::Poisson => theta.exp(),
        }
    }

    /// Natural parameter θ = (b')⁻¹(g⁻¹(η)); exactly η for canonical links.
    pub fn theta(&self, eta: f64) -> f64 {
        match (self.family, self.link) {
            (Family::Gaussian, Link::Identity) | (Family::Binomial, Link::Logit) | (Family::Poisson, Link::Log) => eta,
            (Family::Gaussian, Link::Log) => self.linkinv_scalar(eta),
            (Family::Binomial, Link::Cloglog) => {
                // logit(1 − exp(−e^η)) = log(−expm1(−e^η)) + e^η
                let t = eta.clamp(-ETA_CLAMP, ETA_CLAMP).exp();
                (-(-t).exp_m1()).ln() + t
            }
            _ => unreachable!("only supported combinations are constructible"),
        }
    }

    /// Σᵢ yᵢθᵢ − b(θᵢ).
    pub fn loglik_kernel(&self, y: &[f64], eta: &[f64]) -> Result<f64> {
        if y.len() != eta.len() {
            return Err(SparError::dim(format!("y has {} entries, eta has {}", y.len(), eta.len())));
        }
        let mut total = 0.0;
        for (i, (&yi, &ei)) in y.iter().zip(eta).enumerate() {
            let theta = self.theta(ei);
            let term = yi * theta - self.cumulant(theta);
            if !term.is_finite() {
                return Err(SparError::numerical(format!("non-finite log-likelihood term at index {i}")));
            }
            total += term;
        }
        Ok(total)
    }

    /// Whether `mu` lies inside the open mean domain of the family.
    pub fn mean_in_domain(&self, mu: f64) -> bool {
        mu.is_finite()
            && match self.family {
                Family::Gaussian => true,
                Family::Binomial => mu > 0.0 && mu < 1.0,
                Family::Poisson => mu > 0.0,
            }
    }

    /// Unit deviance d(y, μ) without domain checks; uses 0·log 0 = 0.
    pub fn unit_deviance(&self, y: f64, mu: f64) -> f64 {
        match self.family {
            Family::Gaussian => (y - mu) * (y - mu),
            Family::Binomial => 2.0 * (ylog_ratio(y, mu) + ylog_ratio(1.0 - y, 1.0 - mu)),
            Family::Poisson => 2.0 * (ylog_ratio(y, mu) - (y - mu)),
        }
    }

    /// Deviance 2·[ℓ̃(saturated) − ℓ̃(μ)].
    pub fn deviance(&self, y: &[f64], mu: &[f64]) -> Result<f64> {
        if y.len() != mu.len() {
            return Err(SparError::dim(format!("y has {} entries, mu has {}", y.len(), mu.len())));
        }
        let mut total = 0.0;
        for (i, (&yi, &mi)) in y.iter().zip(mu).enumerate() {
            if !self.mean_in_domain(mi) {
                return Err(SparError::Domain {
                    index: i,
                    reason: format!("mean {mi} outside the {} mean domain", self.name()),
                });
            }
            total += self.unit_deviance(yi, mi);
        }
        Ok(total.max(0.0))
    }

    /// Deviance evaluated at the linear predictor; the clamped inverse link
    /// keeps every mean inside its domain.
    pub fn deviance_eta(&self, y: &[f64], eta: &[f64]) -> f64 {
        y.iter()
            .zip(eta)
            .map(|(&yi, &ei)| self.unit_deviance(yi, self.linkinv_scalar(ei)))
            .sum::<f64>()
            .max(0.0)
    }

    /// Deviance of the intercept-only model, μ̂ = ȳ.
    pub fn null_deviance(&self, y: &[f64]) -> NullDeviance {
        let constant = y.windows(2).all(|w| w[0] == w[1]);
        if y.is_empty() || constant {
            return NullDeviance { value: 0.0, degenerate: true };
        }
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        let value = y.iter().map(|&yi| self.unit_deviance(yi, ybar)).sum::<f64>().max(0.0);
        NullDeviance { value, degenerate: value <= 0.0 || !value.is_finite() }
    }

    /// Residual deviance / (n − 1) for Gaussian families; `None` when the
    /// dispersion is fixed at one.
    pub fn dispersion_estimate(&self, residual_deviance: f64, n: usize) -> Option<f64> {
        match self.dispersion_rule() {
            DispersionRule::EstimateForReporting if n > 1 => Some(residual_deviance / (n - 1) as f64),
            _ => None,
        }
    }

    /// Checks that every response lies in the family's domain. `strict`
    /// demands {0,1} for binomial and integers for Poisson; otherwise the
    /// continuous relaxations [0,1] and [0,∞) are accepted.
    pub fn check_response(&self, y: &[f64], strict: bool) -> Result<()> {
        for (i, &yi) in y.iter().enumerate() {
            let ok = yi.is_finite()
                && match (self.family, strict) {
                    (Family::Gaussian, _) => true,
                    (Family::Binomial, true) => yi == 0.0 || yi == 1.0,
                    (Family::Binomial, false) => (0.0..=1.0).contains(&yi),
                    (Family::Poisson, true) => yi >= 0.0 && yi.fract() == 0.0,
                    (Family::Poisson, false) => yi >= 0.0,
                };
            if !ok {
                return Err(SparError::Domain {
                    index: i,
                    reason: format!("response {yi} outside the {} response domain", self.name()),
                });
            }
        }
        Ok(())
    }

    /// Link of a mean pulled strictly inside the domain; used as the
    /// starting intercept of iterative fits.
    pub fn initial_eta(&self, mean: f64) -> f64 {
        const EDGE: f64 = 1e-6;
        let mu = match (self.family, self.link) {
            (Family::Binomial, _) => mean.clamp(EDGE, 1.0 - EDGE),
            (_, Link::Log) => mean.max(EDGE),
            _ => mean,
        };
        self.link_scalar(mu).unwrap_or(0.0)
    }
}

impl fmt::Display for FamilyLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyLink {
    type Err = SparError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        FamilyLink::all()
            .into_iter()
            .find(|fl| fl.name() == lower)
            .ok_or_else(|| {
                SparError::param(format!(
                    "unknown family-link '{s}' (expected one of binomial-logit, binomial-cloglog, poisson-log, gaussian-identity, gaussian-log)"
                ))
            })
    }
}

impl TryFrom<String> for FamilyLink {
    type Error = SparError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FamilyLink> for String {
    fn from(fl: FamilyLink) -> String {
        fl.name().to_string()
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let t = x.exp();
        t / (1.0 + t)
    }
}

fn ylog_ratio(y: f64, mu: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y * (y / mu).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ALL: [FamilyLink; 5] = [
        FamilyLink::BINOMIAL_LOGIT,
        FamilyLink::BINOMIAL_CLOGLOG,
        FamilyLink::POISSON_LOG,
        FamilyLink::GAUSSIAN_IDENTITY,
        FamilyLink::GAUSSIAN_LOG,
    ];

    #[test]
    fn only_five_pairs_are_constructible() {
        let mut count = 0;
        for family in [Family::Gaussian, Family::Binomial, Family::Poisson] {
            for link in [Link::Identity, Link::Log, Link::Logit, Link::Cloglog] {
                if FamilyLink::new(family, link).is_ok() {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 5);
        assert!(FamilyLink::new(Family::Poisson, Link::Logit).is_err());
    }

    #[test]
    fn canonical_and_dispersion_flags() {
        let canonical: Vec<_> = ALL.iter().filter(|fl| fl.is_canonical()).map(|fl| fl.name()).collect();
        assert_eq!(canonical, ["binomial-logit", "poisson-log", "gaussian-identity"]);
        assert_eq!(FamilyLink::POISSON_LOG.dispersion_rule(), DispersionRule::FixedOne);
        assert_eq!(FamilyLink::BINOMIAL_CLOGLOG.dispersion_rule(), DispersionRule::FixedOne);
        assert_eq!(FamilyLink::GAUSSIAN_LOG.dispersion_rule(), DispersionRule::EstimateForReporting);
    }

    #[test]
    fn names_round_trip() {
        for fl in ALL {
            assert_eq!(fl.name().parse::<FamilyLink>().unwrap(), fl);
            let json = serde_json::to_string(&fl).unwrap();
            assert_eq!(json, format!("\"{}\"", fl.name()));
            assert_eq!(serde_json::from_str::<FamilyLink>(&json).unwrap(), fl);
        }
        assert!("poisson-identity".parse::<FamilyLink>().is_err());
    }

    #[test]
    fn linkinv_examples() {
        assert_eq!(FamilyLink::BINOMIAL_LOGIT.linkinv(&[0.0]), vec![0.5]);
        assert_eq!(FamilyLink::POISSON_LOG.linkinv(&[0.0]), vec![1.0]);
        let expected = 1.0 - (-(0.0f64).exp()).exp();
        assert!((FamilyLink::BINOMIAL_CLOGLOG.linkinv_scalar(0.0) - expected).abs() < 1e-15);
        assert!((FamilyLink::BINOMIAL_CLOGLOG.linkinv_scalar(0.0) - 0.63212).abs() < 1e-5);
    }

    #[test]
    fn linkinv_clamps_without_nan() {
        for fl in [FamilyLink::BINOMIAL_LOGIT, FamilyLink::BINOMIAL_CLOGLOG] {
            for eta in [-1e6, -40.0, 40.0, 1e6] {
                let mu = fl.linkinv_scalar(eta);
                assert!(mu > 0.0 && mu < 1.0, "{fl} at {eta}: {mu}");
            }
        }
    }

    #[test]
    fn link_examples() {
        assert_eq!(FamilyLink::GAUSSIAN_IDENTITY.linkfun(&[2.5]).unwrap(), vec![2.5]);
        assert_eq!(FamilyLink::BINOMIAL_LOGIT.linkfun(&[0.5]).unwrap(), vec![0.0]);
        let v = FamilyLink::POISSON_LOG.linkfun(&[std::f64::consts::E]).unwrap()[0];
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn link_rejects_boundary_means() {
        for (fl, mu) in [
            (FamilyLink::BINOMIAL_LOGIT, 0.0),
            (FamilyLink::BINOMIAL_LOGIT, 1.0),
            (FamilyLink::BINOMIAL_CLOGLOG, 1.0),
            (FamilyLink::POISSON_LOG, 0.0),
        ] {
            match fl.linkfun(&[0.3, mu]) {
                Err(SparError::Domain { index, .. }) => assert_eq!(index, 1),
                other => panic!("expected domain error, got {other:?}"),
            }
        }
    }

    #[test]
    fn loglik_kernel_examples() {
        assert!((FamilyLink::POISSON_LOG.loglik_kernel(&[1.0], &[0.0]).unwrap() + 1.0).abs() < 1e-15);
        let v = FamilyLink::BINOMIAL_LOGIT.loglik_kernel(&[0.0], &[0.0]).unwrap();
        assert!((v + 2f64.ln()).abs() < 1e-15);
        assert_eq!(FamilyLink::GAUSSIAN_IDENTITY.loglik_kernel(&[3.0], &[3.0]).unwrap(), 4.5);
    }

    #[test]
    fn loglik_kernel_reports_offending_index() {
        let err = FamilyLink::GAUSSIAN_IDENTITY.loglik_kernel(&[1.0, 1.0], &[0.0, f64::NAN]).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    #[test]
    fn deviance_examples() {
        assert_eq!(FamilyLink::GAUSSIAN_IDENTITY.deviance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let b = FamilyLink::BINOMIAL_LOGIT.deviance(&[1.0], &[0.5]).unwrap();
        assert!((b - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((b - 1.38629).abs() < 1e-5);
        let p = FamilyLink::POISSON_LOG.deviance(&[2.0], &[1.0]).unwrap();
        assert!((p - 2.0 * (2.0 * 2f64.ln() - 1.0)).abs() < 1e-14);
        assert!((p - 0.77259).abs() < 1e-5);
        // 0·log 0 = 0 for a Poisson zero
        let z = FamilyLink::POISSON_LOG.deviance(&[0.0], &[0.5]).unwrap();
        assert!((z - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deviance_rejects_out_of_domain_mean() {
        assert!(matches!(
            FamilyLink::BINOMIAL_LOGIT.deviance(&[1.0, 0.0], &[0.4, 1.0]),
            Err(SparError::Domain { index: 1, .. })
        ));
        assert!(FamilyLink::POISSON_LOG.deviance(&[1.0], &[-0.1]).is_err());
    }

    #[test]
    fn null_deviance_examples() {
        for fl in ALL {
            let nd = fl.null_deviance(&[1.0, 1.0, 1.0]);
            assert_eq!(nd.value, 0.0);
            assert!(nd.degenerate);
        }
        assert_eq!(FamilyLink::GAUSSIAN_IDENTITY.null_deviance(&[0.0, 2.0]).value, 2.0);
        let b = FamilyLink::BINOMIAL_LOGIT.null_deviance(&[0.0, 1.0]);
        assert!((b.value - 4.0 * 2f64.ln()).abs() < 1e-14);
        assert!(!b.degenerate);
        assert!(FamilyLink::BINOMIAL_LOGIT.null_deviance(&[0.0, 0.0]).degenerate);
    }

    #[test]
    fn response_domains() {
        assert!(FamilyLink::POISSON_LOG.check_response(&[0.0, 3.0], true).is_ok());
        assert!(FamilyLink::POISSON_LOG.check_response(&[0.0, 2.5], true).is_err());
        assert!(FamilyLink::POISSON_LOG.check_response(&[0.0, 2.5], false).is_ok());
        assert!(FamilyLink::BINOMIAL_LOGIT.check_response(&[0.25], true).is_err());
        assert!(FamilyLink::BINOMIAL_LOGIT.check_response(&[0.25], false).is_ok());
        assert!(FamilyLink::GAUSSIAN_LOG.check_response(&[-3.0], true).is_ok());
    }

    #[test]
    fn gaussian_dispersion_for_reporting_only() {
        assert_eq!(FamilyLink::GAUSSIAN_IDENTITY.dispersion_estimate(10.0, 11), Some(1.0));
        assert_eq!(FamilyLink::POISSON_LOG.dispersion_estimate(10.0, 11), None);
    }

    #[test]
    fn round_trip_over_representable_range() {
        // Relative accuracy where g⁻¹(η) stays resolvable from the domain
        // boundary in double precision.
        let ranges = [
            (FamilyLink::GAUSSIAN_IDENTITY, -20.0, 20.0),
            (FamilyLink::GAUSSIAN_LOG, -20.0, 20.0),
            (FamilyLink::POISSON_LOG, -20.0, 20.0),
            (FamilyLink::BINOMIAL_LOGIT, -20.0, 15.0),
            (FamilyLink::BINOMIAL_CLOGLOG, -20.0, 2.5),
        ];
        for (fl, lo, hi) in ranges {
            for k in 0..=400 {
                let eta = lo + (hi - lo) * k as f64 / 400.0;
                let back = fl.link_scalar(fl.linkinv_scalar(eta)).unwrap();
                assert!((back - eta).abs() <= 1e-10 * eta.abs().max(1.0), "{fl}: {eta} -> {back}");
            }
        }
    }

    fn finite_difference_check(fl: FamilyLink, y: f64, eta: f64) {
        let h = 1e-6;
        let f = |e: f64| -fl.loglik_kernel(&[y], &[e]).unwrap();
        let numeric = (f(eta + h) - f(eta - h)) / (2.0 * h);
        let analytic = fl.linkinv_scalar(eta) - y;
        let scale = analytic.abs().max(1e-3);
        assert!(
            (numeric - analytic).abs() <= 1e-4 * scale,
            "{fl} y={y} eta={eta}: numeric {numeric} vs analytic {analytic}"
        );
    }

    proptest! {
        #[test]
        fn link_round_trip(eta in -10.0f64..10.0) {
            for fl in ALL {
                // cloglog cannot resolve g⁻¹(η) from 1 once e^η exceeds ~30
                if fl == FamilyLink::BINOMIAL_CLOGLOG && eta > 3.0 {
                    continue;
                }
                let back = fl.link_scalar(fl.linkinv_scalar(eta)).unwrap();
                prop_assert!((back - eta).abs() < 1e-8, "{}: {} -> {}", fl, eta, back);
            }
        }

        #[test]
        fn variance_positive(theta in -30.0f64..30.0) {
            for fl in ALL {
                prop_assert!(fl.cumulant_second(theta) > 0.0);
            }
        }

        #[test]
        fn deviance_nonnegative_and_zero_at_saturation(
            ys in proptest::collection::vec(0.01f64..0.99, 1..20),
            etas in proptest::collection::vec(-5.0f64..5.0, 20),
        ) {
            for fl in ALL {
                let y: Vec<f64> = match fl.family() {
                    Family::Binomial => ys.iter().map(|&v| v.round()).collect(),
                    Family::Poisson => ys.iter().map(|&v| (v * 10.0).floor()).collect(),
                    Family::Gaussian => ys.iter().map(|&v| 10.0 * v).collect(),
                };
                let mu = fl.linkinv(&etas[..y.len()]);
                prop_assert!(fl.deviance(&y, &mu).unwrap() >= 0.0);
                prop_assert!(fl.deviance(&ys, &ys).unwrap().abs() < 1e-12);
            }
        }

        #[test]
        fn canonical_gradient_matches_finite_difference(eta in -5.0f64..5.0, raw in 0.0f64..1.0) {
            finite_difference_check(FamilyLink::GAUSSIAN_IDENTITY, 4.0 * raw - 2.0, eta);
            finite_difference_check(FamilyLink::BINOMIAL_LOGIT, raw.round(), eta);
            finite_difference_check(FamilyLink::POISSON_LOG, (raw * 6.0).floor(), eta);
        }
    }
}
