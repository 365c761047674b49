//! Exact closed-form posterior solvers for the analytically tractable
//! single- and two-parameter estimation problems, plus the sufficient
//! statistics they consume. These double as the oracle layer when
//! validating the MCMC samplers.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::math;
use crate::prob::DiscretePrior;
use alloc::string::ToString;

/// Sufficient statistics of a univariate metric sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientStats {
    pub n: usize,
    pub sum_y: f64,
    pub mean_y: f64,
    /// Total sum of squared deviations from the sample mean.
    pub tss: f64,
}

/// Two-parameter Gauss-inverse-Gamma posterior in its natural
/// hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussInverseGammaPosterior {
    /// Posterior location of the mean.
    pub mu_n: f64,
    /// Effective sample-count multiplier on the conditional precision.
    pub kappa: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
}

/// Joint two-parameter posterior with its closed-form marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGaussPosterior {
    pub mu_marginal: Distribution,
    pub sigma2_marginal: Distribution,
    pub joint: GaussInverseGammaPosterior,
}

/// Numerically stable sufficient statistics (two-pass).
pub fn sufficient_stats(data: &[f64]) -> Result<SufficientStats> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = data.len();
    let sum_y: f64 = data.iter().sum();
    let mean_y = sum_y / n as f64;
    let tss: f64 = data.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    Ok(SufficientStats { n, sum_y, mean_y, tss })
}

impl SufficientStats {
    /// Sum of squared deviations from an externally fixed location.
    pub fn sum_sq_dev_from(&self, mu0: f64) -> f64 {
        // sum((y - mu0)^2) = TSS + n (mean - mu0)^2
        self.tss + self.n as f64 * (self.mean_y - mu0) * (self.mean_y - mu0)
    }
}

/// Beta prior + binomial data -> Beta posterior.
pub fn beta_binomial_update(alpha: f64, beta: f64, y: u64, n: u64) -> Result<Distribution> {
    if y > n {
        return Err(Error::Domain(alloc::format!("successes {y} exceed trials {n}")));
    }
    Distribution::beta(alpha + y as f64, beta + (n - y) as f64)
}

/// Laplace's rule of succession: posterior predictive success
/// probability (y+1)/(n+2) under the uniform prior.
pub fn rule_of_succession(y: u64, n: u64) -> Result<f64> {
    if y > n {
        return Err(Error::Domain(alloc::format!("successes {y} exceed trials {n}")));
    }
    Ok((y + 1) as f64 / (n + 2) as f64)
}

/// Prior predictive distribution of the binomial count under the
/// uniform prior: every outcome 0..=n has probability 1/(n+1).
pub fn prior_predictive_binomial_uniform(n: u64) -> DiscretePrior {
    let k = n as usize + 1;
    let p = 1.0 / k as f64;
    DiscretePrior {
        support: (0..k).map(|y| alloc::format!("{y}")).collect(),
        probs: alloc::vec![p; k],
    }
}

/// Gamma prior + Poisson counts -> Gamma posterior.
pub fn gamma_poisson_update(alpha: f64, beta: f64, stats: &SufficientStats) -> Result<Distribution> {
    if stats.sum_y < 0.0 {
        return Err(Error::Domain("Poisson counts must be non-negative".to_string()));
    }
    Distribution::gamma(alpha + stats.sum_y, beta + stats.n as f64)
}

/// Gauss likelihood with known scale `sigma0`, Gauss prior on the
/// location -> Gauss posterior.
pub fn gauss_known_variance_update(
    m0: f64,
    s0: f64,
    sigma0: f64,
    stats: &SufficientStats,
) -> Result<Distribution> {
    if s0 <= 0.0 || sigma0 <= 0.0 {
        return Err(Error::Parameter("prior and likelihood scales must be positive".to_string()));
    }
    let prior_prec = 1.0 / (s0 * s0);
    let data_prec = stats.n as f64 / (sigma0 * sigma0);
    let var1 = 1.0 / (prior_prec + data_prec);
    let mu1 = var1 * (prior_prec * m0 + data_prec * stats.mean_y);
    Distribution::gauss(mu1, math::sqrt(var1))
}

/// Gauss likelihood with known location `mu0`, inverse-Gamma prior on
/// the variance -> inverse-Gamma posterior.
pub fn gauss_known_mean_update(
    alpha0: f64,
    beta0: f64,
    mu0: f64,
    data: &[f64],
) -> Result<Distribution> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = data.len() as f64;
    let nv: f64 = data.iter().map(|y| (y - mu0) * (y - mu0)).sum();
    Distribution::inverse_gamma(alpha0 + n / 2.0, beta0 + nv / 2.0)
}

/// Exponential likelihood, Gamma prior on the rate -> Gamma posterior.
pub fn exponential_gamma_update(
    alpha: f64,
    beta: f64,
    stats: &SufficientStats,
) -> Result<Distribution> {
    if stats.sum_y < 0.0 || stats.mean_y < 0.0 {
        return Err(Error::Domain("exponential data must be non-negative".to_string()));
    }
    Distribution::gamma(alpha + stats.n as f64, beta + stats.sum_y)
}

/// Joint posterior for (mu, sigma^2) under the improper uniform joint
/// prior: flat in mu, 1/sigma^2 in the variance. Needs n >= 2 and a
/// positive TSS, otherwise the posterior is improper.
pub fn gauss_joint_uniform(stats: &SufficientStats) -> Result<JointGaussPosterior> {
    if stats.n < 2 || stats.tss <= 0.0 {
        return Err(Error::ImproperPosterior(alloc::format!(
            "uniform joint prior needs n >= 2 and TSS > 0 (n={}, TSS={})",
            stats.n,
            stats.tss
        )));
    }
    let n = stats.n as f64;
    let alpha_n = (n - 1.0) / 2.0;
    let beta_n = stats.tss / 2.0;
    Ok(JointGaussPosterior {
        mu_marginal: Distribution::noncentral_t(
            stats.mean_y,
            math::sqrt(stats.tss / ((n - 1.0) * n)),
            n - 1.0,
        )?,
        sigma2_marginal: Distribution::inverse_gamma(alpha_n, beta_n)?,
        joint: GaussInverseGammaPosterior {
            mu_n: stats.mean_y,
            kappa: n,
            alpha_n,
            beta_n,
        },
    })
}

/// Joint posterior for (mu, sigma^2) under the conditionally conjugate
/// Gauss-inverse-Gamma prior with unit prior observation weight.
pub fn gauss_joint_conditional_conjugate(
    m0: f64,
    alpha0: f64,
    beta0: f64,
    stats: &SufficientStats,
) -> Result<JointGaussPosterior> {
    if alpha0 <= 0.0 || beta0 <= 0.0 {
        return Err(Error::Parameter("alpha0, beta0 must be positive".to_string()));
    }
    if stats.n == 0 {
        return Err(Error::EmptyData);
    }
    let n = stats.n as f64;
    let mu_n = m0 / (n + 1.0) + n * stats.mean_y / (n + 1.0);
    let alpha_n = alpha0 + n / 2.0;
    let beta_n =
        beta0 + stats.tss / 2.0 + 0.5 * (n / (n + 1.0)) * (m0 - stats.mean_y) * (m0 - stats.mean_y);
    Ok(JointGaussPosterior {
        mu_marginal: Distribution::noncentral_t(
            mu_n,
            math::sqrt((beta_n / alpha_n) / (n + 1.0)),
            2.0 * alpha_n,
        )?,
        sigma2_marginal: Distribution::inverse_gamma(alpha_n, beta_n)?,
        joint: GaussInverseGammaPosterior {
            mu_n,
            kappa: n + 1.0,
            alpha_n,
            beta_n,
        },
    })
}
