//! Model comparison and information machinery: Shannon entropy,
//! maximum-entropy distributions (dual Newton solver), Kullback-Leibler
//! divergence, deviance, Bayes factors with the Jeffreys scale,
//! quadrature model evidence, and the DIC/WAIC criteria.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::glm::Compiled;
use crate::linalg;
use crate::math;
use crate::prob::DiscretePrior;
use crate::sampler::{ChainSet, LogTarget};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Shannon information entropy -sum p_i ln(p_i / m_i); zero-probability
/// points contribute nothing. The default Lebesgue measure is uniform
/// with unit weights.
pub fn shannon_entropy(p: &DiscretePrior, measure: Option<&[f64]>) -> f64 {
    let mut s = 0.0;
    for (i, &pi) in p.probs.iter().enumerate() {
        if pi > 0.0 {
            let mi = measure.map_or(1.0, |m| m[i]);
            s -= pi * math::ln(pi / mi);
        }
    }
    s
}

/// One moment constraint: per-support-point values of the moment
/// function and its required expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub values: Vec<f64>,
    pub target: f64,
}

/// Maximum-entropy problem over a discrete support.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntProblem {
    pub support: Vec<f64>,
    /// Positive Lebesgue measure weights, one per support point.
    pub measure: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl MaxEntProblem {
    /// Uniform-measure problem over the given support.
    pub fn new(support: Vec<f64>) -> Self {
        let k = support.len();
        MaxEntProblem { support, measure: vec![1.0; k], constraints: vec![] }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.constraints.push(Constraint { values: self.support.clone(), target: mean });
        self
    }

    pub fn with_variance_about(mut self, mean: f64, variance: f64) -> Self {
        let values = self.support.iter().map(|x| (x - mean) * (x - mean)).collect();
        self.constraints.push(Constraint { values, target: variance });
        self
    }
}

/// Maximises the information entropy subject to normalisation and the
/// moment constraints via Newton iteration on the dual multipliers,
/// starting from the uniform solution (all multipliers zero).
pub fn maxent_solve(prob: &MaxEntProblem, tol: f64) -> Result<DiscretePrior> {
    let k = prob.support.len();
    if k == 0 {
        return Err(Error::EmptyData);
    }
    if prob.measure.len() != k || prob.measure.iter().any(|&m| m <= 0.0) {
        return Err(Error::Parameter("measure weights must be positive".to_string()));
    }
    for c in &prob.constraints {
        if c.values.len() != k {
            return Err(Error::Dimension("constraint values/support mismatch".to_string()));
        }
    }
    let l = prob.constraints.len();
    let log_m: Vec<f64> = prob.measure.iter().map(|&m| math::ln(m)).collect();

    // p_j(lambda) proportional to m_j exp(-sum_i lambda_i f_i(x_j));
    // the dual F(lambda) = ln Z + sum_i lambda_i c_i is convex with
    // gradient c - E_p[f] and Hessian Cov_p(f).
    let probs_for = |lambda: &[f64]| -> Vec<f64> {
        let logits: Vec<f64> = (0..k)
            .map(|j| {
                let mut v = log_m[j];
                for (i, c) in prob.constraints.iter().enumerate() {
                    v -= lambda[i] * c.values[j];
                }
                v
            })
            .collect();
        let lse = math::log_sum_exp(&logits);
        logits.iter().map(|&v| math::exp(v - lse)).collect()
    };
    let dual = |lambda: &[f64]| -> f64 {
        let logits: Vec<f64> = (0..k)
            .map(|j| {
                let mut v = log_m[j];
                for (i, c) in prob.constraints.iter().enumerate() {
                    v -= lambda[i] * c.values[j];
                }
                v
            })
            .collect();
        let mut f = math::log_sum_exp(&logits);
        for (i, c) in prob.constraints.iter().enumerate() {
            f += lambda[i] * c.target;
        }
        f
    };

    let mut lambda = vec![0.0; l];
    if l == 0 {
        let p = probs_for(&lambda);
        return DiscretePrior::new(
            (0..k).map(|j| alloc::format!("{}", prob.support[j])).collect(),
            p,
        );
    }

    for _iter in 0..200 {
        let p = probs_for(&lambda);
        // Gradient and Hessian of the dual.
        let means: Vec<f64> = prob
            .constraints
            .iter()
            .map(|c| c.values.iter().zip(&p).map(|(f, q)| f * q).sum())
            .collect();
        let grad: Vec<f64> = (0..l).map(|i| prob.constraints[i].target - means[i]).collect();
        let residual = grad.iter().fold(0.0f64, |a, g| a.max(math::abs(*g)));
        if residual < tol {
            return DiscretePrior::new(
                (0..k).map(|j| alloc::format!("{}", prob.support[j])).collect(),
                p,
            );
        }
        let mut hess = vec![vec![0.0; l]; l];
        for a in 0..l {
            for b in a..l {
                let mut cov = 0.0;
                for j in 0..k {
                    cov += (prob.constraints[a].values[j] - means[a])
                        * (prob.constraints[b].values[j] - means[b])
                        * p[j];
                }
                hess[a][b] = cov;
                hess[b][a] = cov;
            }
        }
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let delta = linalg::solve(&hess, &neg_grad)
            .map_err(|_| Error::Infeasible("singular constraint covariance".to_string()))?;
        // Damped step: backtrack on the dual objective.
        let f0 = dual(&lambda);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> =
                lambda.iter().zip(&delta).map(|(l0, d)| l0 + step * d).collect();
            let f1 = dual(&cand);
            if f1.is_finite() && f1 <= f0 + 1e-12 {
                lambda = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::Infeasible("dual line search failed".to_string()));
        }
        if lambda.iter().any(|v| !v.is_finite() || math::abs(*v) > 1e10) {
            return Err(Error::Infeasible("dual multipliers diverged".to_string()));
        }
    }
    Err(Error::Tolerance("maximum entropy Newton iteration budget exhausted".to_string()))
}

/// Directed Kullback-Leibler divergence D(p || q).
pub fn kl_divergence(p: &DiscretePrior, q: &DiscretePrior) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension("supports must align".to_string()));
    }
    let mut d = 0.0;
    for (pi, qi) in p.probs.iter().zip(&q.probs) {
        if *pi > 0.0 {
            if *qi <= 0.0 {
                return Err(Error::Support(
                    "q vanishes where p has positive mass".to_string(),
                ));
            }
            d += pi * math::ln(pi / qi);
        }
    }
    Ok(d.max(0.0))
}

/// Deviance -2 sum(log_liks).
pub fn deviance(log_liks: &[f64]) -> f64 {
    -2.0 * log_liks.iter().sum::<f64>()
}

/// Log marginal likelihood of a model and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvidenceMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelEvidence {
    pub log_evidence: f64,
    pub method: EvidenceMethod,
}

/// Bayes factor B_ij of two model evidences.
pub fn bayes_factor(evidence_i: &ModelEvidence, evidence_j: &ModelEvidence) -> f64 {
    math::exp(evidence_i.log_evidence - evidence_j.log_evidence)
}

/// Closed-form Bayes factor of two Beta-binomial models that share the
/// data (y successes in n trials) but differ in their Beta priors.
pub fn bayes_factor_beta_binomial(
    prior1: (f64, f64),
    prior2: (f64, f64),
    y: u64,
    n: u64,
) -> Result<f64> {
    if y > n {
        return Err(Error::Domain("y exceeds n".to_string()));
    }
    let (a1, b1) = prior1;
    let (a2, b2) = prior2;
    if a1 <= 0.0 || b1 <= 0.0 || a2 <= 0.0 || b2 <= 0.0 {
        return Err(Error::Parameter("Beta hyperparameters must be positive".to_string()));
    }
    let (yf, nf) = (y as f64, n as f64);
    let log_b12 = math::ln_beta(a1 + yf, b1 + nf - yf) - math::ln_beta(a2 + yf, b2 + nf - yf)
        + math::ln_beta(a2, b2)
        - math::ln_beta(a1, b1);
    Ok(math::exp(log_b12))
}

/// Evidence classification bands for a Bayes factor B12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JeffreysLabel {
    Supported,
    WeakAgainst,
    SubstantialAgainst,
    StrongAgainst,
    VeryStrongAgainst,
    DecisiveAgainst,
}

impl JeffreysLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            JeffreysLabel::Supported => "supported",
            JeffreysLabel::WeakAgainst => "weak-against",
            JeffreysLabel::SubstantialAgainst => "substantial-against",
            JeffreysLabel::StrongAgainst => "strong-against",
            JeffreysLabel::VeryStrongAgainst => "very-strong-against",
            JeffreysLabel::DecisiveAgainst => "decisive-against",
        }
    }
}

/// Jeffreys' scale for a Bayes factor; band boundaries are assigned to
/// the stronger-evidence side.
pub fn jeffreys_classify(b12: f64) -> Result<JeffreysLabel> {
    if !(b12 > 0.0) {
        return Err(Error::Domain("Bayes factor must be positive".to_string()));
    }
    let l = if b12 > 1.0 {
        JeffreysLabel::Supported
    } else if b12 > math::powf(10.0, -0.5) {
        JeffreysLabel::WeakAgainst
    } else if b12 > 0.1 {
        JeffreysLabel::SubstantialAgainst
    } else if b12 > math::powf(10.0, -1.5) {
        JeffreysLabel::StrongAgainst
    } else if b12 > 0.01 {
        JeffreysLabel::VeryStrongAgainst
    } else {
        JeffreysLabel::DecisiveAgainst
    };
    Ok(l)
}

/// Average (marginal) likelihood by grid quadrature: the total-data
/// log likelihood integrated against a proper 1- or 2-dimensional
/// prior. The grid spans all but 1e-10 of the prior mass.
pub fn evidence_quadrature(
    log_likelihood: impl Fn(&[f64]) -> f64,
    prior: &Distribution,
    grid: usize,
) -> Result<ModelEvidence> {
    let grid = grid.max(16);
    match prior {
        Distribution::MultivariateGauss { mu, cov } => {
            if mu.len() != 2 {
                return Err(Error::Dimension(
                    "quadrature evidence supports at most 2 parameters".to_string(),
                ));
            }
            let sds: Vec<f64> = (0..2).map(|i| math::sqrt(cov[i][i])).collect();
            let half_width = 7.5;
            let los: Vec<f64> = (0..2).map(|i| mu[i] - half_width * sds[i]).collect();
            let his: Vec<f64> = (0..2).map(|i| mu[i] + half_width * sds[i]).collect();
            let d0 = (his[0] - los[0]) / grid as f64;
            let d1 = (his[1] - los[1]) / grid as f64;
            let mut terms = Vec::with_capacity(grid * grid);
            let log_cell = math::ln(d0 * d1);
            for i in 0..grid {
                let x0 = los[0] + (i as f64 + 0.5) * d0;
                for j in 0..grid {
                    let x1 = los[1] + (j as f64 + 0.5) * d1;
                    let theta = [x0, x1];
                    let lp = prior.log_density_vec(&theta)?;
                    terms.push(log_likelihood(&theta) + lp + log_cell);
                }
            }
            Ok(ModelEvidence {
                log_evidence: math::log_sum_exp(&terms),
                method: EvidenceMethod::Quadrature,
            })
        }
        Distribution::MultivariateT { .. } => Err(Error::Dimension(
            "quadrature evidence requires a Gauss prior in 2 dimensions".to_string(),
        )),
        univariate => {
            // Bounded supports are covered exactly; otherwise the grid
            // spans all but a vanishing fraction of the prior mass.
            let eps = 5e-14;
            let (lo, hi) = match univariate {
                Distribution::Beta { .. } => (0.0, 1.0),
                Distribution::ContinuousUniform { a, b } => (*a, *b),
                Distribution::TruncatedJeffreys { a, b } => (*a, *b),
                Distribution::Gamma { .. }
                | Distribution::InverseGamma { .. }
                | Distribution::Exponential { .. } => (0.0, univariate.quantile(1.0 - eps)?),
                Distribution::Pareto { y_min, .. } => {
                    (*y_min, univariate.quantile(1.0 - eps)?)
                }
                _ => (univariate.quantile(eps)?, univariate.quantile(1.0 - eps)?),
            };
            let dx = (hi - lo) / grid as f64;
            // Each cell's prior mass is an exact CDF difference, so the
            // quadrature error comes only from the likelihood variation
            // within a cell; this keeps endpoint-singular priors exact.
            let mut terms = Vec::with_capacity(grid);
            let mut cdf_left = univariate.cdf(lo)?;
            for i in 0..grid {
                let x = lo + (i as f64 + 0.5) * dx;
                let cdf_right = univariate.cdf(lo + (i as f64 + 1.0) * dx)?;
                let mass = (cdf_right - cdf_left).max(0.0);
                cdf_left = cdf_right;
                if mass == 0.0 {
                    continue;
                }
                terms.push(log_likelihood(&[x]) + math::ln(mass));
            }
            Ok(ModelEvidence {
                log_evidence: math::log_sum_exp(&terms),
                method: EvidenceMethod::Quadrature,
            })
        }
    }
}

/// Matrix of log single-datum likelihood values, one row per posterior
/// draw and one column per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseLogLik {
    pub values: Vec<Vec<f64>>,
}

impl PointwiseLogLik {
    /// Fills the matrix from a fitted model and its chains.
    pub fn from_glm(model: &Compiled, chains: &ChainSet) -> Self {
        let mut values = Vec::with_capacity(chains.total_draws());
        for chain in &chains.chains {
            for draw in chain {
                values.push((0..model.n_obs).map(|i| model.obs_log_lik(draw, i)).collect());
            }
        }
        PointwiseLogLik { values }
    }

    pub fn n_draws(&self) -> usize {
        self.values.len()
    }

    pub fn n_obs(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waic {
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
    /// Standard error of the WAIC estimate from the pointwise spread.
    pub se: f64,
}

/// Watanabe-Akaike information criterion from pointwise log
/// likelihoods: lppd via log-sum-exp over draws, the effective
/// parameter count from the Jensen gap, WAIC = -2 lppd + 2 p_waic.
pub fn waic(pointwise: &PointwiseLogLik) -> Result<Waic> {
    let s = pointwise.n_draws();
    let n = pointwise.n_obs();
    if s == 0 || n == 0 {
        return Err(Error::EmptyData);
    }
    let ln_s = math::ln(s as f64);
    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    let mut pointwise_waic = Vec::with_capacity(n);
    let mut col = vec![0.0; s];
    for i in 0..n {
        for (r, row) in pointwise.values.iter().enumerate() {
            col[r] = row[i];
        }
        let log_mean = math::log_sum_exp(&col) - ln_s;
        let mean_log = math::mean(&col);
        let p_i = 2.0 * (log_mean - mean_log);
        lppd += log_mean;
        p_waic += p_i;
        pointwise_waic.push(-2.0 * log_mean + 2.0 * p_i);
    }
    let se = if n > 1 {
        math::sqrt(n as f64 * math::sample_variance(&pointwise_waic))
    } else {
        0.0
    };
    Ok(Waic { waic: -2.0 * lppd + 2.0 * p_waic, lppd, p_waic, se })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dic {
    pub dic: f64,
    pub p_dic: f64,
    pub mean_deviance: f64,
}

/// Deviance information criterion: posterior-mean deviance plus the
/// effective parameter count, with the data-only standardising term
/// set to zero (it is constant across models on the same data).
pub fn dic(chains: &ChainSet, likelihood: &LogTarget) -> Result<Dic> {
    let total = chains.total_draws();
    if total == 0 {
        return Err(Error::EmptyData);
    }
    let dim = chains.param_names.len();
    let mut mean_dev = 0.0;
    let mut mean_theta = vec![0.0; dim];
    for chain in &chains.chains {
        for draw in chain {
            mean_dev += -2.0 * likelihood.log_density(draw);
            for (m, v) in mean_theta.iter_mut().zip(draw) {
                *m += v;
            }
        }
    }
    mean_dev /= total as f64;
    for m in mean_theta.iter_mut() {
        *m /= total as f64;
    }
    let dev_at_mean = -2.0 * likelihood.log_density(&mean_theta);
    let p_dic = mean_dev - dev_at_mean;
    Ok(Dic { dic: mean_dev + p_dic, p_dic, mean_deviance: mean_dev })
}
