//! Probability-distribution zoo.
//!
//! One tagged type covers every family used across the crate: the
//! discrete and continuous likelihood families, the conjugate prior
//! families, and the transformation-invariant reference priors. All
//! density evaluation is done in log space; linear-space values are
//! `exp` of the log form. Quantiles without a closed form are obtained
//! by safeguarded Newton iteration on the CDF.

use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::rng::Rng;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

/// Tagged union over all supported probability distributions.
///
/// Parameter names follow the conventional roles: `theta` for success
/// probabilities and rate parameters, `mu`/`sigma` for location/scale,
/// `alpha`/`beta` for shape/rate pairs. Values should be built through
/// the checked constructors; [`Distribution::validate`] re-checks the
/// invariants for values assembled literally.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Bernoulli { theta: f64 },
    Binomial { n: u64, theta: f64 },
    Poisson { theta: f64 },
    Gauss { mu: f64, sigma: f64 },
    NoncentralT { mu: f64, sigma: f64, nu: f64 },
    Exponential { theta: f64 },
    Pareto { theta: f64, y_min: f64 },
    Beta { alpha: f64, beta: f64 },
    Gamma { alpha: f64, beta: f64 },
    InverseGamma { alpha: f64, beta: f64 },
    Cauchy { x0: f64, gamma: f64 },
    Laplace { mu: f64, b: f64 },
    DiscreteUniform { k: u64 },
    ContinuousUniform { a: f64, b: f64 },
    TruncatedJeffreys { a: f64, b: f64 },
    NegativeBinomial { n: f64, theta: f64 },
    MultivariateGauss { mu: Vec<f64>, cov: Vec<Vec<f64>> },
    MultivariateT { mu: Vec<f64>, scale: Vec<Vec<f64>>, nu: f64 },
}

/// A possibly missing moment: scalar, vector or matrix valued, or
/// non-existent (diverging integral).
#[derive(Debug, Clone, PartialEq)]
pub enum MomentValue {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    Undefined,
}

impl MomentValue {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            MomentValue::Scalar(x) => Some(*x),
            _ => None,
        }
    }
}

/// Closed-form mean and variance of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mean: MomentValue,
    pub variance: MomentValue,
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg.to_string()))
    }
}

impl Distribution {
    pub fn bernoulli(theta: f64) -> Result<Self> {
        require((0.0..=1.0).contains(&theta), "Bernoulli: theta in [0,1]")?;
        Ok(Distribution::Bernoulli { theta })
    }

    pub fn binomial(n: u64, theta: f64) -> Result<Self> {
        require((0.0..=1.0).contains(&theta), "Binomial: theta in [0,1]")?;
        require(n >= 1, "Binomial: n >= 1")?;
        Ok(Distribution::Binomial { n, theta })
    }

    pub fn poisson(theta: f64) -> Result<Self> {
        require(theta > 0.0 && theta.is_finite(), "Poisson: theta > 0")?;
        Ok(Distribution::Poisson { theta })
    }

    pub fn gauss(mu: f64, sigma: f64) -> Result<Self> {
        require(mu.is_finite() && sigma > 0.0 && sigma.is_finite(), "Gauss: sigma > 0")?;
        Ok(Distribution::Gauss { mu, sigma })
    }

    pub fn noncentral_t(mu: f64, sigma: f64, nu: f64) -> Result<Self> {
        require(sigma > 0.0 && sigma.is_finite(), "NoncentralT: sigma > 0")?;
        require(nu >= 1.0 && nu.is_finite(), "NoncentralT: nu >= 1")?;
        Ok(Distribution::NoncentralT { mu, sigma, nu })
    }

    pub fn exponential(theta: f64) -> Result<Self> {
        require(theta > 0.0 && theta.is_finite(), "Exponential: theta > 0")?;
        Ok(Distribution::Exponential { theta })
    }

    pub fn pareto(theta: f64, y_min: f64) -> Result<Self> {
        require(theta > 0.0, "Pareto: theta > 0")?;
        require(y_min > 0.0, "Pareto: y_min > 0")?;
        Ok(Distribution::Pareto { theta, y_min })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        require(alpha > 0.0 && beta > 0.0, "Beta: alpha, beta > 0")?;
        Ok(Distribution::Beta { alpha, beta })
    }

    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        require(alpha > 0.0 && beta > 0.0, "Gamma: alpha, beta > 0")?;
        Ok(Distribution::Gamma { alpha, beta })
    }

    pub fn inverse_gamma(alpha: f64, beta: f64) -> Result<Self> {
        require(alpha > 0.0 && beta > 0.0, "InverseGamma: alpha, beta > 0")?;
        Ok(Distribution::InverseGamma { alpha, beta })
    }

    pub fn cauchy(x0: f64, gamma: f64) -> Result<Self> {
        require(gamma > 0.0, "Cauchy: gamma > 0")?;
        Ok(Distribution::Cauchy { x0, gamma })
    }

    pub fn laplace(mu: f64, b: f64) -> Result<Self> {
        require(b > 0.0, "Laplace: b > 0")?;
        Ok(Distribution::Laplace { mu, b })
    }

    pub fn discrete_uniform(k: u64) -> Result<Self> {
        require(k >= 1, "DiscreteUniform: k >= 1")?;
        Ok(Distribution::DiscreteUniform { k })
    }

    pub fn continuous_uniform(a: f64, b: f64) -> Result<Self> {
        require(a < b, "ContinuousUniform: a < b")?;
        Ok(Distribution::ContinuousUniform { a, b })
    }

    pub fn truncated_jeffreys(a: f64, b: f64) -> Result<Self> {
        require(0.0 < a && a < b, "TruncatedJeffreys: 0 < a < b")?;
        Ok(Distribution::TruncatedJeffreys { a, b })
    }

    pub fn negative_binomial(n: f64, theta: f64) -> Result<Self> {
        require(n > 0.0, "NegativeBinomial: n > 0")?;
        require(theta > 0.0 && theta <= 1.0, "NegativeBinomial: theta in (0,1]")?;
        Ok(Distribution::NegativeBinomial { n, theta })
    }

    pub fn multivariate_gauss(mu: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        require(!mu.is_empty() && mu.len() == cov.len(), "MultivariateGauss: dim mismatch")?;
        // Rejects non-symmetric or singular covariance matrices.
        linalg::cholesky(&cov)?;
        Ok(Distribution::MultivariateGauss { mu, cov })
    }

    pub fn multivariate_t(mu: Vec<f64>, scale: Vec<Vec<f64>>, nu: f64) -> Result<Self> {
        require(!mu.is_empty() && mu.len() == scale.len(), "MultivariateT: dim mismatch")?;
        require(nu >= 1.0, "MultivariateT: nu >= 1")?;
        linalg::cholesky(&scale)?;
        Ok(Distribution::MultivariateT { mu, scale, nu })
    }

    /// Re-checks the construction invariants.
    pub fn validate(&self) -> Result<()> {
        match self.clone() {
            Distribution::Bernoulli { theta } => Self::bernoulli(theta).map(|_| ()),
            Distribution::Binomial { n, theta } => Self::binomial(n, theta).map(|_| ()),
            Distribution::Poisson { theta } => Self::poisson(theta).map(|_| ()),
            Distribution::Gauss { mu, sigma } => Self::gauss(mu, sigma).map(|_| ()),
            Distribution::NoncentralT { mu, sigma, nu } => {
                Self::noncentral_t(mu, sigma, nu).map(|_| ())
            }
            Distribution::Exponential { theta } => Self::exponential(theta).map(|_| ()),
            Distribution::Pareto { theta, y_min } => Self::pareto(theta, y_min).map(|_| ()),
            Distribution::Beta { alpha, beta } => Self::beta(alpha, beta).map(|_| ()),
            Distribution::Gamma { alpha, beta } => Self::gamma(alpha, beta).map(|_| ()),
            Distribution::InverseGamma { alpha, beta } => {
                Self::inverse_gamma(alpha, beta).map(|_| ())
            }
            Distribution::Cauchy { x0, gamma } => Self::cauchy(x0, gamma).map(|_| ()),
            Distribution::Laplace { mu, b } => Self::laplace(mu, b).map(|_| ()),
            Distribution::DiscreteUniform { k } => Self::discrete_uniform(k).map(|_| ()),
            Distribution::ContinuousUniform { a, b } => Self::continuous_uniform(a, b).map(|_| ()),
            Distribution::TruncatedJeffreys { a, b } => Self::truncated_jeffreys(a, b).map(|_| ()),
            Distribution::NegativeBinomial { n, theta } => {
                Self::negative_binomial(n, theta).map(|_| ())
            }
            Distribution::MultivariateGauss { mu, cov } => {
                Self::multivariate_gauss(mu, cov).map(|_| ())
            }
            Distribution::MultivariateT { mu, scale, nu } => {
                Self::multivariate_t(mu, scale, nu).map(|_| ())
            }
        }
    }

    /// True for the integer-valued families.
    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            Distribution::Bernoulli { .. }
                | Distribution::Binomial { .. }
                | Distribution::Poisson { .. }
                | Distribution::DiscreteUniform { .. }
                | Distribution::NegativeBinomial { .. }
        )
    }

    fn check_integer(&self, x: f64) -> Result<u64> {
        if x < 0.0 || math::floor(x) != x || !x.is_finite() {
            return Err(Error::Domain(format!("{x} is not a valid count")));
        }
        Ok(x as u64)
    }

    /// Natural log of the pmf/pdf at `x` (univariate families only).
    pub fn log_density(&self, x: f64) -> Result<f64> {
        match self {
            Distribution::Bernoulli { theta } => {
                let y = self.check_integer(x)?;
                match y {
                    1 => Ok(math::ln(*theta)),
                    0 => Ok(math::ln1p(-*theta)),
                    _ => Err(Error::Domain("Bernoulli outcome must be 0 or 1".to_string())),
                }
            }
            Distribution::Binomial { n, theta } => {
                let y = self.check_integer(x)?;
                if y > *n {
                    return Err(Error::Domain(format!("Binomial count {y} exceeds n={n}")));
                }
                let mut ll = math::ln_choose(*n, y);
                if y > 0 {
                    ll += y as f64 * math::ln(*theta);
                }
                if y < *n {
                    ll += (*n - y) as f64 * math::ln1p(-*theta);
                }
                Ok(ll)
            }
            Distribution::Poisson { theta } => {
                let y = self.check_integer(x)?;
                Ok(y as f64 * math::ln(*theta) - theta - math::ln_factorial(y))
            }
            Distribution::Gauss { mu, sigma } => {
                let z = (x - mu) / sigma;
                Ok(-math::ln(*sigma) - math::LN_SQRT_2PI - 0.5 * z * z)
            }
            Distribution::NoncentralT { mu, sigma, nu } => {
                let z = (x - mu) / sigma;
                Ok(math::ln_gamma((nu + 1.0) / 2.0)
                    - math::ln_gamma(nu / 2.0)
                    - 0.5 * math::ln(math::PI * nu)
                    - math::ln(*sigma)
                    - 0.5 * (nu + 1.0) * math::ln1p(z * z / nu))
            }
            Distribution::Exponential { theta } => {
                if x < 0.0 {
                    return Err(Error::Domain("Exponential support is [0, inf)".to_string()));
                }
                Ok(math::ln(*theta) - theta * x)
            }
            Distribution::Pareto { theta, y_min } => {
                if x < *y_min {
                    return Err(Error::Domain(format!("Pareto support is [{y_min}, inf)")));
                }
                Ok(math::ln(*theta) + theta * math::ln(*y_min) - (theta + 1.0) * math::ln(x))
            }
            Distribution::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Domain("Beta support is [0,1]".to_string()));
                }
                if x == 0.0 {
                    return Ok(boundary_power_log(*alpha, -math::ln_beta(*alpha, *beta)));
                }
                if x == 1.0 {
                    return Ok(boundary_power_log(*beta, -math::ln_beta(*alpha, *beta)));
                }
                Ok((alpha - 1.0) * math::ln(x) + (beta - 1.0) * math::ln1p(-x)
                    - math::ln_beta(*alpha, *beta))
            }
            Distribution::Gamma { alpha, beta } => {
                if x < 0.0 {
                    return Err(Error::Domain("Gamma support is [0, inf)".to_string()));
                }
                if x == 0.0 {
                    return Ok(boundary_power_log(
                        *alpha,
                        alpha * math::ln(*beta) - math::ln_gamma(*alpha),
                    ));
                }
                Ok(alpha * math::ln(*beta) - math::ln_gamma(*alpha) + (alpha - 1.0) * math::ln(x)
                    - beta * x)
            }
            Distribution::InverseGamma { alpha, beta } => {
                if x <= 0.0 {
                    return Err(Error::Domain("InverseGamma support is (0, inf)".to_string()));
                }
                Ok(alpha * math::ln(*beta) - math::ln_gamma(*alpha)
                    - (alpha + 1.0) * math::ln(x)
                    - beta / x)
            }
            Distribution::Cauchy { x0, gamma } => {
                let z = (x - x0) / gamma;
                Ok(-math::ln(math::PI * gamma) - math::ln1p(z * z))
            }
            Distribution::Laplace { mu, b } => Ok(-math::ln(2.0 * b) - math::abs(x - mu) / b),
            Distribution::DiscreteUniform { k } => {
                let y = self.check_integer(x)?;
                if y < 1 || y > *k {
                    return Err(Error::Domain(format!("DiscreteUniform support is 1..={k}")));
                }
                Ok(-math::ln(*k as f64))
            }
            Distribution::ContinuousUniform { a, b } => {
                if x < *a || x > *b {
                    return Err(Error::Domain(format!("Uniform support is [{a}, {b}]")));
                }
                Ok(-math::ln(b - a))
            }
            Distribution::TruncatedJeffreys { a, b } => {
                if x < *a || x > *b {
                    return Err(Error::Domain(format!("Jeffreys support is [{a}, {b}]")));
                }
                Ok(-math::ln(math::ln(b / a)) - math::ln(x))
            }
            Distribution::NegativeBinomial { n, theta } => {
                let y = self.check_integer(x)?;
                let yf = y as f64;
                let mut ll = math::ln_gamma(yf + n) - math::ln_gamma(*n) - math::ln_factorial(y)
                    + n * math::ln(*theta);
                if y > 0 {
                    ll += yf * math::ln1p(-*theta);
                }
                Ok(ll)
            }
            Distribution::MultivariateGauss { .. } | Distribution::MultivariateT { .. } => Err(
                Error::Domain("vector-valued family: use log_density_vec".to_string()),
            ),
        }
    }

    /// Natural log of the pdf at a vector-valued `x`.
    pub fn log_density_vec(&self, x: &[f64]) -> Result<f64> {
        match self {
            Distribution::MultivariateGauss { mu, cov } => {
                let m = mu.len();
                if x.len() != m {
                    return Err(Error::Dimension(format!(
                        "x has length {}, mean vector has length {m}",
                        x.len()
                    )));
                }
                let l = linalg::cholesky(cov)?;
                let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
                let z = linalg::forward_solve(&l, &diff);
                let quad: f64 = z.iter().map(|v| v * v).sum();
                let ln_det: f64 = 2.0 * l.iter().enumerate().map(|(i, r)| math::ln(r[i])).sum::<f64>();
                Ok(-0.5 * (m as f64) * math::ln(2.0 * math::PI) - 0.5 * ln_det - 0.5 * quad)
            }
            Distribution::MultivariateT { mu, scale, nu } => {
                let m = mu.len();
                if x.len() != m {
                    return Err(Error::Dimension(format!(
                        "x has length {}, mean vector has length {m}",
                        x.len()
                    )));
                }
                let l = linalg::cholesky(scale)?;
                let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
                let z = linalg::forward_solve(&l, &diff);
                let quad: f64 = z.iter().map(|v| v * v).sum();
                let ln_det: f64 = 2.0 * l.iter().enumerate().map(|(i, r)| math::ln(r[i])).sum::<f64>();
                let md = m as f64;
                Ok(math::ln_gamma((nu + md) / 2.0)
                    - math::ln_gamma(nu / 2.0)
                    - 0.5 * md * math::ln(math::PI * nu)
                    - 0.5 * ln_det
                    - 0.5 * (nu + md) * math::ln1p(quad / nu))
            }
            _ => {
                if x.len() == 1 {
                    self.log_density(x[0])
                } else {
                    Err(Error::Dimension("scalar family given a vector argument".to_string()))
                }
            }
        }
    }

    /// Closed-form mean and variance; non-existence is reported as
    /// [`MomentValue::Undefined`], never as an error.
    pub fn moments(&self) -> Moments {
        use MomentValue::{Matrix, Scalar, Undefined, Vector};
        let (mean, variance) = match self {
            Distribution::Bernoulli { theta } => {
                (Scalar(*theta), Scalar(theta * (1.0 - theta)))
            }
            Distribution::Binomial { n, theta } => {
                let nf = *n as f64;
                (Scalar(nf * theta), Scalar(nf * theta * (1.0 - theta)))
            }
            Distribution::Poisson { theta } => (Scalar(*theta), Scalar(*theta)),
            Distribution::Gauss { mu, sigma } => (Scalar(*mu), Scalar(sigma * sigma)),
            Distribution::NoncentralT { mu, sigma, nu } => (
                if *nu > 1.0 { Scalar(*mu) } else { Undefined },
                if *nu > 2.0 {
                    Scalar(nu / (nu - 2.0) * sigma * sigma)
                } else {
                    Undefined
                },
            ),
            Distribution::Exponential { theta } => {
                (Scalar(1.0 / theta), Scalar(1.0 / (theta * theta)))
            }
            Distribution::Pareto { theta, y_min } => (
                if *theta > 1.0 {
                    Scalar(theta / (theta - 1.0) * y_min)
                } else {
                    Undefined
                },
                if *theta > 2.0 {
                    Scalar(theta / ((theta - 1.0) * (theta - 1.0) * (theta - 2.0)) * y_min * y_min)
                } else {
                    Undefined
                },
            ),
            Distribution::Beta { alpha, beta } => {
                let s = alpha + beta;
                (Scalar(alpha / s), Scalar(alpha * beta / (s * s * (s + 1.0))))
            }
            Distribution::Gamma { alpha, beta } => {
                (Scalar(alpha / beta), Scalar(alpha / (beta * beta)))
            }
            Distribution::InverseGamma { alpha, beta } => (
                if *alpha > 1.0 {
                    Scalar(beta / (alpha - 1.0))
                } else {
                    Undefined
                },
                if *alpha > 2.0 {
                    Scalar(beta * beta / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0)))
                } else {
                    Undefined
                },
            ),
            Distribution::Cauchy { .. } => (Undefined, Undefined),
            Distribution::Laplace { mu, b } => (Scalar(*mu), Scalar(2.0 * b * b)),
            Distribution::DiscreteUniform { k } => {
                let kf = *k as f64;
                (Scalar((kf + 1.0) / 2.0), Scalar((kf * kf - 1.0) / 12.0))
            }
            Distribution::ContinuousUniform { a, b } => {
                (Scalar((a + b) / 2.0), Scalar((b - a) * (b - a) / 12.0))
            }
            Distribution::TruncatedJeffreys { a, b } => {
                let log_ratio = math::ln(b / a);
                let mean = (b - a) / log_ratio;
                let second = (b * b - a * a) / (2.0 * log_ratio);
                (Scalar(mean), Scalar(second - mean * mean))
            }
            Distribution::NegativeBinomial { n, theta } => (
                Scalar(n * (1.0 - theta) / theta),
                Scalar(n * (1.0 - theta) / (theta * theta)),
            ),
            Distribution::MultivariateGauss { mu, cov } => {
                (Vector(mu.clone()), Matrix(cov.clone()))
            }
            Distribution::MultivariateT { mu, scale, nu } => (
                if *nu > 1.0 { Vector(mu.clone()) } else { Undefined },
                if *nu > 2.0 {
                    let f = nu / (nu - 2.0);
                    Matrix(
                        scale
                            .iter()
                            .map(|row| row.iter().map(|v| f * v).collect())
                            .collect(),
                    )
                } else {
                    Undefined
                },
            ),
        };
        Moments { mean, variance }
    }

    /// CDF at `x` for univariate families.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Distribution::Bernoulli { theta } => {
                binomial_cdf(1, *theta, x)
            }
            Distribution::Binomial { n, theta } => binomial_cdf(*n, *theta, x),
            Distribution::Poisson { theta } => {
                if x < 0.0 {
                    0.0
                } else {
                    let k = math::floor(x);
                    1.0 - math::reg_inc_gamma(k + 1.0, *theta)
                }
            }
            Distribution::Gauss { mu, sigma } => math::std_normal_cdf((x - mu) / sigma),
            Distribution::NoncentralT { mu, sigma, nu } => {
                let z = (x - mu) / sigma;
                let w = nu / (nu + z * z);
                let half_tail = 0.5 * math::reg_inc_beta(nu / 2.0, 0.5, w);
                if z <= 0.0 {
                    half_tail
                } else {
                    1.0 - half_tail
                }
            }
            Distribution::Exponential { theta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -math::expm1(-theta * x)
                }
            }
            Distribution::Pareto { theta, y_min } => {
                if x <= *y_min {
                    0.0
                } else {
                    1.0 - math::powf(y_min / x, *theta)
                }
            }
            Distribution::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    math::reg_inc_beta(*alpha, *beta, x)
                }
            }
            Distribution::Gamma { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    math::reg_inc_gamma(*alpha, beta * x)
                }
            }
            Distribution::InverseGamma { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - math::reg_inc_gamma(*alpha, beta / x)
                }
            }
            Distribution::Cauchy { x0, gamma } => {
                0.5 + math::atan((x - x0) / gamma) / math::PI
            }
            Distribution::Laplace { mu, b } => {
                if x < *mu {
                    0.5 * math::exp((x - mu) / b)
                } else {
                    1.0 - 0.5 * math::exp(-(x - mu) / b)
                }
            }
            Distribution::DiscreteUniform { k } => {
                let kf = *k as f64;
                (math::floor(x).clamp(0.0, kf)) / kf
            }
            Distribution::ContinuousUniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Distribution::TruncatedJeffreys { a, b } => {
                if x <= *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else {
                    math::ln(x / a) / math::ln(b / a)
                }
            }
            Distribution::NegativeBinomial { n, theta } => {
                if x < 0.0 {
                    0.0
                } else {
                    math::reg_inc_beta(*n, math::floor(x) + 1.0, *theta)
                }
            }
            Distribution::MultivariateGauss { .. } | Distribution::MultivariateT { .. } => {
                return Err(Error::Domain("CDF not defined for vector families".to_string()))
            }
        })
    }

    /// Quantile function.
    ///
    /// Continuous families: the x with CDF(x) = p, closed-form where
    /// available and safeguarded Newton on the CDF otherwise. Discrete
    /// families: the smallest supported x with CDF(x) >= p.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile requires p in (0,1), got {p}")));
        }
        Ok(match self {
            Distribution::Bernoulli { theta } => {
                if p <= 1.0 - theta {
                    0.0
                } else {
                    1.0
                }
            }
            Distribution::Binomial { n, theta } => {
                let m = self.moments();
                discrete_quantile(self, p, *n as f64 * theta, m.variance.scalar().unwrap_or(1.0), Some(*n))?
            }
            Distribution::Poisson { theta } => discrete_quantile(self, p, *theta, *theta, None)?,
            Distribution::NegativeBinomial { .. } => {
                let m = self.moments();
                discrete_quantile(
                    self,
                    p,
                    m.mean.scalar().unwrap_or(1.0),
                    m.variance.scalar().unwrap_or(1.0),
                    None,
                )?
            }
            Distribution::DiscreteUniform { k } => math::ceil(p * *k as f64).max(1.0),
            Distribution::Gauss { mu, sigma } => {
                newton_quantile(self, p, *mu, *sigma)?
            }
            Distribution::NoncentralT { mu, sigma, .. } => newton_quantile(self, p, *mu, *sigma)?,
            Distribution::Exponential { theta } => -math::ln1p(-p) / theta,
            Distribution::Pareto { theta, y_min } => y_min * math::powf(1.0 - p, -1.0 / theta),
            Distribution::Beta { alpha, beta } => {
                let guess = alpha / (alpha + beta);
                let spread = math::sqrt(
                    alpha * beta / ((alpha + beta) * (alpha + beta) * (alpha + beta + 1.0)),
                );
                newton_quantile(self, p, guess, spread.max(1e-3))?
            }
            Distribution::Gamma { alpha, beta } => {
                let guess = alpha / beta;
                newton_quantile(self, p, guess, math::sqrt(*alpha) / beta)?
            }
            Distribution::InverseGamma { alpha, beta } => {
                // 1/X ~ Gamma(alpha, beta): invert through the Gamma quantile.
                let g = Distribution::Gamma { alpha: *alpha, beta: *beta };
                1.0 / g.quantile(1.0 - p)?
            }
            Distribution::Cauchy { x0, gamma } => x0 + gamma * math::tan(math::PI * (p - 0.5)),
            Distribution::Laplace { mu, b } => {
                if p < 0.5 {
                    mu + b * math::ln(2.0 * p)
                } else {
                    mu - b * math::ln(2.0 * (1.0 - p))
                }
            }
            Distribution::ContinuousUniform { a, b } => a + p * (b - a),
            Distribution::TruncatedJeffreys { a, b } => a * math::powf(b / a, p),
            Distribution::MultivariateGauss { .. } | Distribution::MultivariateT { .. } => {
                return Err(Error::Domain("quantile not defined for vector families".to_string()))
            }
        })
    }

    /// One draw from the distribution (univariate families).
    pub fn sample_one(&self, rng: &mut Rng) -> Result<f64> {
        Ok(match self {
            Distribution::Bernoulli { theta } => {
                if rng.uniform() < *theta {
                    1.0
                } else {
                    0.0
                }
            }
            Distribution::Binomial { n, theta } => {
                let mut count = 0u64;
                for _ in 0..*n {
                    if rng.uniform() < *theta {
                        count += 1;
                    }
                }
                count as f64
            }
            Distribution::Poisson { theta } => sample_poisson(*theta, rng),
            Distribution::Gauss { mu, sigma } => mu + sigma * rng.standard_normal(),
            Distribution::NoncentralT { mu, sigma, nu } => {
                let z = rng.standard_normal();
                let chi2 = 2.0 * sample_gamma_unit(nu / 2.0, rng);
                mu + sigma * z / math::sqrt(chi2 / nu)
            }
            Distribution::Exponential { theta } => -math::ln(rng.uniform()) / theta,
            Distribution::Pareto { theta, y_min } => {
                y_min * math::powf(rng.uniform(), -1.0 / theta)
            }
            Distribution::Beta { alpha, beta } => {
                let g1 = sample_gamma_unit(*alpha, rng);
                let g2 = sample_gamma_unit(*beta, rng);
                g1 / (g1 + g2)
            }
            Distribution::Gamma { alpha, beta } => sample_gamma_unit(*alpha, rng) / beta,
            Distribution::InverseGamma { alpha, beta } => {
                beta / sample_gamma_unit(*alpha, rng)
            }
            Distribution::Cauchy { x0, gamma } => {
                x0 + gamma * math::tan(math::PI * (rng.uniform() - 0.5))
            }
            Distribution::Laplace { .. } => self.quantile(rng.uniform())?,
            Distribution::DiscreteUniform { k } => (rng.below(*k) + 1) as f64,
            Distribution::ContinuousUniform { a, b } => a + (b - a) * rng.uniform(),
            Distribution::TruncatedJeffreys { a, b } => a * math::powf(b / a, rng.uniform()),
            Distribution::NegativeBinomial { n, theta } => {
                // Gamma-Poisson mixture with rate theta/(1-theta).
                if *theta == 1.0 {
                    0.0
                } else {
                    let lambda = sample_gamma_unit(*n, rng) * (1.0 - theta) / theta;
                    sample_poisson(lambda, rng)
                }
            }
            Distribution::MultivariateGauss { .. } | Distribution::MultivariateT { .. } => {
                return Err(Error::Parameter(
                    "vector-valued family: use sample_vec".to_string(),
                ))
            }
        })
    }

    /// `count` iid draws; deterministic for a given `rng` state.
    pub fn sample(&self, rng: &mut Rng, count: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(self.sample_one(rng)?);
        }
        Ok(out)
    }

    /// `count` draws from a multivariate Gauss distribution via the
    /// Cholesky factorisation of the covariance matrix. Multivariate t
    /// sampling is intentionally unsupported (density evaluation only).
    pub fn sample_vec(&self, rng: &mut Rng, count: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Distribution::MultivariateGauss { mu, cov } => {
                let l = linalg::cholesky(cov)?;
                let m = mu.len();
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let z: Vec<f64> = (0..m).map(|_| rng.standard_normal()).collect();
                    let mut x = mu.clone();
                    for i in 0..m {
                        for (k, zk) in z.iter().enumerate().take(i + 1) {
                            x[i] += l[i][k] * zk;
                        }
                    }
                    out.push(x);
                }
                Ok(out)
            }
            Distribution::MultivariateT { .. } => Err(Error::Parameter(
                "multivariate t sampling is not supported".to_string(),
            )),
            _ => Ok(self
                .sample(rng, count)?
                .into_iter()
                .map(|x| alloc::vec![x])
                .collect()),
        }
    }
}

/// log density at a support boundary where the kernel behaves like
/// x^(power-1): +inf for power < 1, the finite constant for power = 1,
/// -inf for power > 1.
fn boundary_power_log(power: f64, finite_value: f64) -> f64 {
    if power < 1.0 {
        f64::INFINITY
    } else if power == 1.0 {
        finite_value
    } else {
        f64::NEG_INFINITY
    }
}

fn binomial_cdf(n: u64, theta: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = math::floor(x);
    if k >= n as f64 {
        return 1.0;
    }
    if theta == 0.0 {
        return 1.0;
    }
    if theta == 1.0 {
        return 0.0;
    }
    math::reg_inc_beta(n as f64 - k, k + 1.0, 1.0 - theta)
}

/// Smallest supported k with CDF(k) >= p, found by bisection over the
/// (cheap) closed-form CDF.
fn discrete_quantile(
    d: &Distribution,
    p: f64,
    mean: f64,
    var: f64,
    upper: Option<u64>,
) -> Result<f64> {
    let mut hi = (mean + 20.0 * math::sqrt(var.max(1.0)) + 20.0).max(2.0);
    if let Some(u) = upper {
        hi = hi.min(u as f64);
    }
    while d.cdf(hi)? < p {
        hi = match upper {
            Some(u) if hi >= u as f64 => u as f64,
            _ => hi * 2.0,
        };
        if hi > 1e18 {
            return Err(Error::Tolerance("discrete quantile search diverged".to_string()));
        }
        if let Some(u) = upper {
            if hi >= u as f64 {
                hi = u as f64;
                break;
            }
        }
    }
    let mut lo: i64 = -1;
    let mut hi: i64 = math::ceil(hi) as i64;
    // Invariant: cdf(lo) < p <= cdf(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if d.cdf(mid as f64)? >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if matches!(d, Distribution::DiscreteUniform { .. }) {
        return Ok((hi.max(1)) as f64);
    }
    Ok((hi.max(0)) as f64)
}

/// Safeguarded Newton iteration on the CDF: bracket expansion around a
/// location/scale guess, Newton steps with bisection fallback.
fn newton_quantile(d: &Distribution, p: f64, center: f64, spread: f64) -> Result<f64> {
    let bounded_below = matches!(
        d,
        Distribution::Gamma { .. } | Distribution::Beta { .. } | Distribution::InverseGamma { .. }
    );
    let bounded_above = matches!(d, Distribution::Beta { .. });

    let mut lo = center - spread;
    let mut hi = center + spread;
    if bounded_below {
        lo = lo.max(0.0);
    }
    if bounded_above {
        hi = hi.min(1.0);
    }
    let mut step = spread;
    for _ in 0..200 {
        if d.cdf(lo)? <= p {
            break;
        }
        step *= 2.0;
        lo = if bounded_below { (lo - step).max(0.0) } else { lo - step };
        if bounded_below && lo == 0.0 {
            break;
        }
    }
    let mut step = spread;
    for _ in 0..200 {
        if d.cdf(hi)? >= p {
            break;
        }
        step *= 2.0;
        hi = if bounded_above { (hi + step).min(1.0) } else { hi + step };
        if bounded_above && hi == 1.0 {
            break;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = d.cdf(x)? - p;
        if math::abs(f) < 1e-13 || (hi - lo) < 1e-15 * (1.0 + math::abs(x)) {
            break;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let pdf = match d.log_density(x) {
            Ok(ld) => math::exp(ld),
            Err(_) => 0.0,
        };
        let mut next = if pdf > 0.0 && pdf.is_finite() { x - f / pdf } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        x = next;
    }
    Ok(x)
}

/// Gamma(shape, scale 1) draw by the Marsaglia-Tsang squeeze method.
fn sample_gamma_unit(shape: f64, rng: &mut Rng) -> f64 {
    if shape < 1.0 {
        // Boost: Ga(a) = Ga(a+1) * U^(1/a)
        let g = sample_gamma_unit(shape + 1.0, rng);
        return g * math::powf(rng.uniform(), 1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / math::sqrt(9.0 * d);
    loop {
        let z = rng.standard_normal();
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v3 = v * v * v;
        let u = rng.uniform();
        if u < 1.0 - 0.0331 * z * z * z * z {
            return d * v3;
        }
        if math::ln(u) < 0.5 * z * z + d * (1.0 - v3 + math::ln(v3)) {
            return d * v3;
        }
    }
}

fn sample_poisson(theta: f64, rng: &mut Rng) -> f64 {
    if theta < 30.0 {
        // Knuth multiplication method.
        let limit = math::exp(-theta);
        let mut k = 0u64;
        let mut prod = rng.uniform();
        while prod > limit {
            k += 1;
            prod *= rng.uniform();
        }
        k as f64
    } else {
        // Hoermann's PTRS transformed rejection.
        let b = 0.931 + 2.53 * math::sqrt(theta);
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = rng.uniform() - 0.5;
            let v = rng.uniform();
            let us = 0.5 - math::abs(u);
            let k = math::floor((2.0 * a / us + b) * u + theta + 0.43);
            if us >= 0.07 && v <= v_r {
                return k;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = math::ln(v * inv_alpha / (a / (us * us) + b));
            let rhs = -theta + k * math::ln(theta) - math::ln_gamma(k + 1.0);
            if lhs <= rhs {
                return k;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    #[test]
    fn log_density_reference_values() {
        let bern = Distribution::bernoulli(0.5).unwrap();
        assert!(close(bern.log_density(1.0).unwrap(), math::ln(0.5), 1e-15));

        let std_gauss = Distribution::gauss(0.0, 1.0).unwrap();
        assert!(close(std_gauss.log_density(0.0).unwrap(), -0.9189385332046727, 1e-14));

        // Poisson(2) pmf at 3, frozen from an arbitrary-precision evaluation
        // of theta^y e^-theta / y!.
        let pois = Distribution::poisson(2.0).unwrap();
        assert!(close(pois.log_density(3.0).unwrap(), -1.7123179275482194, 1e-13));
    }

    #[test]
    fn log_density_rejects_out_of_support() {
        let par = Distribution::pareto(2.0, 1.5).unwrap();
        assert!(matches!(par.log_density(1.0), Err(Error::Domain(_))));
        let bin = Distribution::binomial(10, 0.3).unwrap();
        assert!(bin.log_density(11.0).is_err());
        assert!(bin.log_density(2.5).is_err());
        let exp = Distribution::exponential(1.0).unwrap();
        assert!(exp.log_density(-0.1).is_err());
    }

    #[test]
    fn constructor_rejects_invalid_parameters() {
        assert!(Distribution::bernoulli(1.4).is_err());
        assert!(Distribution::gauss(0.0, 0.0).is_err());
        assert!(Distribution::noncentral_t(0.0, 1.0, 0.5).is_err());
        assert!(Distribution::truncated_jeffreys(2.0, 1.0).is_err());
        assert!(Distribution::truncated_jeffreys(-1.0, 1.0).is_err());
        assert!(Distribution::multivariate_gauss(
            alloc::vec![0.0, 0.0],
            alloc::vec![alloc::vec![1.0, 2.0], alloc::vec![2.0, 1.0]],
        )
        .is_err());
    }

    #[test]
    fn moments_reference_values() {
        let m = Distribution::beta(2.0, 2.0).unwrap().moments();
        assert!(close(m.mean.scalar().unwrap(), 0.5, 1e-15));
        assert!(close(m.variance.scalar().unwrap(), 0.05, 1e-15));

        let m = Distribution::gamma(3.0, 2.0).unwrap().moments();
        assert!(close(m.mean.scalar().unwrap(), 1.5, 1e-15));
        assert!(close(m.variance.scalar().unwrap(), 0.75, 1e-15));

        let m = Distribution::cauchy(0.0, 1.0).unwrap().moments();
        assert_eq!(m.mean, MomentValue::Undefined);
        assert_eq!(m.variance, MomentValue::Undefined);

        // t moments exist only beyond the degrees-of-freedom thresholds.
        let m = Distribution::noncentral_t(1.0, 2.0, 1.0).unwrap().moments();
        assert_eq!(m.mean, MomentValue::Undefined);
        let m = Distribution::noncentral_t(1.0, 2.0, 5.0).unwrap().moments();
        assert!(close(m.variance.scalar().unwrap(), 5.0 / 3.0 * 4.0, 1e-12));
    }

    #[test]
    fn quantile_reference_values() {
        let u = Distribution::continuous_uniform(0.0, 1.0).unwrap();
        assert!(close(u.quantile(0.5).unwrap(), 0.5, 1e-15));

        let e = Distribution::exponential(1.0).unwrap();
        assert!(close(e.quantile(0.5).unwrap(), math::ln(2.0), 1e-12));

        // Frozen from a high-precision inverse-erf evaluation.
        let g = Distribution::gauss(0.0, 1.0).unwrap();
        assert!(close(g.quantile(0.975).unwrap(), 1.959963984540054, 1e-9));

        assert!(g.quantile(0.0).is_err());
        assert!(g.quantile(1.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf_for_continuous_families() {
        let families = [
            Distribution::gauss(2.0, 3.0).unwrap(),
            Distribution::noncentral_t(1.0, 2.0, 4.0).unwrap(),
            Distribution::gamma(2.5, 1.3).unwrap(),
            Distribution::gamma(0.7, 2.0).unwrap(),
            Distribution::beta(2.0, 5.0).unwrap(),
            Distribution::beta(0.6, 0.9).unwrap(),
            Distribution::inverse_gamma(3.0, 2.0).unwrap(),
            Distribution::cauchy(-1.0, 0.5).unwrap(),
            Distribution::laplace(0.5, 1.5).unwrap(),
            Distribution::pareto(2.5, 1.0).unwrap(),
            Distribution::truncated_jeffreys(0.1, 10.0).unwrap(),
        ];
        for d in &families {
            for p in [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1.0 - 1e-9] {
                let x = d.quantile(p).unwrap();
                let back = d.cdf(x).unwrap();
                assert!(
                    close(back, p, 1e-10),
                    "{d:?} p={p}: quantile={x}, cdf back={back}"
                );
            }
        }
    }

    #[test]
    fn quantile_is_smallest_count_for_discrete_families() {
        let families = [
            Distribution::binomial(17, 0.3).unwrap(),
            Distribution::poisson(4.5).unwrap(),
            Distribution::poisson(800.0).unwrap(),
            Distribution::negative_binomial(3.0, 0.4).unwrap(),
            Distribution::discrete_uniform(6).unwrap(),
        ];
        for d in &families {
            for p in [0.001, 0.2, 0.5, 0.77, 0.999] {
                let q = d.quantile(p).unwrap();
                assert!(d.cdf(q).unwrap() >= p, "{d:?} p={p} q={q}");
                let lower_support = matches!(d, Distribution::DiscreteUniform { .. });
                let min = if lower_support { 1.0 } else { 0.0 };
                if q > min {
                    assert!(d.cdf(q - 1.0).unwrap() < p, "{d:?} p={p} q={q} not minimal");
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let d = Distribution::exponential(2.0).unwrap();
        let a = d.sample(&mut Rng::new(99), 3).unwrap();
        let b = d.sample(&mut Rng::new(99), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn discrete_uniform_frequencies() {
        let d = Distribution::discrete_uniform(4).unwrap();
        let n = 100_000usize;
        let draws = d.sample(&mut Rng::new(5), n).unwrap();
        let mut counts = [0usize; 4];
        for x in draws {
            counts[x as usize - 1] += 1;
        }
        // 4 binomial standard deviations around 0.25.
        let sd = (0.25 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn gauss_sample_mean_bound() {
        let d = Distribution::gauss(5.0, 2.0).unwrap();
        let n = 100_000usize;
        let draws = d.sample(&mut Rng::new(17), n).unwrap();
        let mean = math::mean(&draws);
        // 3 sigma / sqrt(N) < 0.03 for sigma = 2, N = 1e5.
        assert!((mean - 5.0).abs() < 0.03);
    }

    #[test]
    fn sample_moments_match_closed_forms() {
        // Every univariate family with finite variance: mean and variance of
        // 1e6 draws within 4 estimated standard errors.
        let families = [
            Distribution::bernoulli(0.3).unwrap(),
            Distribution::binomial(12, 0.6).unwrap(),
            Distribution::poisson(3.5).unwrap(),
            Distribution::poisson(250.0).unwrap(),
            Distribution::gauss(-1.0, 2.5).unwrap(),
            Distribution::noncentral_t(2.0, 1.5, 7.0).unwrap(),
            Distribution::exponential(0.8).unwrap(),
            Distribution::pareto(4.0, 2.0).unwrap(),
            Distribution::beta(2.0, 3.0).unwrap(),
            Distribution::gamma(2.2, 0.9).unwrap(),
            Distribution::gamma(0.4, 1.0).unwrap(),
            Distribution::inverse_gamma(5.0, 4.0).unwrap(),
            Distribution::laplace(1.0, 2.0).unwrap(),
            Distribution::discrete_uniform(9).unwrap(),
            Distribution::continuous_uniform(-2.0, 5.0).unwrap(),
            Distribution::truncated_jeffreys(0.5, 8.0).unwrap(),
            Distribution::negative_binomial(4.0, 0.35).unwrap(),
        ];
        let n = 1_000_000usize;
        for (i, d) in families.iter().enumerate() {
            let draws = d.sample(&mut Rng::new(1000 + i as u64), n).unwrap();
            let m = d.moments();
            let mu = m.mean.scalar().unwrap();
            let var = m.variance.scalar().unwrap();
            let xbar = math::mean(&draws);
            let s2 = math::sample_variance(&draws);
            let se_mean = math::sqrt(var / n as f64);
            assert!(
                (xbar - mu).abs() < 4.0 * se_mean,
                "{d:?}: mean {xbar} vs {mu} (se {se_mean})"
            );
            // Plug-in standard error for the sample variance via the
            // empirical fourth central moment.
            let m4: f64 =
                draws.iter().map(|x| (x - xbar) * (x - xbar) * (x - xbar) * (x - xbar)).sum::<f64>()
                    / n as f64;
            let se_var = math::sqrt((m4 - s2 * s2).max(0.0) / n as f64);
            assert!(
                (s2 - var).abs() < 4.0 * se_var + 1e-12,
                "{d:?}: var {s2} vs {var} (se {se_var})"
            );
        }
    }

    #[test]
    fn multivariate_gauss_density_and_sampling() {
        let d = Distribution::multivariate_gauss(
            alloc::vec![1.0, -1.0],
            alloc::vec![alloc::vec![2.0, 0.6], alloc::vec![0.6, 1.0]],
        )
        .unwrap();
        // Independent bivariate check at the mean: density = 1/(2 pi sqrt(det)).
        let det: f64 = 2.0 * 1.0 - 0.36;
        let expect = -math::ln(2.0 * math::PI) - 0.5 * math::ln(det);
        assert!(close(d.log_density_vec(&[1.0, -1.0]).unwrap(), expect, 1e-12));
        assert!(d.log_density_vec(&[1.0]).is_err());

        let draws = d.sample_vec(&mut Rng::new(4), 200_000).unwrap();
        let mean0 = math::mean(&draws.iter().map(|x| x[0]).collect::<Vec<_>>());
        let mean1 = math::mean(&draws.iter().map(|x| x[1]).collect::<Vec<_>>());
        assert!((mean0 - 1.0).abs() < 0.02);
        assert!((mean1 + 1.0).abs() < 0.02);
        let cov01 = draws.iter().map(|x| (x[0] - mean0) * (x[1] - mean1)).sum::<f64>()
            / draws.len() as f64;
        assert!((cov01 - 0.6).abs() < 0.02);
    }

    #[test]
    fn multivariate_t_density_only() {
        let d = Distribution::multivariate_t(
            alloc::vec![0.0, 0.0],
            alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![0.0, 1.0]],
            3.0,
        )
        .unwrap();
        assert!(d.log_density_vec(&[0.3, -0.4]).unwrap().is_finite());
        assert!(d.sample_vec(&mut Rng::new(1), 1).is_err());
    }

    #[test]
    fn cauchy_equals_t_with_one_degree_of_freedom() {
        let cauchy = Distribution::cauchy(1.5, 0.7).unwrap();
        let t1 = Distribution::noncentral_t(1.5, 0.7, 1.0).unwrap();
        let mut rng = Rng::new(2);
        for _ in 0..100 {
            let x = 1.5 + 20.0 * (rng.uniform() - 0.5);
            let a = cauchy.log_density(x).unwrap();
            let b = t1.log_density(x).unwrap();
            assert!(close(a, b, 1e-12), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn beta_one_one_is_standard_uniform() {
        let be = Distribution::beta(1.0, 1.0).unwrap();
        let u = Distribution::continuous_uniform(0.0, 1.0).unwrap();
        for x in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!(close(
                be.log_density(x).unwrap(),
                u.log_density(x).unwrap(),
                1e-12
            ));
        }
    }

    #[test]
    fn t_asymptotes_to_gauss() {
        let t = Distribution::noncentral_t(1.0, 2.0, 1e6).unwrap();
        let g = Distribution::gauss(1.0, 2.0).unwrap();
        let mut x = 1.0 - 4.0 * 2.0;
        while x <= 1.0 + 4.0 * 2.0 {
            assert!(close(t.log_density(x).unwrap(), g.log_density(x).unwrap(), 1e-4));
            x += 0.25;
        }
    }

    #[test]
    fn jeffreys_scale_invariance_as_interval_mass() {
        let (a, b) = (0.2, 30.0);
        let (c, d) = (0.7, 3.1);
        let base = Distribution::truncated_jeffreys(a, b).unwrap();
        for beta in [0.031, 0.5, 2.0, 417.0] {
            let scaled = Distribution::truncated_jeffreys(beta * a, beta * b).unwrap();
            let m1 = base.cdf(d).unwrap() - base.cdf(c).unwrap();
            let m2 = scaled.cdf(beta * d).unwrap() - scaled.cdf(beta * c).unwrap();
            assert!(close(m1, m2, 1e-12));
        }
    }

    #[test]
    fn uniform_translation_invariance() {
        let base = Distribution::continuous_uniform(-1.0, 4.0).unwrap();
        let shifted = Distribution::continuous_uniform(-1.0 + 2.5, 4.0 + 2.5).unwrap();
        let m1 = base.cdf(2.0).unwrap() - base.cdf(0.5).unwrap();
        let m2 = shifted.cdf(4.5).unwrap() - shifted.cdf(3.0).unwrap();
        assert!(close(m1, m2, 1e-14));
    }

    #[test]
    fn discrete_normalization() {
        // Sum of exp(log pmf) over a support slice carrying at least
        // 1 - 1e-12 of the mass must land in [1 - 1e-9, 1].
        let cases = [
            Distribution::bernoulli(0.37).unwrap(),
            Distribution::binomial(40, 0.71).unwrap(),
            Distribution::poisson(12.3).unwrap(),
            Distribution::discrete_uniform(11).unwrap(),
            Distribution::negative_binomial(6.0, 0.45).unwrap(),
        ];
        for d in &cases {
            let hi = d.quantile(1.0 - 1e-13).unwrap_or(1.0) + 10.0;
            let lo = if matches!(d, Distribution::DiscreteUniform { .. }) { 1.0 } else { 0.0 };
            let mut total = 0.0;
            let mut k = lo;
            while k <= hi {
                if let Ok(ld) = d.log_density(k) {
                    total += math::exp(ld);
                }
                k += 1.0;
            }
            assert!(
                total <= 1.0 + 1e-12 && total >= 1.0 - 1e-9,
                "{d:?}: total mass {total}"
            );
        }
    }

    #[test]
    fn continuous_normalization_by_quadrature() {
        // Simpson integration of exp(log pdf) between extreme quantiles,
        // with a log-space substitution for the semi-infinite supports and
        // a tan substitution for the heavy-tailed families.
        let cases = [
            Distribution::gauss(0.7, 1.9).unwrap(),
            Distribution::noncentral_t(0.0, 1.0, 3.0).unwrap(),
            Distribution::cauchy(2.0, 0.5).unwrap(),
            Distribution::laplace(-1.0, 0.8).unwrap(),
            Distribution::exponential(1.7).unwrap(),
            Distribution::gamma(2.5, 1.1).unwrap(),
            Distribution::inverse_gamma(3.0, 1.0).unwrap(),
            Distribution::pareto(3.0, 0.5).unwrap(),
            Distribution::beta(2.0, 4.0).unwrap(),
            Distribution::continuous_uniform(1.0, 2.0).unwrap(),
            Distribution::truncated_jeffreys(0.3, 9.0).unwrap(),
        ];
        for d in &cases {
            let total = match d {
                Distribution::Gauss { .. } | Distribution::Laplace { .. } => {
                    simpson(|x| math::exp(d.log_density(x).unwrap()),
                            d.quantile(1e-12).unwrap(), d.quantile(1.0 - 1e-12).unwrap(), 40_001)
                }
                Distribution::NoncentralT { mu, sigma, .. }
                | Distribution::Cauchy { x0: mu, gamma: sigma } => {
                    // x = mu + sigma tan(u)
                    simpson(
                        |u| {
                            let x = mu + sigma * math::tan(u);
                            let jac = sigma / (math::cos(u) * math::cos(u));
                            math::exp(d.log_density(x).unwrap()) * jac
                        },
                        -math::PI / 2.0 + 1e-8,
                        math::PI / 2.0 - 1e-8,
                        40_001,
                    )
                }
                Distribution::Beta { .. }
                | Distribution::ContinuousUniform { .. }
                | Distribution::TruncatedJeffreys { .. } => {
                    let lo = d.quantile(1e-13).unwrap();
                    let hi = d.quantile(1.0 - 1e-13).unwrap();
                    simpson(|x| math::exp(d.log_density(x).unwrap()), lo, hi, 40_001)
                }
                _ => {
                    // Semi-infinite support: substitute x = e^v.
                    let lo = math::ln(d.quantile(1e-12).unwrap());
                    let hi = math::ln(d.quantile(1.0 - 1e-12).unwrap());
                    simpson(
                        |v| {
                            let x = math::exp(v);
                            math::exp(d.log_density(x).unwrap()) * x
                        },
                        lo,
                        hi,
                        40_001,
                    )
                }
            };
            assert!((total - 1.0).abs() < 1e-6, "{d:?}: integral {total}");
        }
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        // n must be odd (even number of panels).
        let h = (b - a) / (n - 1) as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n - 1 {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }
}
