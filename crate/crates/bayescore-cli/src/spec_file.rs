//! Declarative model-spec files: a JSON document naming the
//! likelihood, link, data columns, priors and sampler settings.
//! Unknown fields are rejected.

use anyhow::{anyhow, bail, Result};
use bayescore::dist::Distribution;
use bayescore::glm::{GroupSpec, Likelihood, LinkFunction, ModelSpec, PriorSpec};
use bayescore::sampler::Algorithm;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub likelihood: String,
    pub link: String,
    pub response: String,
    #[serde(default)]
    pub predictors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Binomial trials: a column name or a constant count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<serde_json::Value>,
    /// Poisson exposure column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure: Option<String>,
    /// Rate of the exponential prior on (nu - 2) for t likelihoods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heteroscedastic: Option<bool>,
    /// Adaptive (varying-intercept) prior on the group intercepts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchical: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<PriorsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerFile>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<DistFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<DistFile>>,
    /// Inverse-Gamma on sigma^2 or zero-centred Cauchy (half-Cauchy on
    /// sigma).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<DistFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_location: Option<DistFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_scale: Option<DistFile>,
    /// Negative-binomial size prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<DistFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistFile {
    pub dist: String,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_scale: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leapfrog: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Builds a distribution from its file form; the parameter order
/// matches the constructor signatures documented in the README.
pub fn distribution_from(name: &str, params: &[f64]) -> Result<Distribution> {
    let need = |n: usize| -> Result<()> {
        if params.len() != n {
            bail!("distribution '{name}' takes {n} parameters, got {}", params.len());
        }
        Ok(())
    };
    let d = match name {
        "bernoulli" => {
            need(1)?;
            Distribution::bernoulli(params[0])
        }
        "binomial" => {
            need(2)?;
            Distribution::binomial(params[0] as u64, params[1])
        }
        "poisson" => {
            need(1)?;
            Distribution::poisson(params[0])
        }
        "gauss" | "normal" => {
            need(2)?;
            Distribution::gauss(params[0], params[1])
        }
        "student-t" | "noncentral-t" => {
            need(3)?;
            Distribution::noncentral_t(params[0], params[1], params[2])
        }
        "exponential" => {
            need(1)?;
            Distribution::exponential(params[0])
        }
        "pareto" => {
            need(2)?;
            Distribution::pareto(params[0], params[1])
        }
        "beta" => {
            need(2)?;
            Distribution::beta(params[0], params[1])
        }
        "gamma" => {
            need(2)?;
            Distribution::gamma(params[0], params[1])
        }
        "inverse-gamma" => {
            need(2)?;
            Distribution::inverse_gamma(params[0], params[1])
        }
        "cauchy" | "half-cauchy" => {
            need(2)?;
            Distribution::cauchy(params[0], params[1])
        }
        "laplace" => {
            need(2)?;
            Distribution::laplace(params[0], params[1])
        }
        "discrete-uniform" => {
            need(1)?;
            Distribution::discrete_uniform(params[0] as u64)
        }
        "uniform" => {
            need(2)?;
            Distribution::continuous_uniform(params[0], params[1])
        }
        "jeffreys" => {
            need(2)?;
            Distribution::truncated_jeffreys(params[0], params[1])
        }
        "negative-binomial" => {
            need(2)?;
            Distribution::negative_binomial(params[0], params[1])
        }
        other => bail!("unknown distribution family '{other}'"),
    };
    d.map_err(|e| anyhow!("{e}"))
}

fn coef_prior_from(df: &DistFile) -> Result<PriorSpec> {
    if df.dist == "truncated-gauss" {
        if df.params.len() != 3 {
            bail!("truncated-gauss takes [mu0, sigma0, upper]");
        }
        return Ok(PriorSpec::TruncatedGauss {
            mu0: df.params[0],
            sigma0: df.params[1],
            upper: df.params[2],
        });
    }
    Ok(PriorSpec::Fixed(distribution_from(&df.dist, &df.params)?))
}

impl ModelFile {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read model file {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow!("invalid model file: {e}"))
    }

    /// Resolves the file against a dataset into the core model spec,
    /// response values, predictor columns and (optional) group labels.
    pub fn resolve(
        &self,
        data: &Dataset,
    ) -> Result<(ModelSpec, Vec<f64>, Vec<Vec<f64>>, Option<Vec<String>>)> {
        let y = data.numeric(&self.response)?;
        let n = y.len();
        let x_cols: Vec<Vec<f64>> = self
            .predictors
            .iter()
            .map(|p| data.numeric(p))
            .collect::<Result<_>>()?;

        let (groups, group_levels) = match &self.group {
            Some(col) => {
                let (idx, levels) = data.groups(col)?;
                let count = levels.len();
                (Some(GroupSpec::new(idx, count).map_err(|e| anyhow!("{e}"))?), Some(levels))
            }
            None => (None, None),
        };

        let trials: Option<Vec<u64>> = match &self.trials {
            None => None,
            Some(serde_json::Value::String(col)) => Some(data.counts(col)?),
            Some(serde_json::Value::Number(v)) => {
                let t = v
                    .as_u64()
                    .ok_or_else(|| anyhow!("trials must be a positive integer"))?;
                Some(vec![t; n])
            }
            Some(other) => bail!("trials must be a column name or integer, got {other}"),
        };

        let exposure: Option<Vec<f64>> = match &self.exposure {
            Some(col) => Some(data.numeric(col)?),
            None => None,
        };

        let likelihood = match self.likelihood.as_str() {
            "gauss" | "normal" | "linear" => Likelihood::Gauss,
            "student-t" => Likelihood::StudentT { nu_rate: self.nu_rate.unwrap_or(0.1) },
            "bernoulli" => Likelihood::Bernoulli,
            "binomial" => Likelihood::Binomial {
                trials: trials.clone().unwrap_or_else(|| vec![1; n]),
            },
            "poisson" => Likelihood::Poisson { exposure: exposure.clone() },
            "exponential" => Likelihood::Exponential,
            "anova" => Likelihood::AnovaCellMeans {
                heteroscedastic: self.heteroscedastic.unwrap_or(false),
                nu_rate: self.nu_rate,
            },
            "negative-binomial" => Likelihood::NegativeBinomial,
            other => bail!(
                "unknown likelihood '{other}' (expected gauss, student-t, bernoulli, binomial, poisson, exponential, anova or negative-binomial)"
            ),
        };

        let link = match self.link.as_str() {
            "identity" => LinkFunction::Identity,
            "logistic" | "logit" => LinkFunction::Logistic,
            "natural-exp" | "log" => LinkFunction::NaturalExp,
            "negative-inverse" => LinkFunction::NegativeInverse,
            other => bail!(
                "unknown link '{other}' (expected identity, logistic, natural-exp or negative-inverse)"
            ),
        };

        let priors = self.priors.clone().unwrap_or_default();
        let hierarchical = self.hierarchical.unwrap_or(false);
        if hierarchical && self.group.is_none() {
            bail!("hierarchical model requires a group column");
        }

        let is_expreg = matches!(likelihood, Likelihood::Exponential);
        let default_intercept = if is_expreg {
            PriorSpec::TruncatedGauss { mu0: -1.0, sigma0: 2.0, upper: -1.0 }
        } else {
            PriorSpec::Fixed(Distribution::Gauss { mu: 0.0, sigma: 1.0 })
        };
        let default_slope = if is_expreg {
            PriorSpec::TruncatedGauss { mu0: 0.0, sigma0: 2.0, upper: 0.0 }
        } else {
            PriorSpec::Fixed(Distribution::Gauss { mu: 0.0, sigma: 1.0 })
        };

        let intercept_prior = if hierarchical
            || (matches!(likelihood, Likelihood::AnovaCellMeans { .. })
                && (self.heteroscedastic.unwrap_or(false) || self.nu_rate.is_some()))
        {
            let location = match &priors.group_location {
                Some(df) => distribution_from(&df.dist, &df.params)?,
                None => Distribution::Gauss { mu: 0.0, sigma: 1.0 },
            };
            let scale = match &priors.group_scale {
                Some(df) => distribution_from(&df.dist, &df.params)?,
                None => Distribution::InverseGamma { alpha: 1.0, beta: 1.0 },
            };
            PriorSpec::Adaptive { location, scale }
        } else {
            match &priors.intercept {
                Some(df) => coef_prior_from(df)?,
                None => {
                    if matches!(likelihood, Likelihood::AnovaCellMeans { .. }) {
                        PriorSpec::Fixed(Distribution::Gauss { mu: 0.0, sigma: 100.0 })
                    } else {
                        default_intercept
                    }
                }
            }
        };

        let slope_priors: Vec<PriorSpec> = match &priors.slopes {
            Some(list) => list.iter().map(coef_prior_from).collect::<Result<_>>()?,
            None => vec![default_slope],
        };

        let dispersion_prior = match (&priors.sigma2, &priors.size) {
            (Some(df), _) => Some(distribution_from(&df.dist, &df.params)?),
            (None, Some(df)) => Some(distribution_from(&df.dist, &df.params)?),
            (None, None) => match likelihood {
                Likelihood::Gauss
                | Likelihood::StudentT { .. }
                | Likelihood::AnovaCellMeans { .. } => {
                    Some(Distribution::InverseGamma { alpha: 1e-3, beta: 1e-3 })
                }
                Likelihood::NegativeBinomial => Some(Distribution::Cauchy { x0: 0.0, gamma: 2.0 }),
                _ => None,
            },
        };

        let spec = ModelSpec {
            likelihood,
            link,
            intercept_prior,
            slope_priors,
            dispersion_prior,
            groups,
            standardize: self.standardize.unwrap_or(true),
            anova_scale_hyper: (2.0, 1.0),
        };
        Ok((spec, y, x_cols, group_levels))
    }

    /// Sampler configuration with CLI flags layered over the file.
    #[allow(clippy::too_many_arguments)]
    pub fn sampler_config(
        &self,
        has_conditionals: bool,
        has_gradient: bool,
        chains: Option<usize>,
        iter: Option<usize>,
        warmup: Option<usize>,
        thin: Option<usize>,
        seed: u64,
    ) -> Result<bayescore::sampler::SamplerConfig> {
        let file = self.sampler.clone().unwrap_or_default();
        let algorithm = match file.algorithm.as_deref() {
            Some("mh") => Algorithm::Mh {
                step_scale: parse_step_scale(&file.step_scale)?.unwrap_or_else(|| vec![0.25]),
            },
            Some("gibbs") => Algorithm::Gibbs,
            Some("hmc") => Algorithm::Hmc {
                step_size: file.step_size.unwrap_or(0.03),
                n_leapfrog: file.leapfrog.unwrap_or(30),
            },
            Some(other) => bail!("unknown sampler algorithm '{other}' (expected mh, gibbs or hmc)"),
            None => {
                // Prefer exact conditionals, then gradients, then MH.
                if has_conditionals {
                    Algorithm::Gibbs
                } else if has_gradient {
                    Algorithm::Hmc {
                        step_size: file.step_size.unwrap_or(0.03),
                        n_leapfrog: file.leapfrog.unwrap_or(30),
                    }
                } else {
                    Algorithm::Mh {
                        step_scale: parse_step_scale(&file.step_scale)?
                            .unwrap_or_else(|| vec![0.25]),
                    }
                }
            }
        };
        let n_iter = iter.or(file.iter).unwrap_or(2000);
        let n_warmup = warmup.or(file.warmup).unwrap_or(n_iter / 2);
        Ok(bayescore::sampler::SamplerConfig {
            n_chains: chains.or(file.chains).unwrap_or(4),
            n_iter,
            n_warmup,
            thin: thin.or(file.thin).unwrap_or(1),
            algorithm,
            seed,
            init: None,
        })
    }
}

fn parse_step_scale(v: &Option<serde_json::Value>) -> Result<Option<Vec<f64>>> {
    match v {
        None => Ok(None),
        Some(serde_json::Value::Number(x)) => {
            Ok(Some(vec![x.as_f64().ok_or_else(|| anyhow!("bad step_scale"))?]))
        }
        Some(serde_json::Value::Array(xs)) => {
            let mut out = Vec::with_capacity(xs.len());
            for x in xs {
                out.push(
                    x.as_f64()
                        .ok_or_else(|| anyhow!("step_scale entries must be numbers"))?,
                );
            }
            Ok(Some(out))
        }
        Some(other) => bail!("step_scale must be a number or array, got {other}"),
    }
}
