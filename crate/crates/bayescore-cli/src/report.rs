//! Serialisable output documents written by the subcommands.

use bayescore::sampler::{ChainSet, PosteriorSummary};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q2_5: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q97_5: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub ess: f64,
    pub rhat: f64,
    pub mcse: f64,
}

impl From<&PosteriorSummary> for ParameterSummary {
    fn from(s: &PosteriorSummary) -> Self {
        let q = |p: f64| -> f64 {
            s.quantiles
                .iter()
                .find(|(pp, _)| (pp - p).abs() < 1e-12)
                .map(|(_, v)| *v)
                .unwrap_or(f64::NAN)
        };
        ParameterSummary {
            name: s.name.clone(),
            mean: s.mean,
            sd: s.sd,
            q2_5: q(0.025),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q97_5: q(0.975),
            hpd_low: s.hpd_low,
            hpd_high: s.hpd_high,
            ess: s.ess,
            rhat: s.rhat,
            mcse: s.mcse,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub seed: u64,
    pub algorithm: String,
    pub n_chains: usize,
    pub n_iter: usize,
    pub n_warmup: usize,
    pub thin: usize,
    pub data_hash: String,
    pub response_hash: String,
    pub acceptance_rate: Vec<f64>,
    pub divergences: Vec<usize>,
    pub parameters: Vec<ParameterSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DestandardizedSummary {
    pub parameters: Vec<ParameterSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub waic: f64,
    pub p_waic: f64,
    pub lppd: f64,
    pub waic_se: f64,
    pub dic: f64,
    pub p_dic: f64,
    pub mean_deviance: f64,
    pub n_obs: usize,
    pub response_hash: String,
}

/// Standardisation metadata persisted with a fit so predictions can be
/// reproduced later.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitMeta {
    pub seed: u64,
    pub n_obs: usize,
    pub response: String,
    pub predictors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_levels: Option<Vec<String>>,
    pub data_hash: String,
    pub response_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub fit: String,
    pub waic: f64,
    pub p_waic: f64,
    pub lppd: f64,
    pub dic: f64,
    pub p_dic: f64,
    pub delta_waic: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Sorted ascending by WAIC.
    pub models: Vec<ComparisonEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictiveCaseReport {
    pub case: usize,
    pub mean: f64,
    pub sd: f64,
    pub hpd_low: f64,
    pub hpd_high: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    pub bins: Vec<(f64, f64, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictiveReport {
    pub n_draws: usize,
    pub cases: Vec<PredictiveCaseReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_mean: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionReport {
    pub best_act: String,
    pub ranking: Vec<(String, f64)>,
    pub axioms: Vec<(String, String)>,
}

/// Parses a draws CSV produced by `ChainSet::render_csv` back into a
/// chain set (chain, iteration, then parameter columns).
pub fn chainset_from_csv(text: &str, warmup_used: usize, thin: usize) -> anyhow::Result<ChainSet> {
    use anyhow::{anyhow, bail};
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("draws file is empty"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "chain" || cols[1] != "iteration" {
        bail!("draws file must start with 'chain,iteration,...'");
    }
    let param_names: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    let mut chains: Vec<Vec<Vec<f64>>> = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols.len() {
            bail!("draws row {} is ragged", ln + 2);
        }
        let chain: usize = cells[0].parse().map_err(|_| anyhow!("bad chain index"))?;
        while chains.len() <= chain {
            chains.push(Vec::new());
        }
        let draw: Vec<f64> = cells[2..]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| anyhow!("bad draw value '{c}'")))
            .collect::<anyhow::Result<_>>()?;
        chains[chain].push(draw);
    }
    let n_chains = chains.len();
    Ok(ChainSet {
        param_names,
        chains,
        warmup_used,
        thin,
        seeds: vec![0; n_chains],
        acceptance_rate: vec![f64::NAN; n_chains],
        divergences: vec![0; n_chains],
        max_abs_delta_h: vec![0.0; n_chains],
    })
}
