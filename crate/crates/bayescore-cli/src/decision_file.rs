//! Decision-problem files: states with a prior, outcomes with
//! utilities, and one lottery row per act. Act declaration order is
//! preserved (it breaks expected-utility ties).

use anyhow::{anyhow, bail, Result};
use bayescore::decision::{DecisionMatrix, Lottery};
use bayescore::prob::DiscretePrior;

pub fn load(path: &std::path::Path) -> Result<DecisionMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow!("cannot read decision file {}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<DecisionMatrix> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| anyhow!("invalid decision file: {e}"))?;
    let obj = v.as_object().ok_or_else(|| anyhow!("decision file must be a JSON object"))?;
    for key in obj.keys() {
        if !["states", "prior", "outcomes", "utilities", "acts"].contains(&key.as_str()) {
            bail!("unknown field '{key}' in decision file");
        }
    }
    let states = string_list(obj, "states")?;
    let outcomes = string_list(obj, "outcomes")?;
    let prior_probs = number_list(obj.get("prior").ok_or_else(|| anyhow!("missing 'prior'"))?)?;
    let utilities =
        number_list(obj.get("utilities").ok_or_else(|| anyhow!("missing 'utilities'"))?)?;
    let prior = DiscretePrior::new(states.clone(), prior_probs)
        .map_err(|e| anyhow!("invalid state prior: {e}"))?;

    let acts_v = obj
        .get("acts")
        .and_then(|a| a.as_object())
        .ok_or_else(|| anyhow!("missing 'acts' object"))?;
    if acts_v.is_empty() {
        bail!("decision file declares no acts");
    }
    let mut act_names = Vec::with_capacity(acts_v.len());
    let mut cells = Vec::with_capacity(acts_v.len());
    for (name, lotteries) in acts_v {
        let rows = lotteries
            .as_array()
            .ok_or_else(|| anyhow!("act '{name}' must map to an array of lotteries"))?;
        if rows.len() != states.len() {
            bail!(
                "act '{name}' has {} lotteries for {} states",
                rows.len(),
                states.len()
            );
        }
        let mut row = Vec::with_capacity(rows.len());
        for (s, lot) in rows.iter().enumerate() {
            let probs = number_list(lot)?;
            let lottery = Lottery::new(probs).map_err(|e| {
                anyhow!("act '{name}', state '{}': invalid lottery: {e}", states[s])
            })?;
            if lottery.probs.len() != outcomes.len() {
                bail!(
                    "act '{name}', state '{}': lottery has {} entries for {} outcomes",
                    states[s],
                    lottery.probs.len(),
                    outcomes.len()
                );
            }
            row.push(lottery);
        }
        act_names.push(name.clone());
        cells.push(row);
    }
    DecisionMatrix::new(states, act_names, prior, outcomes, utilities, cells)
        .map_err(|e| anyhow!("invalid decision matrix: {e}"))
}

fn string_list(obj: &serde_json::Map<String, serde_json::Value>, key: &str) -> Result<Vec<String>> {
    obj.get(key)
        .and_then(|v| v.as_array())
        .ok_or_else(|| anyhow!("missing '{key}' array"))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(String::from)
                .ok_or_else(|| anyhow!("'{key}' entries must be strings"))
        })
        .collect()
}

fn number_list(v: &serde_json::Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| anyhow!("expected an array of numbers"))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| anyhow!("expected a number, got {x}")))
        .collect()
}
