//! Discrete propositional probability calculus: contingency tables,
//! marginalisation, the two-proposition and k-proposition forms of
//! Bayes' theorem, and the generalised sum rule.

use crate::error::{Error, Result};
use crate::math;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

const NORM_TOL: f64 = 1e-12;

/// Discrete probability distribution over labelled support points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePrior {
    pub support: Vec<String>,
    pub probs: Vec<f64>,
}

impl DiscretePrior {
    /// Checked constructor: probabilities must be non-negative and sum
    /// to one within 1e-12.
    pub fn new(support: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::Dimension("support/probs length mismatch".to_string()));
        }
        if probs.is_empty() {
            return Err(Error::EmptyData);
        }
        if probs.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::Consistency("probabilities must be non-negative".to_string()));
        }
        let total: f64 = probs.iter().sum();
        if math::abs(total - 1.0) > NORM_TOL {
            return Err(Error::Consistency(alloc::format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(DiscretePrior { support, probs })
    }

    /// Uniform distribution over `k` anonymous support points.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyData);
        }
        let p = 1.0 / k as f64;
        Ok(DiscretePrior {
            support: (0..k).map(|i| alloc::format!("{i}")).collect(),
            probs: alloc::vec![p; k],
        })
    }

    /// Builds from unnormalised non-negative weights.
    pub fn from_weights(support: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Degenerate("weights sum to zero".to_string()));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        DiscretePrior::new(support, probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Joint probability table over two finite proposition sets
/// (an r x c contingency table).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub labels_row: Vec<String>,
    pub labels_col: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

impl JointTable {
    pub fn new(labels_row: Vec<String>, labels_col: Vec<String>, cells: Vec<Vec<f64>>) -> Result<Self> {
        if cells.len() != labels_row.len() || cells.iter().any(|r| r.len() != labels_col.len()) {
            return Err(Error::Dimension("table shape does not match labels".to_string()));
        }
        let mut total = 0.0;
        for row in &cells {
            for &c in row {
                if c < 0.0 || !c.is_finite() {
                    return Err(Error::Consistency("cells must be non-negative".to_string()));
                }
                total += c;
            }
        }
        if math::abs(total - 1.0) > NORM_TOL {
            return Err(Error::Consistency(alloc::format!("cells sum to {total}, not 1")));
        }
        Ok(JointTable { labels_row, labels_col, cells })
    }
}

/// Row and column marginal distributions of a joint table.
pub fn marginalize(t: &JointTable) -> (DiscretePrior, DiscretePrior) {
    let row: Vec<f64> = t.cells.iter().map(|r| r.iter().sum()).collect();
    let ncol = t.labels_col.len();
    let mut col = alloc::vec![0.0; ncol];
    for r in &t.cells {
        for (j, &c) in r.iter().enumerate() {
            col[j] += c;
        }
    }
    (
        DiscretePrior { support: t.labels_row.clone(), probs: row },
        DiscretePrior { support: t.labels_col.clone(), probs: col },
    )
}

/// Posterior probability of a proposition from its prior, the true
/// positive rate P(B|A) and the false positive rate P(B|not A).
pub fn bayes_two_prop(prior: f64, tpr: f64, fpr: f64) -> Result<f64> {
    for (name, v) in [("prior", prior), ("tpr", tpr), ("fpr", fpr)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Consistency(alloc::format!("{name}={v} outside [0,1]")));
        }
    }
    let evidence = tpr * prior + fpr * (1.0 - prior);
    if evidence <= 0.0 {
        return Err(Error::Degenerate(
            "evidence impossible under both hypotheses".to_string(),
        ));
    }
    Ok(tpr * prior / evidence)
}

/// Grid-discretised Bayes' theorem: posterior[i] is proportional to
/// exp(log_likelihood[i]) * prior[i], renormalised via log-sum-exp.
///
/// Support points with zero prior stay at zero regardless of their
/// likelihood.
pub fn bayes_grid(prior: &DiscretePrior, log_likelihood: &[f64]) -> Result<DiscretePrior> {
    if log_likelihood.len() != prior.len() {
        return Err(Error::Dimension("likelihood/prior length mismatch".to_string()));
    }
    let log_terms: Vec<f64> = prior
        .probs
        .iter()
        .zip(log_likelihood)
        .map(|(&p, &ll)| {
            if p == 0.0 {
                f64::NEG_INFINITY
            } else {
                math::ln(p) + ll
            }
        })
        .collect();
    let log_norm = math::log_sum_exp(&log_terms);
    if log_norm == f64::NEG_INFINITY {
        return Err(Error::Degenerate("all posterior mass underflowed".to_string()));
    }
    let probs: Vec<f64> = log_terms.iter().map(|&lt| math::exp(lt - log_norm)).collect();
    Ok(DiscretePrior { support: prior.support.clone(), probs })
}

/// Generalised sum rule P(A+B) = P(A) + P(B) - P(AB).
pub fn generalized_sum(p_a: f64, p_b: f64, p_ab: f64) -> Result<f64> {
    for (name, v) in [("P(A)", p_a), ("P(B)", p_b), ("P(AB)", p_ab)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Consistency(alloc::format!("{name}={v} outside [0,1]")));
        }
    }
    if p_ab > p_a.min(p_b) + NORM_TOL {
        return Err(Error::Consistency(
            "P(AB) exceeds min(P(A), P(B))".to_string(),
        ));
    }
    let result = p_a + p_b - p_ab;
    if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&result) {
        return Err(Error::Consistency(alloc::format!("P(A+B)={result} outside [0,1]")));
    }
    Ok(result.clamp(0.0, 1.0))
}
