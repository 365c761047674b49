//! Static one-shot decision problems for a single decision-maker in
//! the subjective-expected-utility representation: decision matrices
//! of lotteries over outcomes, expected-utility evaluation, act
//! ranking, and property checks of the rational-choice axioms.

use crate::error::{Error, Result};
use crate::math;
use crate::prob::DiscretePrior;
use crate::rng::Rng;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

const NORM_TOL: f64 = 1e-12;

/// Discrete probability distribution over the outcome set.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery {
    pub probs: Vec<f64>,
}

impl Lottery {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyData);
        }
        if probs.iter().any(|p| *p < 0.0 || !p.is_finite()) {
            return Err(Error::Consistency("lottery probabilities must be non-negative".to_string()));
        }
        let total: f64 = probs.iter().sum();
        if math::abs(total - 1.0) > NORM_TOL {
            return Err(Error::Consistency(alloc::format!(
                "lottery sums to {total}, not 1"
            )));
        }
        Ok(Lottery { probs })
    }

    /// Degenerate lottery putting all mass on one outcome.
    pub fn degenerate(n_outcomes: usize, outcome: usize) -> Result<Self> {
        if outcome >= n_outcomes {
            return Err(Error::Dimension("outcome index out of range".to_string()));
        }
        let mut probs = alloc::vec![0.0; n_outcomes];
        probs[outcome] = 1.0;
        Ok(Lottery { probs })
    }
}

/// Pointwise convex combination alpha p + (1 - alpha) q.
pub fn mix(p: &Lottery, q: &Lottery, alpha: f64) -> Result<Lottery> {
    if p.probs.len() != q.probs.len() {
        return Err(Error::Dimension("lotteries span different outcome sets".to_string()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(alloc::format!("mixing weight {alpha} outside (0,1)")));
    }
    Ok(Lottery {
        probs: p
            .probs
            .iter()
            .zip(&q.probs)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect(),
    })
}

/// Acts-by-states grid of lotteries with a state prior and an
/// outcome utility table.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMatrix {
    pub states: Vec<String>,
    pub acts: Vec<String>,
    pub state_prior: DiscretePrior,
    pub outcomes: Vec<String>,
    pub utilities: Vec<f64>,
    /// cells[act][state]
    pub cells: Vec<Vec<Lottery>>,
}

impl DecisionMatrix {
    pub fn new(
        states: Vec<String>,
        acts: Vec<String>,
        state_prior: DiscretePrior,
        outcomes: Vec<String>,
        utilities: Vec<f64>,
        cells: Vec<Vec<Lottery>>,
    ) -> Result<Self> {
        if state_prior.len() != states.len() {
            return Err(Error::Dimension("prior/states mismatch".to_string()));
        }
        if utilities.len() != outcomes.len() {
            return Err(Error::Dimension("utilities/outcomes mismatch".to_string()));
        }
        if utilities.iter().any(|u| !u.is_finite()) {
            return Err(Error::Consistency("utilities must be finite".to_string()));
        }
        if cells.len() != acts.len() {
            return Err(Error::Dimension("one lottery row per act required".to_string()));
        }
        for row in &cells {
            if row.len() != states.len() {
                return Err(Error::Dimension("one lottery per state required".to_string()));
            }
            for lot in row {
                if lot.probs.len() != outcomes.len() {
                    return Err(Error::Dimension("lottery/outcome mismatch".to_string()));
                }
                Lottery::new(lot.probs.clone())?;
            }
        }
        if acts.is_empty() {
            return Err(Error::EmptyData);
        }
        Ok(DecisionMatrix { states, acts, state_prior, outcomes, utilities, cells })
    }

    fn act_index(&self, act: &str) -> Result<usize> {
        self.acts
            .iter()
            .position(|a| a == act)
            .ok_or_else(|| Error::UnknownAct(act.to_string()))
    }

    /// Expected utility of a lottery row f: sum over states of the
    /// state-prior-weighted lottery utility.
    fn eu_of_row(&self, row: &[Lottery]) -> f64 {
        row.iter()
            .zip(&self.state_prior.probs)
            .map(|(lot, pw)| {
                let inner: f64 = self
                    .utilities
                    .iter()
                    .zip(&lot.probs)
                    .map(|(u, p)| u * p)
                    .sum();
                inner * pw
            })
            .sum()
    }
}

/// Subjective expected utility of the named act: the double sum
/// over states and outcomes of U(x) f(w)(x) P(w).
pub fn expected_utility(m: &DecisionMatrix, act: &str) -> Result<f64> {
    let idx = m.act_index(act)?;
    Ok(m.eu_of_row(&m.cells[idx]))
}

/// Expected-utility maximising act with the full descending ranking;
/// ties go to the earliest-declared act.
#[derive(Debug, Clone, PartialEq)]
pub struct BestAct {
    pub act: String,
    pub eu: f64,
    pub full_ranking: Vec<(String, f64)>,
}

pub fn best_act(m: &DecisionMatrix) -> BestAct {
    let mut ranking: Vec<(usize, f64)> = m
        .cells
        .iter()
        .enumerate()
        .map(|(i, row)| (i, m.eu_of_row(row)))
        .collect();
    // Stable sort keeps declaration order among ties.
    ranking.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal));
    let full_ranking: Vec<(String, f64)> = ranking
        .iter()
        .map(|(i, eu)| (m.acts[*i].clone(), *eu))
        .collect();
    BestAct {
        act: full_ranking[0].0.clone(),
        eu: full_ranking[0].1,
        full_ranking,
    }
}

/// Result of one axiom property check.
#[derive(Debug, Clone, PartialEq)]
pub enum AxiomCheck {
    Passed,
    Failed { counterexample: String },
    NotChecked { reason: String },
}

impl AxiomCheck {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomCheck::Passed)
    }
}

/// Property-check report of the SEU-induced preference relation.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub completeness: AxiomCheck,
    pub transitivity: AxiomCheck,
    pub independence: AxiomCheck,
    pub monotonicity: AxiomCheck,
    pub continuity: AxiomCheck,
}

impl AxiomReport {
    pub fn all_checked_pass(&self) -> bool {
        self.completeness.passed()
            && self.transitivity.passed()
            && self.independence.passed()
            && self.monotonicity.passed()
    }
}

fn mix_rows(f: &[Lottery], g: &[Lottery], alpha: f64) -> Vec<Lottery> {
    f.iter()
        .zip(g)
        .map(|(p, q)| Lottery {
            probs: p
                .probs
                .iter()
                .zip(&q.probs)
                .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        })
        .collect()
}

/// Property-checks the preference relation induced by expected
/// utility on the act set extended by `samples` random mixtures:
/// completeness and transitivity (weak order), independence under
/// mixing with a common third act, and statewise monotonicity.
/// Continuity asserts existence of mixing weights and has no finite
/// certificate, so it is reported as not checked.
pub fn check_axioms(m: &DecisionMatrix, samples: usize, rng: &mut Rng) -> AxiomReport {
    const TOL: f64 = 1e-9;
    // Act pool: declared acts plus random pairwise mixtures.
    let mut pool: Vec<Vec<Lottery>> = m.cells.clone();
    let k = m.cells.len();
    for _ in 0..samples {
        let i = rng.below(k as u64) as usize;
        let j = rng.below(k as u64) as usize;
        let alpha = rng.uniform();
        pool.push(mix_rows(&m.cells[i], &m.cells[j], alpha));
    }
    let eus: Vec<f64> = pool.iter().map(|row| m.eu_of_row(row)).collect();

    // Completeness: every pair is comparable, i.e. all EUs are finite.
    let completeness = if eus.iter().all(|e| e.is_finite()) {
        AxiomCheck::Passed
    } else {
        AxiomCheck::Failed { counterexample: "non-finite expected utility".to_string() }
    };

    // Transitivity over sampled triples of the pooled act set.
    let mut transitivity = AxiomCheck::Passed;
    for _ in 0..samples.max(1000) {
        let a = rng.below(pool.len() as u64) as usize;
        let b = rng.below(pool.len() as u64) as usize;
        let c = rng.below(pool.len() as u64) as usize;
        if eus[a] >= eus[b] - TOL && eus[b] >= eus[c] - TOL && eus[a] < eus[c] - TOL {
            transitivity = AxiomCheck::Failed {
                counterexample: alloc::format!("acts ({a}, {b}, {c})"),
            };
            break;
        }
    }

    // Independence: mixing with a common third act preserves the
    // preference sign for every sampled weight.
    let mut independence = AxiomCheck::Passed;
    'indep: for _ in 0..samples.max(100) {
        let a = rng.below(pool.len() as u64) as usize;
        let b = rng.below(pool.len() as u64) as usize;
        let h = rng.below(pool.len() as u64) as usize;
        let alpha = rng.uniform();
        let mixed_a = m.eu_of_row(&mix_rows(&pool[a], &pool[h], alpha));
        let mixed_b = m.eu_of_row(&mix_rows(&pool[b], &pool[h], alpha));
        let direct = eus[a] - eus[b];
        let mixed = mixed_a - mixed_b;
        if (direct > TOL && mixed < -TOL) || (direct < -TOL && mixed > TOL) {
            independence = AxiomCheck::Failed {
                counterexample: alloc::format!("acts ({a}, {b}) mixed with {h} at {alpha}"),
            };
            break 'indep;
        }
    }

    // Monotonicity: statewise EU dominance implies global weak
    // preference.
    let state_eu = |row: &[Lottery], s: usize| -> f64 {
        m.utilities
            .iter()
            .zip(&row[s].probs)
            .map(|(u, p)| u * p)
            .sum()
    };
    let mut monotonicity = AxiomCheck::Passed;
    'mono: for a in 0..pool.len() {
        for b in 0..pool.len() {
            let dominates = (0..m.states.len())
                .all(|s| state_eu(&pool[a], s) >= state_eu(&pool[b], s) - TOL);
            if dominates && eus[a] < eus[b] - TOL {
                monotonicity = AxiomCheck::Failed {
                    counterexample: alloc::format!("acts ({a}, {b})"),
                };
                break 'mono;
            }
        }
    }

    AxiomReport {
        completeness,
        transitivity,
        independence,
        monotonicity,
        continuity: AxiomCheck::NotChecked {
            reason: "existential mixing weights admit no finite certificate".to_string(),
        },
    }
}
