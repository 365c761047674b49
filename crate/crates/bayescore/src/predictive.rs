//! Prior and posterior predictive simulation.
//!
//! The posterior predictive follows the simulation recipe for fitted
//! models: for every posterior draw, evaluate the linear form of the
//! new case, apply the inverse link, and sample one new observation
//! from the single-datum likelihood with that draw's dispersion
//! parameters. Calibration is summarised through probability integral
//! transform (PIT) values and histogram bins.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::glm::{Compiled, DesignMatrix};
use crate::math;
use crate::rng::Rng;
use crate::sampler::ChainSet;
use alloc::string::ToString;
use alloc::vec::Vec;

/// Simulated predictive draws: one row per simulation (posterior draw),
/// one column per new case.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveSample {
    pub draws: Vec<Vec<f64>>,
    pub n_cases: usize,
}

impl PredictiveSample {
    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    /// All draws of one case column.
    pub fn case(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[j]).collect()
    }

    /// CSV rendering: draw index column then one column per case.
    pub fn render_csv(&self) -> alloc::string::String {
        let mut out = alloc::string::String::from("draw");
        for j in 0..self.n_cases {
            out.push_str(&alloc::format!(",case_{}", j + 1));
        }
        out.push('\n');
        for (i, row) in self.draws.iter().enumerate() {
            out.push_str(&alloc::format!("{i}"));
            for v in row {
                out.push_str(&alloc::format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Prior predictive simulation for a single-parameter likelihood:
/// draw theta from the prior, then one observation from
/// `likelihood(theta)`.
pub fn prior_predictive(
    prior: &Distribution,
    likelihood: impl Fn(f64) -> Result<Distribution>,
    rng: &mut Rng,
    n_sim: usize,
) -> Result<PredictiveSample> {
    if n_sim == 0 {
        return Err(Error::Parameter("n_sim must be >= 1".to_string()));
    }
    let mut draws = Vec::with_capacity(n_sim);
    for _ in 0..n_sim {
        let theta = prior.sample_one(rng)?;
        let y = likelihood(theta)?.sample_one(rng)?;
        draws.push(alloc::vec![y]);
    }
    Ok(PredictiveSample { draws, n_cases: 1 })
}

/// Posterior predictive simulation for a fitted model: every posterior
/// draw is used exactly once per new case. `x_new` carries the raw
/// predictor values of the m new cases; hierarchical and cell-means
/// models additionally need a group per case.
pub fn posterior_predictive(
    chains: &ChainSet,
    model: &Compiled,
    x_new: &DesignMatrix,
    groups_new: Option<&[usize]>,
    rng: &mut Rng,
) -> Result<PredictiveSample> {
    let m = x_new.n_rows();
    if m == 0 {
        return Err(Error::EmptyData);
    }
    if let Some(g) = groups_new {
        if g.len() != m {
            return Err(Error::Dimension("one group per new case required".to_string()));
        }
    }
    let total = chains.total_draws();
    if total == 0 {
        return Err(Error::EmptyData);
    }
    let mut draws = Vec::with_capacity(total);
    for chain in &chains.chains {
        for draw in chain {
            let mut row = Vec::with_capacity(m);
            for j in 0..m {
                let x_row: Vec<f64> = (0..x_new.n_predictors())
                    .map(|c| x_new.row(j)[c + 1])
                    .collect();
                let g = groups_new.map(|gs| gs[j]);
                row.push(model.sample_new_case(draw, &x_row, g, rng)?);
            }
            draws.push(row);
        }
    }
    Ok(PredictiveSample { draws, n_cases: m })
}

/// One histogram bin: [lo, hi) except the last bin which is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Per-case predictive check summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseCheck {
    pub bins: Vec<Bin>,
    /// Fraction of predictive draws strictly below the observed value.
    pub pit: f64,
    pub observed: f64,
}

/// Predictive check report: per-case histograms and PIT values plus
/// the common observed sample mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveCheckReport {
    pub cases: Vec<CaseCheck>,
    pub observed_mean: f64,
}

/// Histogram (Freedman-Diaconis bin width) and PIT value for every
/// observed case against its predictive column.
pub fn predictive_check_report(
    pred: &PredictiveSample,
    y_observed: &[f64],
) -> Result<PredictiveCheckReport> {
    if y_observed.len() != pred.n_cases {
        return Err(Error::Dimension(alloc::format!(
            "{} observations for {} predictive cases",
            y_observed.len(),
            pred.n_cases
        )));
    }
    let mut cases = Vec::with_capacity(pred.n_cases);
    for (j, &obs) in y_observed.iter().enumerate() {
        let col = pred.case(j);
        let below = col.iter().filter(|&&v| v < obs).count();
        let pit = below as f64 / col.len() as f64;
        cases.push(CaseCheck { bins: histogram(&col), pit, observed: obs });
    }
    Ok(PredictiveCheckReport { cases, observed_mean: math::mean(y_observed) })
}

fn histogram(draws: &[f64]) -> Vec<Bin> {
    let sorted = math::sorted(draws);
    let n = sorted.len();
    let lo = sorted[0];
    let hi = sorted[n - 1];
    if lo == hi {
        return alloc::vec![Bin { lo, hi, count: n }];
    }
    let iqr = math::quantile_sorted(&sorted, 0.75) - math::quantile_sorted(&sorted, 0.25);
    let fd = 2.0 * iqr / math::powf(n as f64, 1.0 / 3.0);
    let width = if fd > 0.0 { fd } else { (hi - lo) / 10.0 };
    let n_bins = (math::ceil((hi - lo) / width) as usize).clamp(1, 1000);
    let width = (hi - lo) / n_bins as f64;
    let mut bins: Vec<Bin> = (0..n_bins)
        .map(|b| Bin { lo: lo + b as f64 * width, hi: lo + (b + 1) as f64 * width, count: 0 })
        .collect();
    for &v in draws {
        let mut idx = ((v - lo) / width) as usize;
        if idx >= n_bins {
            idx = n_bins - 1;
        }
        bins[idx].count += 1;
    }
    bins
}
