//! MCMC engine: random-walk Metropolis-Hastings, Gibbs sweeps over
//! full conditionals, and Hamiltonian Monte Carlo with leapfrog
//! integration, plus the convergence diagnostics used to vet the
//! simulated posteriors (split R-hat, effective sample size,
//! autocorrelation, highest-posterior-density intervals).
//!
//! Chains are independent: each owns its RNG stream (derived by
//! splitting the master seed), so runs are reproducible regardless of
//! execution order and chains may run in parallel.

use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type CondFn = dyn Fn(usize, &[f64], &mut Rng) -> f64 + Send + Sync;
type InitFn = dyn Fn(&mut Rng) -> Vec<f64> + Send + Sync;

/// How a sampling-space coordinate maps to the reported parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// Reported value is exp(x) (log-scale positive parameter).
    Exp,
    /// Reported value is 2 + exp(x) (degrees of freedom above 2).
    ExpPlusTwo,
}

impl Transform {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Exp => math::exp(x),
            Transform::ExpPlusTwo => 2.0 + math::exp(x),
        }
    }
}

/// Unnormalised log posterior over a fixed-dimension parameter vector,
/// with optional gradient, per-coordinate full conditionals, and an
/// initial-value sampler (typically the prior).
pub struct LogTarget {
    dim: usize,
    param_names: Vec<String>,
    eval: Box<EvalFn>,
    gradient: Option<Box<GradFn>>,
    full_conditionals: Option<Box<CondFn>>,
    init_sampler: Option<Box<InitFn>>,
    transforms: Vec<Transform>,
}

impl LogTarget {
    pub fn new(
        param_names: Vec<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let dim = param_names.len();
        LogTarget {
            dim,
            param_names,
            eval: Box::new(eval),
            gradient: None,
            full_conditionals: None,
            init_sampler: None,
            transforms: vec![Transform::Identity; dim],
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Box::new(gradient));
        self
    }

    /// Per-coordinate samplers from the full conditional distribution
    /// given the current values of all other coordinates.
    pub fn with_full_conditionals(
        mut self,
        conditionals: impl Fn(usize, &[f64], &mut Rng) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.full_conditionals = Some(Box::new(conditionals));
        self
    }

    pub fn with_init_sampler(
        mut self,
        init: impl Fn(&mut Rng) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.init_sampler = Some(Box::new(init));
        self
    }

    pub fn with_transforms(mut self, transforms: Vec<Transform>) -> Self {
        assert_eq!(transforms.len(), self.dim);
        self.transforms = transforms;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_full_conditionals(&self) -> bool {
        self.full_conditionals.is_some()
    }

    #[inline]
    pub fn log_density(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    #[inline]
    pub fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
}

/// Sampling algorithm and its tuning constants.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    /// Random-walk Metropolis-Hastings with a symmetric Gauss proposal;
    /// `step_scale` holds one entry per coordinate (a single entry is
    /// broadcast).
    Mh { step_scale: Vec<f64> },
    Gibbs,
    Hmc { step_size: f64, n_leapfrog: usize },
}

/// Run configuration shared by all samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n_chains: usize,
    /// Total iterations per chain, warmup included.
    pub n_iter: usize,
    pub n_warmup: usize,
    pub thin: usize,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Optional per-chain initial values in sampling space.
    pub init: Option<Vec<Vec<f64>>>,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 {
            return Err(Error::Parameter("n_chains must be >= 1".to_string()));
        }
        if self.n_warmup >= self.n_iter {
            return Err(Error::Parameter("n_warmup must be < n_iter".to_string()));
        }
        if self.thin == 0 {
            return Err(Error::Parameter("thin must be >= 1".to_string()));
        }
        match &self.algorithm {
            Algorithm::Mh { step_scale } => {
                if step_scale.is_empty() || step_scale.iter().any(|s| *s <= 0.0) {
                    return Err(Error::Parameter("step_scale entries must be > 0".to_string()));
                }
            }
            Algorithm::Hmc { step_size, n_leapfrog } => {
                if *step_size <= 0.0 {
                    return Err(Error::Parameter("step_size must be > 0".to_string()));
                }
                if *n_leapfrog == 0 {
                    return Err(Error::Parameter("n_leapfrog must be >= 1".to_string()));
                }
            }
            Algorithm::Gibbs => {}
        }
        Ok(())
    }
}

/// Post-warmup draws of one chain (reported scale) plus run statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    pub divergences: usize,
    pub max_abs_delta_h: f64,
}

/// Post-warmup draws of every chain, on the reported (natural) scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSet {
    pub param_names: Vec<String>,
    /// chain -> draw -> coordinate.
    pub chains: Vec<Vec<Vec<f64>>>,
    pub warmup_used: usize,
    pub thin: usize,
    pub seeds: Vec<u64>,
    pub acceptance_rate: Vec<f64>,
    pub divergences: Vec<usize>,
    pub max_abs_delta_h: Vec<f64>,
}

impl ChainSet {
    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.chains.first().map_or(0, Vec::len)
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn param_index(&self, param: &str) -> Result<usize> {
        self.param_names
            .iter()
            .position(|n| n == param)
            .ok_or_else(|| Error::Dimension(format!("unknown parameter '{param}'")))
    }

    /// All post-warmup draws of one parameter, chains concatenated in
    /// chain order.
    pub fn pooled(&self, param: &str) -> Result<Vec<f64>> {
        let idx = self.param_index(param)?;
        let mut out = Vec::with_capacity(self.total_draws());
        for chain in &self.chains {
            out.extend(chain.iter().map(|draw| draw[idx]));
        }
        Ok(out)
    }

    /// Per-chain draw series of one parameter.
    pub fn per_chain(&self, param: &str) -> Result<Vec<Vec<f64>>> {
        let idx = self.param_index(param)?;
        Ok(self
            .chains
            .iter()
            .map(|chain| chain.iter().map(|draw| draw[idx]).collect())
            .collect())
    }

    /// Draw matrix rendered as CSV: one row per post-warmup draw,
    /// columns = chain index, draw index, then the parameters in
    /// declaration order.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("chain,iteration");
        for name in &self.param_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (c, chain) in self.chains.iter().enumerate() {
            for (i, draw) in chain.iter().enumerate() {
                out.push_str(&format!("{c},{i}"));
                for v in draw {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

fn find_init(
    target: &LogTarget,
    cfg: &SamplerConfig,
    chain: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if let Some(init) = &cfg.init {
        let x = init
            .get(chain)
            .cloned()
            .ok_or_else(|| Error::Init(format!("no init values for chain {chain}")))?;
        if x.len() != target.dim() {
            return Err(Error::Init("init vector has wrong dimension".to_string()));
        }
        if target.log_density(&x).is_finite() {
            return Ok(x);
        }
        return Err(Error::Init("supplied init has non-finite density".to_string()));
    }
    for _ in 0..1000 {
        let x: Vec<f64> = match &target.init_sampler {
            Some(init) => init(rng),
            None => (0..target.dim()).map(|_| rng.standard_normal()).collect(),
        };
        if target.log_density(&x).is_finite() {
            return Ok(x);
        }
    }
    Err(Error::Init(
        "no finite-density starting point found in 1000 attempts".to_string(),
    ))
}

/// Runs a single chain; `chain` selects the RNG stream, so results do
/// not depend on scheduling across chains.
pub fn run_single_chain(target: &LogTarget, cfg: &SamplerConfig, chain: usize) -> Result<ChainRun> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.seed).split(chain as u64);
    let mut x = find_init(target, cfg, chain, &mut rng)?;
    let kept = (cfg.n_iter - cfg.n_warmup).div_ceil(cfg.thin);
    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(kept);
    let mut accepted = 0usize;
    let mut divergences = 0usize;
    let mut max_abs_dh: f64 = 0.0;

    match &cfg.algorithm {
        Algorithm::Mh { step_scale } => {
            let scale = broadcast(step_scale, target.dim())?;
            let mut fx = target.log_density(&x);
            let mut proposal = vec![0.0; target.dim()];
            for iter in 0..cfg.n_iter {
                for (j, p) in proposal.iter_mut().enumerate() {
                    *p = x[j] + scale[j] * rng.standard_normal();
                }
                let fy = target.log_density(&proposal);
                let accept = fy - fx >= 0.0 || math::ln(rng.uniform()) < fy - fx;
                if accept {
                    x.copy_from_slice(&proposal);
                    fx = fy;
                    accepted += 1;
                }
                record(&mut draws, target, cfg, iter, &x);
            }
        }
        Algorithm::Gibbs => {
            let cond = target
                .full_conditionals
                .as_ref()
                .ok_or(Error::MissingConditional(0))?;
            for iter in 0..cfg.n_iter {
                // Fixed ascending sweep; every coordinate moves.
                for j in 0..target.dim() {
                    x[j] = cond(j, &x, &mut rng);
                }
                accepted += 1;
                record(&mut draws, target, cfg, iter, &x);
            }
        }
        Algorithm::Hmc { step_size, n_leapfrog } => {
            let grad_fn = target
                .gradient
                .as_ref()
                .ok_or_else(|| Error::Spec("HMC requires a gradient".to_string()))?;
            let mut fx = target.log_density(&x);
            let d = target.dim();
            for iter in 0..cfg.n_iter {
                let mut p: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
                let h0 = -fx + 0.5 * p.iter().map(|v| v * v).sum::<f64>();
                let mut xq = x.clone();
                let mut g = grad_fn(&xq);
                // Leapfrog integration of the Hamiltonian dynamics with
                // -log target as the potential, identity mass matrix.
                for (pj, gj) in p.iter_mut().zip(&g) {
                    *pj += 0.5 * step_size * gj;
                }
                let mut ok = true;
                for l in 0..*n_leapfrog {
                    for (xj, pj) in xq.iter_mut().zip(&p) {
                        *xj += step_size * pj;
                    }
                    g = grad_fn(&xq);
                    if g.iter().any(|v| !v.is_finite()) {
                        ok = false;
                        break;
                    }
                    let w = if l + 1 == *n_leapfrog { 0.5 } else { 1.0 };
                    for (pj, gj) in p.iter_mut().zip(&g) {
                        *pj += w * step_size * gj;
                    }
                }
                let fy = if ok { target.log_density(&xq) } else { f64::NEG_INFINITY };
                let h1 = -fy + 0.5 * p.iter().map(|v| v * v).sum::<f64>();
                let dh = h1 - h0;
                if !dh.is_finite() || math::abs(dh) > 1000.0 {
                    // Recorded, not fatal: the proposal is rejected.
                    divergences += 1;
                } else {
                    max_abs_dh = max_abs_dh.max(math::abs(dh));
                    if dh <= 0.0 || math::ln(rng.uniform()) < -dh {
                        x = xq;
                        fx = fy;
                        accepted += 1;
                    }
                }
                record(&mut draws, target, cfg, iter, &x);
            }
        }
    }

    Ok(ChainRun {
        draws,
        acceptance_rate: accepted as f64 / cfg.n_iter as f64,
        divergences,
        max_abs_delta_h: max_abs_dh,
    })
}

#[inline]
fn record(
    draws: &mut Vec<Vec<f64>>,
    target: &LogTarget,
    cfg: &SamplerConfig,
    iter: usize,
    x: &[f64],
) {
    if iter >= cfg.n_warmup && (iter - cfg.n_warmup) % cfg.thin == 0 {
        draws.push(
            x.iter()
                .zip(&target.transforms)
                .map(|(v, t)| t.apply(*v))
                .collect(),
        );
    }
}

fn broadcast(scale: &[f64], dim: usize) -> Result<Vec<f64>> {
    if scale.len() == dim {
        Ok(scale.to_vec())
    } else if scale.len() == 1 {
        Ok(vec![scale[0]; dim])
    } else {
        Err(Error::Dimension(format!(
            "step_scale has {} entries for {} coordinates",
            scale.len(),
            dim
        )))
    }
}

/// Assembles chain runs (in chain order) into a ChainSet.
pub fn collect_chains(target: &LogTarget, cfg: &SamplerConfig, runs: Vec<ChainRun>) -> ChainSet {
    ChainSet {
        param_names: target.param_names().to_vec(),
        chains: runs.iter().map(|r| r.draws.clone()).collect(),
        warmup_used: cfg.n_warmup,
        thin: cfg.thin,
        seeds: (0..runs.len() as u64).map(|c| cfg.seed ^ c).collect(),
        acceptance_rate: runs.iter().map(|r| r.acceptance_rate).collect(),
        divergences: runs.iter().map(|r| r.divergences).collect(),
        max_abs_delta_h: runs.iter().map(|r| r.max_abs_delta_h).collect(),
    }
}

/// Runs all chains sequentially with the configured algorithm.
pub fn run(target: &LogTarget, cfg: &SamplerConfig) -> Result<ChainSet> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.n_chains);
    for chain in 0..cfg.n_chains {
        runs.push(run_single_chain(target, cfg, chain)?);
    }
    Ok(collect_chains(target, cfg, runs))
}

/// Random-walk Metropolis-Hastings.
pub fn run_mh(target: &LogTarget, cfg: &SamplerConfig) -> Result<ChainSet> {
    match cfg.algorithm {
        Algorithm::Mh { .. } => run(target, cfg),
        _ => Err(Error::Parameter("config does not select MH".to_string())),
    }
}

/// Gibbs sampling: coordinates updated from their full conditionals in
/// fixed ascending order, one full sweep per iteration.
pub fn run_gibbs(target: &LogTarget, cfg: &SamplerConfig) -> Result<ChainSet> {
    match cfg.algorithm {
        Algorithm::Gibbs => run(target, cfg),
        _ => Err(Error::Parameter("config does not select Gibbs".to_string())),
    }
}

/// Hamiltonian Monte Carlo with leapfrog integration.
pub fn run_hmc(target: &LogTarget, cfg: &SamplerConfig) -> Result<ChainSet> {
    match cfg.algorithm {
        Algorithm::Hmc { .. } => run(target, cfg),
        _ => Err(Error::Parameter("config does not select HMC".to_string())),
    }
}

// ---------------------------------------------------------------------------
// Convergence diagnostics
// ---------------------------------------------------------------------------

/// Split-chain potential scale reduction for one parameter.
///
/// Every chain is halved, then sqrt(V / W) is computed with
/// V = W + B/n, so the statistic equals 1 exactly when the between-half
/// variance vanishes and is always >= 1.
pub fn rhat(chains: &ChainSet, param: &str) -> Result<f64> {
    let series = chains.per_chain(param)?;
    if series.len() < 2 {
        return Err(Error::Dimension("R-hat needs at least 2 chains".to_string()));
    }
    if series.iter().any(|s| s.len() < 4) {
        return Err(Error::Dimension("R-hat needs at least 4 draws per chain".to_string()));
    }
    let halves = split_halves(&series);
    let n = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|h| math::mean(h)).collect();
    let within =
        math::mean(&halves.iter().map(|h| math::sample_variance(h)).collect::<Vec<_>>());
    if within == 0.0 {
        return Err(Error::Degenerate("zero within-chain variance".to_string()));
    }
    let between = n * math::sample_variance(&means);
    Ok(math::sqrt((within + between / n) / within))
}

fn split_halves(series: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let min_len = series.iter().map(Vec::len).min().unwrap_or(0);
    let half = min_len / 2;
    let mut out = Vec::with_capacity(series.len() * 2);
    for s in series {
        out.push(s[..half].to_vec());
        // Middle draw dropped when the (trimmed) length is odd.
        out.push(s[min_len - half..min_len].to_vec());
    }
    out
}

/// Effective sample size of one parameter across all chains:
/// N_total / (1 + 2 * sum of chain-averaged autocorrelations), summed
/// until the first non-positive consecutive pair and capped at
/// N_total.
pub fn ess(chains: &ChainSet, param: &str) -> Result<f64> {
    let series = chains.per_chain(param)?;
    if series.iter().any(|s| s.len() < 4) {
        return Err(Error::Dimension("ESS needs at least 4 draws per chain".to_string()));
    }
    let n_total: usize = series.iter().map(Vec::len).sum();
    let max_lag = series.iter().map(Vec::len).min().unwrap() / 2 - 1;
    let means: Vec<f64> = series.iter().map(|s| math::mean(s)).collect();
    let c0s: Vec<f64> = series
        .iter()
        .zip(&means)
        .map(|(s, m)| s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / s.len() as f64)
        .collect();
    if c0s.iter().any(|&c| c == 0.0) {
        return Err(Error::Degenerate("zero variance series".to_string()));
    }
    // Chain-averaged autocorrelation at one lag, computed on demand;
    // the Geyer truncation stops long before max_lag for mixing chains.
    let rho = |t: usize| -> f64 {
        let mut acc = 0.0;
        for ((s, m), c0) in series.iter().zip(&means).zip(&c0s) {
            let n = s.len();
            let ct: f64 =
                (0..n - t).map(|i| (s[i] - m) * (s[i + t] - m)).sum::<f64>() / n as f64;
            acc += ct / c0;
        }
        acc / series.len() as f64
    };
    let mut tail = 0.0;
    let mut t = 1;
    while t + 1 <= max_lag {
        let pair = rho(t) + rho(t + 1);
        if pair <= 0.0 {
            break;
        }
        tail += pair;
        t += 2;
    }
    let tau = 1.0 + 2.0 * tail;
    let ess = n_total as f64 / tau.max(1e-12);
    Ok(ess.min(n_total as f64))
}

/// Monte Carlo standard error of the posterior-mean estimate:
/// sd / sqrt(ESS).
pub fn mcse(chains: &ChainSet, param: &str) -> Result<f64> {
    let pooled = chains.pooled(param)?;
    let sd = math::sqrt(math::sample_variance(&pooled));
    Ok(sd / math::sqrt(ess(chains, param)?))
}

/// Biased-normalised sample autocorrelation up to `max_lag`
/// (inclusive); the lag-0 entry is exactly 1.
pub fn autocorr(draws: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = draws.len();
    if 2 * max_lag >= n {
        return Err(Error::Dimension("max_lag must be < n/2".to_string()));
    }
    let mean = math::mean(draws);
    let c0: f64 = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return Err(Error::Degenerate("zero variance series".to_string()));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(1.0);
    for t in 1..=max_lag {
        let ct: f64 = (0..n - t)
            .map(|i| (draws[i] - mean) * (draws[i + t] - mean))
            .sum::<f64>()
            / n as f64;
        out.push(ct / c0);
    }
    Ok(out)
}

/// Shortest contiguous interval containing ceil(mass * N) sorted
/// draws.
pub fn hpd_interval(draws: &[f64], mass: f64) -> (f64, f64) {
    debug_assert!(mass > 0.0 && mass < 1.0);
    let sorted = math::sorted(draws);
    let n = sorted.len();
    let m = (math::ceil(mass * n as f64) as usize).clamp(1, n);
    let mut best = (sorted[0], sorted[m - 1]);
    let mut best_width = best.1 - best.0;
    for i in 1..=n - m {
        let width = sorted[i + m - 1] - sorted[i];
        if width < best_width {
            best_width = width;
            best = (sorted[i], sorted[i + m - 1]);
        }
    }
    best
}

/// Per-parameter posterior summary.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// (probability, empirical quantile) pairs at 2.5/25/50/75/97.5%.
    pub quantiles: Vec<(f64, f64)>,
    pub hpd_low: f64,
    pub hpd_high: f64,
    pub ess: f64,
    pub rhat: f64,
    pub mcse: f64,
}

/// Summaries for every parameter in the chain set (95% HPD interval;
/// R-hat is NaN for single-chain runs).
pub fn summarize(chains: &ChainSet) -> Result<Vec<PosteriorSummary>> {
    let mut out = Vec::with_capacity(chains.param_names.len());
    for name in chains.param_names.clone() {
        let pooled = chains.pooled(&name)?;
        let sorted = math::sorted(&pooled);
        let mean = math::mean(&pooled);
        let sd = math::sqrt(math::sample_variance(&pooled));
        let quantiles = [0.025, 0.25, 0.5, 0.75, 0.975]
            .iter()
            .map(|&p| (p, math::quantile_sorted(&sorted, p)))
            .collect();
        let (hpd_low, hpd_high) = hpd_interval(&pooled, 0.95);
        let ess_v = ess(chains, &name).unwrap_or(f64::NAN);
        let rhat_v = if chains.n_chains() >= 2 {
            rhat(chains, &name).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        let mcse_v = sd / math::sqrt(ess_v);
        out.push(PosteriorSummary {
            name,
            mean,
            sd,
            quantiles,
            hpd_low,
            hpd_high,
            ess: ess_v,
            rhat: rhat_v,
            mcse: mcse_v,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate;
    use crate::dist::Distribution;

    fn std_normal_target() -> LogTarget {
        LogTarget::new(vec!["x".to_string()], |x: &[f64]| -0.5 * x[0] * x[0])
            .with_gradient(|x: &[f64]| vec![-x[0]])
    }

    fn mh_cfg(step: f64, chains: usize, iter: usize, warmup: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            n_chains: chains,
            n_iter: iter,
            n_warmup: warmup,
            thin: 1,
            algorithm: Algorithm::Mh { step_scale: vec![step] },
            seed,
            init: None,
        }
    }

    #[test]
    fn mh_standard_normal_mean_within_mcse() {
        let target = std_normal_target();
        let cfg = mh_cfg(2.4, 4, 20_000, 5_000, 1);
        let chains = run_mh(&target, &cfg).unwrap();
        let pooled = chains.pooled("x").unwrap();
        let mean = math::mean(&pooled);
        let err = 3.0 * mcse(&chains, "x").unwrap();
        assert!(mean.abs() < err, "mean {mean} outside 3*MCSE {err}");
    }

    #[test]
    fn mh_flat_target_always_accepts() {
        let target = LogTarget::new(vec!["a".to_string(), "b".to_string()], |_: &[f64]| 0.0);
        let cfg = SamplerConfig {
            n_chains: 2,
            n_iter: 2_000,
            n_warmup: 100,
            thin: 1,
            algorithm: Algorithm::Mh { step_scale: vec![0.5] },
            seed: 5,
            init: None,
        };
        let chains = run_mh(&target, &cfg).unwrap();
        assert!(chains.acceptance_rate.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn identical_seed_identical_chainset() {
        let target = std_normal_target();
        let cfg = mh_cfg(1.0, 3, 500, 100, 42);
        let a = run_mh(&target, &cfg).unwrap();
        let b = run_mh(&target, &cfg).unwrap();
        assert_eq!(a, b);
        let hmc_cfg = SamplerConfig {
            algorithm: Algorithm::Hmc { step_size: 0.2, n_leapfrog: 10 },
            ..cfg
        };
        let a = run_hmc(&target, &hmc_cfg).unwrap();
        let b = run_hmc(&target, &hmc_cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chain_order_does_not_matter() {
        // Chains own split RNG streams: running chain 2 alone gives the
        // same draws as running it inside the full set.
        let target = std_normal_target();
        let cfg = mh_cfg(1.0, 3, 400, 100, 77);
        let full = run_mh(&target, &cfg).unwrap();
        let lone = run_single_chain(&target, &cfg, 2).unwrap();
        assert_eq!(full.chains[2], lone.draws);
    }

    #[test]
    fn mh_init_error_when_no_finite_start() {
        let target = LogTarget::new(vec!["x".to_string()], |_: &[f64]| f64::NEG_INFINITY);
        let cfg = mh_cfg(1.0, 1, 100, 10, 3);
        assert!(matches!(run_mh(&target, &cfg), Err(Error::Init(_))));
    }

    /// Full conditionals of the conditionally conjugate two-parameter
    /// Gauss model: mu | sigma2 is Gauss, sigma2 | mu is inverse-Gamma.
    fn conjugate_gibbs_target(data: &'static [f64], m0: f64, a0: f64, b0: f64) -> LogTarget {
        let stats = conjugate::sufficient_stats(data).unwrap();
        let n = stats.n as f64;
        let mu_n = m0 / (n + 1.0) + n * stats.mean_y / (n + 1.0);
        let eval = move |x: &[f64]| {
            let (mu, s2) = (x[0], x[1]);
            if s2 <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let a = stats.tss + n * (mu - stats.mean_y) * (mu - stats.mean_y);
            -0.5 * n * math::ln(s2) - a / (2.0 * s2) - 0.5 * math::ln(s2)
                - (mu - m0) * (mu - m0) / (2.0 * s2)
                - (a0 + 1.0) * math::ln(s2)
                - b0 / s2
        };
        let cond = move |coord: usize, x: &[f64], rng: &mut Rng| -> f64 {
            match coord {
                0 => {
                    let sd = math::sqrt(x[1] / (n + 1.0));
                    mu_n + sd * rng.standard_normal()
                }
                _ => {
                    let mu = x[0];
                    let shape = a0 + (n + 1.0) / 2.0;
                    let rate = b0
                        + 0.5 * (stats.tss + n * (mu - stats.mean_y) * (mu - stats.mean_y))
                        + 0.5 * (mu - m0) * (mu - m0);
                    Distribution::InverseGamma { alpha: shape, beta: rate }
                        .sample_one(rng)
                        .unwrap()
                }
            }
        };
        LogTarget::new(vec!["mu".to_string(), "sigma2".to_string()], eval)
            .with_full_conditionals(cond)
            .with_init_sampler(|rng: &mut Rng| vec![rng.standard_normal(), 1.0 + rng.uniform()])
    }

    static GIBBS_DATA: [f64; 12] =
        [1.2, 0.4, -0.8, 2.1, 1.7, 0.9, -0.2, 1.1, 0.3, 1.9, 0.8, 1.4];

    #[test]
    fn gibbs_recovers_conjugate_posterior_mean() {
        let (m0, a0, b0) = (0.0, 2.0, 1.5);
        let target = conjugate_gibbs_target(&GIBBS_DATA, m0, a0, b0);
        let cfg = SamplerConfig {
            n_chains: 4,
            n_iter: 6_000,
            n_warmup: 1_000,
            thin: 1,
            algorithm: Algorithm::Gibbs,
            seed: 9,
            init: None,
        };
        let chains = run_gibbs(&target, &cfg).unwrap();
        let stats = conjugate::sufficient_stats(&GIBBS_DATA).unwrap();
        let exact = conjugate::gauss_joint_conditional_conjugate(m0, a0, b0, &stats).unwrap();
        let mu_mean = math::mean(&chains.pooled("mu").unwrap());
        let err = 3.0 * mcse(&chains, "mu").unwrap();
        assert!(
            (mu_mean - exact.joint.mu_n).abs() < err,
            "mu {mu_mean} vs {} (3 MCSE {err})",
            exact.joint.mu_n
        );
        // Full sweeps always move: acceptance is 1 by construction.
        assert!(chains.acceptance_rate.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn gibbs_one_dimensional_is_iid_sampling() {
        // Single coordinate: the full conditional is the target itself,
        // so draws are exact iid samples.
        let cond = |_c: usize, _x: &[f64], rng: &mut Rng| -> f64 {
            Distribution::Gauss { mu: 3.0, sigma: 2.0 }.sample_one(rng).unwrap()
        };
        let target = LogTarget::new(vec!["x".to_string()], |x: &[f64]| {
            Distribution::Gauss { mu: 3.0, sigma: 2.0 }.log_density(x[0]).unwrap()
        })
        .with_full_conditionals(cond);
        let cfg = SamplerConfig {
            n_chains: 2,
            n_iter: 11_000,
            n_warmup: 1_000,
            thin: 1,
            algorithm: Algorithm::Gibbs,
            seed: 21,
            init: None,
        };
        let chains = run_gibbs(&target, &cfg).unwrap();
        let pooled = chains.pooled("x").unwrap();
        let n = pooled.len() as f64;
        assert!((math::mean(&pooled) - 3.0).abs() < 4.0 * 2.0 / n.sqrt());
        // iid draws: lag-1 autocorrelation within white-noise bounds.
        let ac = autocorr(&chains.per_chain("x").unwrap()[0], 5).unwrap();
        assert!(ac[1].abs() < 3.0 / (n / 2.0).sqrt());
        // Determinism.
        let again = run_gibbs(&target, &cfg).unwrap();
        assert_eq!(chains, again);
    }

    #[test]
    fn gibbs_requires_full_conditionals() {
        let target = std_normal_target();
        let cfg = SamplerConfig {
            n_chains: 1,
            n_iter: 100,
            n_warmup: 10,
            thin: 1,
            algorithm: Algorithm::Gibbs,
            seed: 2,
            init: None,
        };
        assert!(matches!(
            run_gibbs(&target, &cfg),
            Err(Error::MissingConditional(_))
        ));
    }

    #[test]
    fn hmc_standard_normal_converges() {
        let target = std_normal_target();
        let cfg = SamplerConfig {
            n_chains: 4,
            n_iter: 6_250,
            n_warmup: 1_250,
            thin: 1,
            algorithm: Algorithm::Hmc { step_size: 0.1, n_leapfrog: 20 },
            seed: 7,
            init: None,
        };
        let chains = run_hmc(&target, &cfg).unwrap();
        assert!(rhat(&chains, "x").unwrap() < 1.01);
        assert!(ess(&chains, "x").unwrap() > 1000.0);
        assert_eq!(chains.divergences.iter().sum::<usize>(), 0);
    }

    #[test]
    fn hmc_energy_conservation_at_tiny_step() {
        let target = std_normal_target();
        let cfg = SamplerConfig {
            n_chains: 1,
            n_iter: 600,
            n_warmup: 100,
            thin: 1,
            algorithm: Algorithm::Hmc { step_size: 1e-4, n_leapfrog: 5 },
            seed: 13,
            init: None,
        };
        let chains = run_hmc(&target, &cfg).unwrap();
        // Energy error below 1e-6 per transition, so everything accepts.
        assert!(chains.max_abs_delta_h[0] < 1e-6);
        assert_eq!(chains.acceptance_rate[0], 1.0);
    }

    #[test]
    fn hmc_config_validation() {
        let target = std_normal_target();
        let bad = SamplerConfig {
            n_chains: 1,
            n_iter: 100,
            n_warmup: 10,
            thin: 1,
            algorithm: Algorithm::Hmc { step_size: 0.1, n_leapfrog: 0 },
            seed: 1,
            init: None,
        };
        assert!(run_hmc(&target, &bad).is_err());
        let bad_warmup = SamplerConfig {
            n_iter: 10,
            n_warmup: 10,
            algorithm: Algorithm::Hmc { step_size: 0.1, n_leapfrog: 5 },
            ..bad
        };
        assert!(run_hmc(&target, &bad_warmup).is_err());
    }

    fn chainset_from(series: Vec<Vec<f64>>) -> ChainSet {
        ChainSet {
            param_names: vec!["x".to_string()],
            chains: series
                .into_iter()
                .map(|s| s.into_iter().map(|v| vec![v]).collect())
                .collect(),
            warmup_used: 0,
            thin: 1,
            seeds: vec![0],
            acceptance_rate: vec![1.0],
            divergences: vec![0],
            max_abs_delta_h: vec![0.0],
        }
    }

    #[test]
    fn rhat_iid_chains_near_one() {
        let d = Distribution::Gauss { mu: 0.0, sigma: 1.0 };
        let mut rng = Rng::new(33);
        let a = d.sample(&mut rng, 10_000).unwrap();
        let b = d.sample(&mut rng, 10_000).unwrap();
        let r = rhat(&chainset_from(vec![a, b]), "x").unwrap();
        assert!((r - 1.0).abs() < 0.01, "rhat {r}");
    }

    #[test]
    fn rhat_exactly_one_for_zero_between_variance() {
        // Period-2 sequence: all split halves share the same mean, so
        // the between-half variance is exactly zero.
        let seq: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = rhat(&chainset_from(vec![seq.clone(), seq]), "x").unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn rhat_detects_disjoint_chains() {
        let d = Distribution::Gauss { mu: 0.0, sigma: 1.0 };
        let mut rng = Rng::new(34);
        let a = d.sample(&mut rng, 1_000).unwrap();
        let b: Vec<f64> = d.sample(&mut rng, 1_000).unwrap().iter().map(|x| x + 10.0).collect();
        let r = rhat(&chainset_from(vec![a, b]), "x").unwrap();
        assert!(r > 1.1, "rhat {r}");
    }

    #[test]
    fn rhat_errors() {
        let seq: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(matches!(
            rhat(&chainset_from(vec![seq.clone()]), "x"),
            Err(Error::Dimension(_))
        ));
        let flat = vec![2.0; 100];
        assert!(matches!(
            rhat(&chainset_from(vec![flat.clone(), flat]), "x"),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn ess_iid_draws() {
        let d = Distribution::Gauss { mu: 0.0, sigma: 1.0 };
        let mut rng = Rng::new(35);
        let a = d.sample(&mut rng, 5_000).unwrap();
        let b = d.sample(&mut rng, 5_000).unwrap();
        let e = ess(&chainset_from(vec![a, b]), "x").unwrap();
        assert!((8000.0..=10_000.0).contains(&e), "ess {e}");
    }

    #[test]
    fn ess_alternating_sequence_capped_at_total() {
        let seq: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = ess(&chainset_from(vec![seq]), "x").unwrap();
        assert_eq!(e, 1000.0);
    }

    #[test]
    fn ess_ar1_matches_analytic_value() {
        // AR(1) with coefficient 0.9: ESS ~= N (1-phi)/(1+phi).
        let phi: f64 = 0.9;
        let n = 100_000;
        let mut rng = Rng::new(36);
        let mut x = 0.0;
        let noise = (1.0 - phi * phi).sqrt();
        let series: Vec<f64> = (0..n)
            .map(|_| {
                x = phi * x + noise * rng.standard_normal();
                x
            })
            .collect();
        let e = ess(&chainset_from(vec![series]), "x").unwrap();
        let expect = n as f64 * (1.0 - phi) / (1.0 + phi);
        assert!(
            (e - expect).abs() / expect < 0.15,
            "ess {e} vs analytic {expect}"
        );
    }

    #[test]
    fn autocorr_reference_behaviour() {
        let d = Distribution::Gauss { mu: 0.0, sigma: 1.0 };
        let mut rng = Rng::new(37);
        let iid = d.sample(&mut rng, 20_000).unwrap();
        let ac = autocorr(&iid, 10).unwrap();
        assert_eq!(ac[0], 1.0);
        let bound = 3.0 / (iid.len() as f64).sqrt();
        for &a in &ac[1..] {
            assert!(a.abs() < bound, "{a} vs {bound}");
        }

        // AR(1) phi = 0.5: lag-k autocorrelation ~= 0.5^k.
        let phi: f64 = 0.5;
        let mut x = 0.0;
        let noise = (1.0 - phi * phi).sqrt();
        let series: Vec<f64> = (0..50_000)
            .map(|_| {
                x = phi * x + noise * rng.standard_normal();
                x
            })
            .collect();
        let ac = autocorr(&series, 6).unwrap();
        let bound = 3.0 / (series.len() as f64).sqrt();
        for (k, &a) in ac.iter().enumerate().skip(1) {
            assert!((a - phi.powi(k as i32)).abs() < bound + 0.02, "lag {k}: {a}");
        }

        assert!(autocorr(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
        assert!(matches!(autocorr(&[5.0; 50], 3), Err(Error::Degenerate(_))));
    }

    #[test]
    fn hpd_interval_reference_behaviour() {
        let d = Distribution::Gauss { mu: 0.0, sigma: 1.0 };
        let draws = d.sample(&mut Rng::new(38), 1_000_000).unwrap();
        let (lo, hi) = hpd_interval(&draws, 0.95);
        assert!((lo + 1.959963984540054).abs() < 0.02, "lo {lo}");
        assert!((hi - 1.959963984540054).abs() < 0.02, "hi {hi}");

        let (lo, hi) = hpd_interval(&[4.2; 500], 0.95);
        assert_eq!((lo, hi), (4.2, 4.2));

        // Skewed target: HPD hugs zero and beats the central interval.
        let e = Distribution::Exponential { theta: 1.0 };
        let draws = e.sample(&mut Rng::new(39), 200_000).unwrap();
        let (lo, hi) = hpd_interval(&draws, 0.95);
        assert!(lo < 0.01, "exponential HPD left end {lo}");
        let sorted = math::sorted(&draws);
        let central =
            math::quantile_sorted(&sorted, 0.975) - math::quantile_sorted(&sorted, 0.025);
        assert!(hi - lo < central);
    }

    #[test]
    fn mh_three_state_stationary_frequencies() {
        // Discrete target embedded as a piecewise-constant density over
        // the bins [0,1), [1,2), [2,3); the stationary bin masses are
        // the normalised weights by detailed balance.
        let weights = [0.5, 0.3, 0.2];
        let target = LogTarget::new(vec!["x".to_string()], move |x: &[f64]| {
            let v = x[0];
            if !(0.0..3.0).contains(&v) {
                return f64::NEG_INFINITY;
            }
            math::ln(weights[v as usize])
        });
        let cfg = SamplerConfig {
            n_chains: 1,
            n_iter: 1_000_000,
            n_warmup: 10_000,
            thin: 1,
            algorithm: Algorithm::Mh { step_scale: vec![1.0] },
            seed: 40,
            init: Some(vec![vec![0.5]]),
        };
        let chains = run_mh(&target, &cfg).unwrap();
        let pooled = chains.pooled("x").unwrap();
        let mut freq = [0.0; 3];
        for v in &pooled {
            freq[*v as usize] += 1.0;
        }
        let n_eff = ess(&chains, "x").unwrap();
        for (f, w) in freq.iter().zip(&weights) {
            let p_hat = f / pooled.len() as f64;
            let sd = (w * (1.0 - w) / n_eff).sqrt();
            assert!((p_hat - w).abs() < 4.0 * sd, "{p_hat} vs {w} (sd {sd})");
        }
    }

    #[test]
    fn summarize_reports_all_parameters() {
        let target = std_normal_target();
        let cfg = mh_cfg(2.4, 4, 4_000, 1_000, 50);
        let chains = run_mh(&target, &cfg).unwrap();
        let summaries = summarize(&chains).unwrap();
        assert_eq!(summaries.len(), 1);
        let s = &summaries[0];
        assert_eq!(s.name, "x");
        assert!(s.mean.abs() < 0.1);
        assert!((s.sd - 1.0).abs() < 0.1);
        assert!(s.rhat < 1.05);
        assert!(s.quantiles.iter().any(|(p, _)| *p == 0.5));
        assert!(s.hpd_low < s.hpd_high);
    }

    #[test]
    fn csv_rendering_shape() {
        let target = std_normal_target();
        let cfg = mh_cfg(1.0, 2, 30, 10, 60);
        let chains = run_mh(&target, &cfg).unwrap();
        let csv = chains.render_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "chain,iteration,x");
        assert_eq!(lines.len(), 1 + 2 * 20);
        assert!(lines[1].starts_with("0,0,"));
    }

    #[test]
    fn thinning_keeps_every_kth_draw() {
        let target = std_normal_target();
        let cfg = SamplerConfig {
            thin: 5,
            ..mh_cfg(1.0, 1, 110, 10, 61)
        };
        let chains = run_mh(&target, &cfg).unwrap();
        assert_eq!(chains.draws_per_chain(), 20);
    }

    #[test]
    fn transforms_report_natural_scale() {
        let target = LogTarget::new(
            vec!["sigma".to_string()],
            |x: &[f64]| -0.5 * x[0] * x[0],
        )
        .with_transforms(vec![Transform::Exp]);
        let cfg = mh_cfg(1.0, 1, 200, 50, 62);
        let chains = run_mh(&target, &cfg).unwrap();
        assert!(chains.pooled("sigma").unwrap().iter().all(|&v| v > 0.0));
    }
}
