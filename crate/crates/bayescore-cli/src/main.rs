//! Batch front end to the inference engine: data ingestion, model
//! fitting, prediction, model comparison and decision evaluation as
//! subcommands over files.

mod dataset;
mod decision_file;
mod report;
mod spec_file;

use anyhow::{anyhow, bail, Context, Result};
use bayescore::dist::MomentValue;
use bayescore::evidence::{self, PointwiseLogLik};
use bayescore::glm::{self, Compiled, DesignMatrix};
use bayescore::predictive;
use bayescore::rng::Rng;
use bayescore::sampler::{self, ChainRun, ChainSet, SamplerConfig};
use bayescore::Error as CoreError;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use dataset::{fnv1a_hex, Dataset};
use report::*;
use spec_file::ModelFile;

#[derive(Parser)]
#[command(
    name = "bayescore",
    version,
    about = "Bayesian inference engine: fitting, prediction, comparison and decisions over files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV dataset and write draw/summary artifacts.
    Fit(FitArgs),
    /// Simulate the posterior predictive for new cases from a fit.
    Predict(PredictArgs),
    /// Compare fitted models by WAIC/DIC (same response data).
    Compare(CompareArgs),
    /// Rank the acts of a decision problem by expected utility.
    Decide(DecideArgs),
    /// Distribution lookup: log density, quantiles, moments, samples.
    Dist(DistArgs),
}

#[derive(Args)]
struct FitArgs {
    /// CSV data file (header row mandatory).
    #[arg(long)]
    data: PathBuf,
    /// Model specification JSON.
    #[arg(long)]
    model: PathBuf,
    /// Output directory for the fit artifacts.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    chains: Option<usize>,
    /// Total iterations per chain (warmup included).
    #[arg(long)]
    iter: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// RNG seed; drawn from system entropy (and recorded) when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Delete rows with missing values instead of rejecting the file.
    #[arg(long, default_value_t = false)]
    drop_na: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// CSV with the predictor columns of the new cases.
    #[arg(long)]
    newdata: PathBuf,
    /// Output directory for predictive draws and report.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = false)]
    drop_na: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more fit directories.
    #[arg(required = true)]
    fits: Vec<PathBuf>,
    /// Output path of the comparison JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecideArgs {
    /// Decision problem JSON.
    #[arg(long)]
    decision: PathBuf,
    /// Comma-separated log-likelihood per state: updates the state
    /// prior through the grid form of Bayes' theorem before ranking.
    #[arg(long, allow_hyphen_values = true)]
    update: Option<String>,
    /// Random-mixture sample count for the axiom checks.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistArgs {
    /// Family name (gauss, beta, gamma, poisson, ...).
    family: String,
    /// Comma-separated parameter list, e.g. "0,1".
    #[arg(long)]
    params: String,
    /// Evaluate the log density at this point.
    #[arg(long)]
    log_density: Option<f64>,
    /// Evaluate the quantile function at this probability.
    #[arg(long)]
    quantile: Option<f64>,
    /// Print mean and variance.
    #[arg(long, default_value_t = false)]
    moments: bool,
    /// Draw this many samples.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exit code 2: user error (parse/spec); 3: sampling failure.
fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Decide(args) => cmd_decide(args),
        Command::Dist(args) => cmd_dist(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let sampling_failure = e
                .downcast_ref::<CoreError>()
                .map(|ce| matches!(ce, CoreError::Init(_)))
                .unwrap_or(false);
            if sampling_failure {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn entropy_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    nanos ^ (std::process::id() as u64).rotate_left(32)
}

/// Runs the chains, in parallel up to the BAYESCORE_THREADS cap;
/// results are assembled in chain order so threading never changes the
/// output.
fn run_chains(target: &sampler::LogTarget, cfg: &SamplerConfig) -> Result<ChainSet> {
    cfg.validate().map_err(anyhow::Error::new)?;
    let cap = std::env::var("BAYESCORE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(cfg.n_chains);
    let mut runs: Vec<Option<Result<ChainRun, CoreError>>> = Vec::new();
    runs.resize_with(cfg.n_chains, || None);
    let mut next = 0usize;
    while next < cfg.n_chains {
        let batch_end = (next + cap).min(cfg.n_chains);
        let batch: Vec<usize> = (next..batch_end).collect();
        let mut results: Vec<(usize, Result<ChainRun, CoreError>)> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|&c| scope.spawn(move || (c, sampler::run_single_chain(target, cfg, c))))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("chain thread panicked"))
                    .collect()
            });
        for (c, r) in results.drain(..) {
            runs[c] = Some(r);
        }
        next = batch_end;
    }
    let runs: Vec<ChainRun> = runs
        .into_iter()
        .map(|r| r.expect("chain not run").map_err(anyhow::Error::new))
        .collect::<Result<_>>()?;
    Ok(sampler::collect_chains(target, cfg, runs))
}

fn design_from(columns: &[String], cols: Vec<Vec<f64>>, n: usize) -> Result<DesignMatrix> {
    if cols.is_empty() {
        glm::DesignMatrix::intercept_only(n).map_err(anyhow::Error::new)
    } else {
        glm::DesignMatrix::from_predictors(columns.to_vec(), cols).map_err(anyhow::Error::new)
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn summaries_of(chains: &ChainSet) -> Result<Vec<ParameterSummary>> {
    Ok(sampler::summarize(chains)
        .map_err(anyhow::Error::new)?
        .iter()
        .map(ParameterSummary::from)
        .collect())
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let data = Dataset::load(&args.data, args.drop_na)?;
    let model_file = ModelFile::load(&args.model)?;
    let (spec, y, x_cols, group_levels) = model_file.resolve(&data)?;
    let x = design_from(&model_file.predictors, x_cols, y.len())?;
    let compiled = glm::compile(&spec, &y, &x).map_err(anyhow::Error::new)?;

    let seed = args.seed.unwrap_or_else(entropy_seed);
    let mut cfg = model_file.sampler_config(
        compiled.target.has_full_conditionals(),
        compiled.target.has_gradient(),
        args.chains,
        args.iter,
        args.warmup,
        args.thin,
        seed,
    )?;
    // Fixed-step leapfrog trajectories can explode from extreme
    // prior-drawn starting points and leave a chain divergence-stuck,
    // so HMC runs start every chain at the neutral point instead:
    // zero coefficients and unit dispersions on the sampling scale.
    if matches!(cfg.algorithm, sampler::Algorithm::Hmc { .. }) {
        cfg.init = Some(vec![vec![0.0; compiled.layout.dim()]; cfg.n_chains]);
    }
    let chains = run_chains(&compiled.target, &cfg)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;

    // Draws and summaries.
    std::fs::write(args.out.join("draws.csv"), chains.render_csv())?;
    let data_hash = fnv1a_hex(&data.canonical_bytes());
    let response_hash = fnv1a_hex(format!("{y:?}").as_bytes());
    let algorithm = match &cfg.algorithm {
        sampler::Algorithm::Mh { .. } => "mh",
        sampler::Algorithm::Gibbs => "gibbs",
        sampler::Algorithm::Hmc { .. } => "hmc",
    };
    write_json(
        &args.out.join("summary.json"),
        &FitSummary {
            seed,
            algorithm: algorithm.to_string(),
            n_chains: cfg.n_chains,
            n_iter: cfg.n_iter,
            n_warmup: cfg.n_warmup,
            thin: cfg.thin,
            data_hash: data_hash.clone(),
            response_hash: response_hash.clone(),
            acceptance_rate: chains.acceptance_rate.clone(),
            divergences: chains.divergences.clone(),
            parameters: summaries_of(&chains)?,
        },
    )?;
    let raw_chains = compiled.destandardize_chains(&chains).map_err(anyhow::Error::new)?;
    write_json(
        &args.out.join("destandardized.json"),
        &DestandardizedSummary { parameters: summaries_of(&raw_chains)? },
    )?;

    // Information criteria for later comparison.
    let pw = PointwiseLogLik::from_glm(&compiled, &chains);
    let w = evidence::waic(&pw).map_err(anyhow::Error::new)?;
    let d = evidence::dic(&chains, &compiled.likelihood).map_err(anyhow::Error::new)?;
    write_json(
        &args.out.join("ic.json"),
        &InformationCriteria {
            waic: w.waic,
            p_waic: w.p_waic,
            lppd: w.lppd,
            waic_se: w.se,
            dic: d.dic,
            p_dic: d.p_dic,
            mean_deviance: d.mean_deviance,
            n_obs: compiled.n_obs,
            response_hash: response_hash.clone(),
        },
    )?;

    // Everything needed to rebuild the fit for prediction.
    std::fs::write(
        args.out.join("model.json"),
        serde_json::to_string_pretty(&model_file)? + "\n",
    )?;
    std::fs::write(args.out.join("data.csv"), data.canonical_bytes())?;
    write_json(
        &args.out.join("meta.json"),
        &FitMeta {
            seed,
            n_obs: y.len(),
            response: model_file.response.clone(),
            predictors: model_file.predictors.clone(),
            group: model_file.group.clone(),
            group_levels,
            data_hash,
            response_hash,
        },
    )?;
    println!("fit written to {}", args.out.display());
    Ok(())
}

/// Rebuilds the compiled model and chains from a fit directory.
fn load_fit(dir: &Path) -> Result<(Compiled, ChainSet, ModelFile, FitMeta)> {
    let meta: FitMeta = serde_json::from_str(
        &std::fs::read_to_string(dir.join("meta.json")).with_context(|| {
            format!("{} is not a fit directory (meta.json missing)", dir.display())
        })?,
    )?;
    let model_file = ModelFile::load(&dir.join("model.json"))?;
    let data = Dataset::load(&dir.join("data.csv"), false)?;
    let (spec, y, x_cols, _) = model_file.resolve(&data)?;
    let x = design_from(&model_file.predictors, x_cols, y.len())?;
    let compiled = glm::compile(&spec, &y, &x).map_err(anyhow::Error::new)?;
    let summary: FitSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json"))?)?;
    let chains = chainset_from_csv(
        &std::fs::read_to_string(dir.join("draws.csv"))?,
        summary.n_warmup,
        summary.thin,
    )?;
    Ok((compiled, chains, model_file, meta))
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let (compiled, chains, model_file, meta) = load_fit(&args.fit)?;
    let newdata = Dataset::load(&args.newdata, args.drop_na)?;
    let x_cols: Vec<Vec<f64>> = model_file
        .predictors
        .iter()
        .map(|p| newdata.numeric(p))
        .collect::<Result<_>>()?;
    let m = newdata.n_rows();
    let x_rows: Vec<Vec<f64>> = (0..m).map(|i| x_cols.iter().map(|c| c[i]).collect()).collect();

    let groups_new: Option<Vec<usize>> = match (&model_file.group, &meta.group_levels) {
        (Some(col), Some(levels)) => {
            let pos = newdata
                .columns
                .iter()
                .position(|c| c == col)
                .ok_or_else(|| anyhow!("new data misses group column '{col}'"))?;
            let idx = newdata
                .rows
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    levels
                        .iter()
                        .position(|l| l == &row[pos])
                        .ok_or_else(|| anyhow!("row {}: unknown group '{}'", r + 2, row[pos]))
                })
                .collect::<Result<Vec<usize>>>()?;
            Some(idx)
        }
        _ => None,
    };

    let seed = args.seed.unwrap_or(meta.seed ^ 0x9e37_79b9);
    let mut rng = Rng::new(seed).split(0xB0B);
    let total = chains.total_draws();
    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(total);
    for chain in &chains.chains {
        for draw in chain {
            let mut row = Vec::with_capacity(m);
            for (j, x_row) in x_rows.iter().enumerate() {
                let g = groups_new.as_ref().map(|gs| gs[j]);
                row.push(
                    compiled
                        .sample_new_case(draw, x_row, g, &mut rng)
                        .map_err(anyhow::Error::new)?,
                );
            }
            draws.push(row);
        }
    }
    let pred = predictive::PredictiveSample { draws, n_cases: m };

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("predictive.csv"), pred.render_csv())?;

    // Per-case report; PIT only when the new data carries observed
    // responses.
    let observed: Option<Vec<f64>> = newdata.numeric(&model_file.response).ok();
    let check = observed
        .as_ref()
        .map(|obs| predictive::predictive_check_report(&pred, obs))
        .transpose()
        .map_err(anyhow::Error::new)?;
    let mut cases = Vec::with_capacity(m);
    for j in 0..m {
        let col = pred.case(j);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let var =
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (col.len() as f64 - 1.0);
        let (hpd_low, hpd_high) = sampler::hpd_interval(&col, 0.95);
        let (pit, obs_v, bins) = match &check {
            Some(rep) => (
                Some(rep.cases[j].pit),
                Some(rep.cases[j].observed),
                rep.cases[j].bins.iter().map(|b| (b.lo, b.hi, b.count)).collect(),
            ),
            None => (None, None, Vec::new()),
        };
        cases.push(PredictiveCaseReport {
            case: j + 1,
            mean,
            sd: var.sqrt(),
            hpd_low,
            hpd_high,
            pit,
            observed: obs_v,
            bins,
        });
    }
    write_json(
        &args.out.join("report.json"),
        &PredictiveReport {
            n_draws: total,
            cases,
            observed_mean: check.map(|c| c.observed_mean),
        },
    )?;
    println!("predictive written to {}", args.out.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    if args.fits.len() < 2 {
        bail!("compare needs at least two fit directories");
    }
    let mut entries = Vec::new();
    let mut hash: Option<String> = None;
    for dir in &args.fits {
        let ic: InformationCriteria =
            serde_json::from_str(&std::fs::read_to_string(dir.join("ic.json")).with_context(
                || format!("{} is not a fit directory (ic.json missing)", dir.display()),
            )?)?;
        match &hash {
            None => hash = Some(ic.response_hash.clone()),
            Some(h) if *h != ic.response_hash => {
                bail!("fits were produced from different response data; comparison is meaningless")
            }
            _ => {}
        }
        entries.push((dir.display().to_string(), ic));
    }
    entries.sort_by(|a, b| a.1.waic.partial_cmp(&b.1.waic).unwrap_or(std::cmp::Ordering::Equal));
    let best = entries[0].1.waic;
    let weights_raw: Vec<f64> =
        entries.iter().map(|(_, ic)| (-(ic.waic - best) / 2.0).exp()).collect();
    let z: f64 = weights_raw.iter().sum();
    let models: Vec<ComparisonEntry> = entries
        .iter()
        .zip(&weights_raw)
        .map(|((name, ic), w)| ComparisonEntry {
            fit: name.clone(),
            waic: ic.waic,
            p_waic: ic.p_waic,
            lppd: ic.lppd,
            dic: ic.dic,
            p_dic: ic.p_dic,
            delta_waic: ic.waic - best,
            weight: w / z,
        })
        .collect();
    let report = ComparisonReport { models };
    let text = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_decide(args: DecideArgs) -> Result<()> {
    let mut matrix = decision_file::load(&args.decision)?;
    if let Some(update) = &args.update {
        let log_liks: Vec<f64> = update
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("bad log-likelihood '{v}'")))
            .collect::<Result<_>>()?;
        if log_liks.len() != matrix.states.len() {
            bail!(
                "--update needs one log-likelihood per state ({} states)",
                matrix.states.len()
            );
        }
        matrix.state_prior = bayescore::prob::bayes_grid(&matrix.state_prior, &log_liks)
            .map_err(anyhow::Error::new)?;
    }
    let best = bayescore::decision::best_act(&matrix);
    let mut rng = Rng::new(args.seed);
    let axioms = bayescore::decision::check_axioms(&matrix, args.samples, &mut rng);
    let describe = |c: &bayescore::decision::AxiomCheck| -> String {
        match c {
            bayescore::decision::AxiomCheck::Passed => "passed".to_string(),
            bayescore::decision::AxiomCheck::Failed { counterexample } => {
                format!("FAILED ({counterexample})")
            }
            bayescore::decision::AxiomCheck::NotChecked { reason } => {
                format!("not checked ({reason})")
            }
        }
    };
    println!("best act: {} (expected utility {})", best.act, best.eu);
    for (act, eu) in &best.full_ranking {
        println!("  {act}: {eu}");
    }
    let report = DecisionReport {
        best_act: best.act.clone(),
        ranking: best.full_ranking.clone(),
        axioms: vec![
            ("completeness".to_string(), describe(&axioms.completeness)),
            ("transitivity".to_string(), describe(&axioms.transitivity)),
            ("independence".to_string(), describe(&axioms.independence)),
            ("monotonicity".to_string(), describe(&axioms.monotonicity)),
            ("continuity".to_string(), describe(&axioms.continuity)),
        ],
    };
    for (name, status) in &report.axioms {
        println!("axiom {name}: {status}");
    }
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    Ok(())
}

fn cmd_dist(args: DistArgs) -> Result<()> {
    let params: Vec<f64> = args
        .params
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| anyhow!("bad parameter '{v}'")))
        .collect::<Result<_>>()?;
    let d = spec_file::distribution_from(&args.family, &params)?;
    if let Some(x) = args.log_density {
        let ld = d.log_density(x).map_err(anyhow::Error::new)?;
        println!("log_density({x}) = {ld}");
    }
    if let Some(p) = args.quantile {
        let q = d.quantile(p).map_err(anyhow::Error::new)?;
        println!("quantile({p}) = {q}");
    }
    if args.moments {
        let m = d.moments();
        let fmt = |v: &MomentValue| -> String {
            match v {
                MomentValue::Scalar(x) => format!("{x}"),
                MomentValue::Vector(xs) => format!("{xs:?}"),
                MomentValue::Matrix(mm) => format!("{mm:?}"),
                MomentValue::Undefined => "undefined".to_string(),
            }
        };
        println!("mean = {}", fmt(&m.mean));
        println!("variance = {}", fmt(&m.variance));
    }
    if let Some(count) = args.sample {
        let mut rng = Rng::new(args.seed);
        let draws = d.sample(&mut rng, count).map_err(anyhow::Error::new)?;
        for v in draws {
            println!("{v}");
        }
    }
    Ok(())
}
