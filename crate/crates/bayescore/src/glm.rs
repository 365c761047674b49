//! Declarative builder for generalised linear models and their
//! varying-intercept extensions.
//!
//! A [`ModelSpec`] plus data compiles into sampling-ready log targets:
//! the full posterior (in an unconstrained sampling space, dispersion
//! parameters on log scale with Jacobians included) and the bare
//! total-data likelihood (natural space, as consumed by the
//! information criteria). Analytic gradients are provided for the
//! Gauss, Bernoulli/binomial, Poisson and exponential likelihoods;
//! the homoscedastic Gauss models additionally expose full
//! conditionals so they can be Gibbs-sampled.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::math;
use crate::rng::Rng;
use crate::sampler::{ChainSet, LogTarget, Transform};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

/// Design matrix: n rows by k+1 columns, the first column all ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub col_names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl DesignMatrix {
    /// Builds from predictor columns; the leading ones-column is added
    /// here and named "(intercept)".
    pub fn from_predictors(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Dimension("predictor names/columns mismatch".to_string()));
        }
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("ragged predictor columns".to_string()));
        }
        if n == 0 {
            return Err(Error::EmptyData);
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite value in column '{name}'")));
            }
            if col.iter().all(|&v| v == col[0]) {
                return Err(Error::ZeroVariance(name.clone()));
            }
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(columns.len() + 1);
            row.push(1.0);
            for col in &columns {
                row.push(col[i]);
            }
            rows.push(row);
        }
        let mut col_names = vec!["(intercept)".to_string()];
        col_names.extend(names);
        Ok(DesignMatrix { col_names, rows })
    }

    /// Intercept-only design (for cell-means and null models).
    pub fn intercept_only(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyData);
        }
        Ok(DesignMatrix {
            col_names: vec!["(intercept)".to_string()],
            rows: vec![vec![1.0]; n],
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of predictors (columns minus the ones-column).
    pub fn n_predictors(&self) -> usize {
        self.col_names.len() - 1
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Predictor column j (0-based, excluding the ones-column).
    pub fn predictor(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j + 1]).collect()
    }
}

/// Inverse-link selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkFunction {
    Identity,
    Logistic,
    NaturalExp,
    NegativeInverse,
}

/// Evaluates the inverse link at the linear-form value `z`.
pub fn apply_inverse_link(link: LinkFunction, z: f64) -> Result<f64> {
    match link {
        LinkFunction::Identity => Ok(z),
        LinkFunction::Logistic => Ok(1.0 / (1.0 + math::exp(-z))),
        LinkFunction::NaturalExp => Ok(math::exp(z)),
        LinkFunction::NegativeInverse => {
            if z >= 0.0 {
                Err(Error::Domain(format!(
                    "negative inverse link requires z < 0, got {z}"
                )))
            } else {
                Ok(-1.0 / z)
            }
        }
    }
}

/// Prior choice for a single coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    Fixed(Distribution),
    /// Adaptive Gauss prior for the group-intercept block; `location`
    /// is the hyperprior of the centre, `scale` the hyperprior of the
    /// spread (inverse-Gamma on the variance, or Cauchy read as
    /// half-Cauchy on the standard deviation).
    Adaptive { location: Distribution, scale: Distribution },
    /// Gauss prior truncated above at `upper` (used by the
    /// negative-inverse-link exponential regression).
    TruncatedGauss { mu0: f64, sigma0: f64, upper: f64 },
}

/// Likelihood family; per-row auxiliary data rides along where the
/// family needs it.
#[derive(Debug, Clone, PartialEq)]
pub enum Likelihood {
    Gauss,
    /// t errors; `nu_rate` is the rate of the exponential prior on
    /// (nu - 2).
    StudentT { nu_rate: f64 },
    Bernoulli,
    /// Per-row trial counts; a count of 1 everywhere is a Bernoulli.
    Binomial { trials: Vec<u64> },
    /// Optional per-row exposures enter the linear form as -ln(tau).
    Poisson { exposure: Option<Vec<f64>> },
    Exponential,
    /// Group cell-means model. With `nu_rate` set the likelihood is a
    /// non-central t (the hierarchical variant), otherwise Gauss.
    AnovaCellMeans { heteroscedastic: bool, nu_rate: Option<f64> },
    NegativeBinomial,
}

/// Per-row group membership (0-based) with the number of groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub index: Vec<usize>,
    pub count: usize,
}

impl GroupSpec {
    pub fn new(index: Vec<usize>, count: usize) -> Result<Self> {
        if count == 0 || index.iter().any(|&g| g >= count) {
            return Err(Error::Spec("group indices must lie in [0, count)".to_string()));
        }
        Ok(GroupSpec { index, count })
    }
}

/// Declarative model description.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub likelihood: Likelihood,
    pub link: LinkFunction,
    pub intercept_prior: PriorSpec,
    /// One prior per predictor column; a single entry is broadcast.
    pub slope_priors: Vec<PriorSpec>,
    /// Dispersion prior: inverse-Gamma on sigma^2 or Cauchy (read as
    /// half-Cauchy) on sigma; for the negative binomial this is the
    /// prior of the size parameter.
    pub dispersion_prior: Option<Distribution>,
    pub groups: Option<GroupSpec>,
    /// Standardise metric data before fitting (ignored by the
    /// cell-means and exponential families, which fit on raw scales).
    pub standardize: bool,
    /// Gamma(shape, rate) hyperprior for the heteroscedastic ANOVA
    /// scale hyperparameters.
    pub anova_scale_hyper: (f64, f64),
}

impl ModelSpec {
    fn default_coef_prior() -> PriorSpec {
        PriorSpec::Fixed(Distribution::Gauss { mu: 0.0, sigma: 1.0 })
    }

    fn default_sigma_prior() -> Distribution {
        // Vague conjugate default in the BUGS tradition.
        Distribution::InverseGamma { alpha: 1e-3, beta: 1e-3 }
    }

    /// Homoscedastic linear regression with regularising priors.
    pub fn linear() -> Self {
        ModelSpec {
            likelihood: Likelihood::Gauss,
            link: LinkFunction::Identity,
            intercept_prior: Self::default_coef_prior(),
            slope_priors: vec![Self::default_coef_prior()],
            dispersion_prior: Some(Self::default_sigma_prior()),
            groups: None,
            standardize: true,
            anova_scale_hyper: (2.0, 1.0),
        }
    }

    /// Logistic regression (Bernoulli outcomes).
    pub fn logistic() -> Self {
        ModelSpec {
            likelihood: Likelihood::Bernoulli,
            link: LinkFunction::Logistic,
            intercept_prior: Self::default_coef_prior(),
            slope_priors: vec![Self::default_coef_prior()],
            dispersion_prior: None,
            groups: None,
            standardize: true,
            anova_scale_hyper: (2.0, 1.0),
        }
    }

    /// Poisson regression with the natural exponential inverse link.
    pub fn poisson() -> Self {
        ModelSpec {
            likelihood: Likelihood::Poisson { exposure: None },
            link: LinkFunction::NaturalExp,
            intercept_prior: Self::default_coef_prior(),
            slope_priors: vec![Self::default_coef_prior()],
            dispersion_prior: None,
            groups: None,
            standardize: true,
            anova_scale_hyper: (2.0, 1.0),
        }
    }

    /// Homoscedastic Gauss cell-means model over `groups`.
    pub fn anova(groups: GroupSpec) -> Self {
        ModelSpec {
            likelihood: Likelihood::AnovaCellMeans { heteroscedastic: false, nu_rate: None },
            link: LinkFunction::Identity,
            intercept_prior: PriorSpec::Fixed(Distribution::Gauss { mu: 0.0, sigma: 100.0 }),
            slope_priors: vec![],
            dispersion_prior: Some(Self::default_sigma_prior()),
            groups: Some(groups),
            standardize: false,
            anova_scale_hyper: (2.0, 1.0),
        }
    }

    /// Exponential regression with mode-truncated Gauss priors on the
    /// raw scale.
    pub fn exponential_regression(k: usize) -> Self {
        ModelSpec {
            likelihood: Likelihood::Exponential,
            link: LinkFunction::NegativeInverse,
            intercept_prior: PriorSpec::TruncatedGauss { mu0: -1.0, sigma0: 2.0, upper: -1.0 },
            slope_priors: vec![
                PriorSpec::TruncatedGauss { mu0: 0.0, sigma0: 2.0, upper: 0.0 };
                k.max(1)
            ],
            dispersion_prior: None,
            groups: None,
            standardize: false,
            anova_scale_hyper: (2.0, 1.0),
        }
    }
}

/// Column means and standard deviations recorded by standardisation;
/// `None` marks pass-through columns (indicators and the ones-column).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub y: Option<(f64, f64)>,
    pub x: Vec<Option<(f64, f64)>>,
}

impl Standardization {
    /// Identity transform for k predictors.
    pub fn identity(k: usize) -> Self {
        Standardization { y: None, x: vec![None; k] }
    }
}

fn is_indicator(col: &[f64]) -> bool {
    col.iter().all(|&v| v == 0.0 || v == 1.0)
}

/// Standardises the response and the metric design columns to zero
/// mean and unit standard deviation (n-1 convention); indicator
/// columns and the ones-column pass through untouched.
pub fn standardize(
    y: &[f64],
    x: &DesignMatrix,
) -> Result<(Vec<f64>, DesignMatrix, Standardization)> {
    let n = y.len();
    if n != x.n_rows() {
        return Err(Error::Dimension("y/X row mismatch".to_string()));
    }
    let y_mean = math::mean(y);
    let y_sd = math::sqrt(math::sample_variance(y));
    if y_sd == 0.0 {
        return Err(Error::ZeroVariance("response".to_string()));
    }
    let zy: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_sd).collect();

    let k = x.n_predictors();
    let mut meta_x: Vec<Option<(f64, f64)>> = Vec::with_capacity(k);
    let mut zrows = x.rows.clone();
    for j in 0..k {
        let col = x.predictor(j);
        if is_indicator(&col) {
            meta_x.push(None);
            continue;
        }
        let m = math::mean(&col);
        let sd = math::sqrt(math::sample_variance(&col));
        if sd == 0.0 {
            return Err(Error::ZeroVariance(x.col_names[j + 1].clone()));
        }
        for row in zrows.iter_mut() {
            row[j + 1] = (row[j + 1] - m) / sd;
        }
        meta_x.push(Some((m, sd)));
    }
    Ok((
        zy,
        DesignMatrix { col_names: x.col_names.clone(), rows: zrows },
        Standardization { y: Some((y_mean, y_sd)), x: meta_x },
    ))
}

/// Maps standardised-scale parameters back to the raw scale.
///
/// The layout is `[b0, b1..bk]` optionally followed by the residual
/// scale (only meaningful when the response was standardised); any
/// further entries pass through unchanged. With `meta.y` set the
/// slopes are rescaled by sd_y/sd_xj and the scale by sd_y (the linear
/// model); without it only the 1/sd_xj factor applies (logistic,
/// Poisson).
pub fn destandardize(meta: &Standardization, z_params: &[f64]) -> Result<Vec<f64>> {
    let k = meta.x.len();
    if z_params.len() < k + 1 {
        return Err(Error::MetaMismatch(format!(
            "{} parameters for {} predictors",
            z_params.len(),
            k
        )));
    }
    let (y_shift, y_scale) = meta.y.unwrap_or((0.0, 1.0));
    let mut out = Vec::with_capacity(z_params.len());
    let mut intercept = z_params[0] * y_scale + y_shift;
    out.push(0.0);
    for j in 0..k {
        let zb = z_params[1 + j];
        let (xm, xs) = meta.x[j].unwrap_or((0.0, 1.0));
        let b = zb * y_scale / xs;
        intercept -= b * xm;
        out.push(b);
    }
    out[0] = intercept;
    for (i, &v) in z_params.iter().enumerate().skip(k + 1) {
        // First extra slot is the residual scale when y was standardised.
        if i == k + 1 && meta.y.is_some() {
            out.push(v * y_scale);
        } else {
            out.push(v);
        }
    }
    Ok(out)
}

/// Converts a baseline-plus-deviations parameterisation to a total
/// mean and zero-sum deviations.
pub fn anova_recenter(mu0: f64, mu_g: &[f64]) -> (f64, Vec<f64>) {
    let proxies: Vec<f64> = mu_g.iter().map(|m| mu0 + m).collect();
    let a0 = math::mean(&proxies);
    let a: Vec<f64> = proxies.iter().map(|p| p - a0).collect();
    (a0, a)
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum CoefPrior {
    Gauss { m: f64, s: f64 },
    TruncGauss { m: f64, s: f64, upper: f64 },
}

impl CoefPrior {
    fn log_density(&self, b: f64) -> f64 {
        match *self {
            CoefPrior::Gauss { m, s } => {
                let z = (b - m) / s;
                -math::ln(s) - math::LN_SQRT_2PI - 0.5 * z * z
            }
            CoefPrior::TruncGauss { m, s, upper } => {
                if b > upper {
                    return f64::NEG_INFINITY;
                }
                let z = (b - m) / s;
                -math::ln(s) - math::LN_SQRT_2PI - 0.5 * z * z
                    - math::ln(math::std_normal_cdf((upper - m) / s))
            }
        }
    }

    fn grad(&self, b: f64) -> f64 {
        match *self {
            CoefPrior::Gauss { m, s } => -(b - m) / (s * s),
            CoefPrior::TruncGauss { m, s, .. } => -(b - m) / (s * s),
        }
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            CoefPrior::Gauss { m, s } => m + s * rng.standard_normal(),
            CoefPrior::TruncGauss { m, s, upper } => loop {
                let v = m + s * rng.standard_normal();
                if v <= upper {
                    break v;
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScalePrior {
    /// Inverse-Gamma on the squared scale.
    InvGammaVar { a: f64, d: f64 },
    /// Half-Cauchy on the scale itself.
    HalfCauchySd { s: f64 },
}

impl ScalePrior {
    fn from_distribution(d: &Distribution) -> Result<Self> {
        match d {
            Distribution::InverseGamma { alpha, beta } => {
                Ok(ScalePrior::InvGammaVar { a: *alpha, d: *beta })
            }
            Distribution::Cauchy { x0, gamma } if *x0 == 0.0 => {
                Ok(ScalePrior::HalfCauchySd { s: *gamma })
            }
            other => Err(Error::Spec(format!(
                "scale priors must be inverse-Gamma (variance) or zero-centred Cauchy (sd), got {other:?}"
            ))),
        }
    }

    /// Log prior density of u = ln(scale), Jacobian included.
    fn log_density(&self, u: f64) -> f64 {
        match *self {
            ScalePrior::InvGammaVar { a, d } => {
                a * math::ln(d) - math::ln_gamma(a) + math::ln(2.0) - 2.0 * a * u
                    - d * math::exp(-2.0 * u)
            }
            ScalePrior::HalfCauchySd { s } => {
                math::ln(2.0 / (math::PI * s)) - math::ln1p(math::exp(2.0 * u) / (s * s)) + u
            }
        }
    }

    fn grad(&self, u: f64) -> f64 {
        match *self {
            ScalePrior::InvGammaVar { a, d } => -2.0 * a + 2.0 * d * math::exp(-2.0 * u),
            ScalePrior::HalfCauchySd { s } => {
                let e2u = math::exp(2.0 * u);
                1.0 - 2.0 * e2u / (s * s + e2u)
            }
        }
    }

    fn sample_log_scale(&self, rng: &mut Rng) -> f64 {
        match *self {
            ScalePrior::InvGammaVar { a, d } => {
                let var = Distribution::InverseGamma { alpha: a, beta: d }
                    .sample_one(rng)
                    .unwrap_or(1.0);
                0.5 * math::ln(var)
            }
            ScalePrior::HalfCauchySd { s } => {
                let v = math::abs(
                    Distribution::Cauchy { x0: 0.0, gamma: s }.sample_one(rng).unwrap_or(1.0),
                );
                math::ln(v.max(1e-6))
            }
        }
    }
}

fn coef_prior(spec: &PriorSpec, role: &str) -> Result<CoefPrior> {
    match spec {
        PriorSpec::Fixed(Distribution::Gauss { mu, sigma }) => {
            Ok(CoefPrior::Gauss { m: *mu, s: *sigma })
        }
        PriorSpec::TruncatedGauss { mu0, sigma0, upper } => {
            if !upper.is_finite() || *sigma0 <= 0.0 {
                return Err(Error::Spec(format!("invalid truncated Gauss prior on {role}")));
            }
            Ok(CoefPrior::TruncGauss { m: *mu0, s: *sigma0, upper: *upper })
        }
        PriorSpec::Fixed(other) => Err(Error::Spec(format!(
            "{role} prior must be a Gauss distribution, got {other:?}"
        ))),
        PriorSpec::Adaptive { .. } => Err(Error::Spec(format!(
            "adaptive priors are only allowed on the group intercept block, not on {role}"
        ))),
    }
}

/// Data-independent likelihood family resolved at compile time.
#[derive(Debug, Clone, PartialEq)]
enum Family {
    Gauss,
    StudentT,
    Bernoulli,
    Binomial,
    Poisson,
    Exponential,
    NegBinomial,
}

struct Inner {
    family: Family,
    zy: Vec<f64>,
    zx: Vec<Vec<f64>>,
    k: usize,
    groups: Option<GroupSpec>,
    trials: Option<Vec<f64>>,
    /// Additive linear-form offset (-ln exposure for Poisson rates).
    offset: Option<Vec<f64>>,
    coef_priors: Vec<CoefPrior>,
    sigma_prior: Option<ScalePrior>,
    nu_rate: Option<f64>,
    nb_size_prior: Option<ScalePrior>,
    adaptive: Option<AdaptiveBlock>,
    hetero_anova: Option<HeteroAnova>,
    layout: Layout,
    /// Constant log-factorial terms of the count likelihoods.
    ll_const: f64,
}

struct AdaptiveBlock {
    /// Prior of the centre hyperparameter (zeta or the constant).
    location: CoefPrior,
    scale: ScalePrior,
    /// Group intercepts centred at zeta (linear/logistic) or at zero
    /// next to a separate constant (Poisson).
    zero_centered: bool,
}

struct HeteroAnova {
    mu0_prior: CoefPrior,
    tau_prior: ScalePrior,
    gamma0: f64,
    delta0: f64,
}

/// Index map of the sampling-space parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub names: Vec<String>,
    pub transforms: Vec<Transform>,
    /// Intercept-or-cell-means block: [start, end).
    pub coef_start: usize,
    pub coef_end: usize,
    /// Group-intercept block for hierarchical models.
    pub group_block: Option<(usize, usize)>,
    pub zeta: Option<usize>,
    pub beta_const: Option<usize>,
    pub omega: Option<usize>,
    pub sigma: Option<usize>,
    pub sigma_group: Option<(usize, usize)>,
    pub tau: Option<usize>,
    pub mu0: Option<usize>,
    pub anova_hyper: Option<(usize, usize)>,
    pub nu: Option<usize>,
    pub nb_size: Option<usize>,
    /// Indices of the slope coordinates (excluding intercepts).
    pub slopes: Vec<usize>,
}

impl Layout {
    pub fn dim(&self) -> usize {
        self.names.len()
    }
}

/// A compiled model: log targets, layout, and the standardisation
/// metadata needed to go back to raw scales.
pub struct Compiled {
    /// Full posterior in sampling space (dispersion on log scale).
    pub target: LogTarget,
    /// Total-data log likelihood as a function of natural-scale
    /// parameters (same names/order as the reported draws).
    pub likelihood: LogTarget,
    pub layout: Layout,
    pub standardization: Standardization,
    pub n_obs: usize,
    inner: Arc<Inner>,
}

impl Inner {
    fn cell_means(&self) -> bool {
        self.k == 0 && self.groups.is_some() && self.adaptive.is_none()
            && (self.layout.coef_end - self.layout.coef_start) > 1
    }

    fn linear_form(&self, coefs: &[f64], row: usize) -> f64 {
        let x = &self.zx[row];
        let mut z = match (&self.adaptive, &self.groups) {
            (Some(ad), Some(g)) => {
                let gi = g.index[row];
                if ad.zero_centered {
                    coefs[self.layout.beta_const.unwrap()]
                        + coefs[self.layout.group_block.unwrap().0 + gi]
                } else {
                    coefs[self.layout.group_block.unwrap().0 + gi]
                }
            }
            _ => coefs[self.layout.coef_start],
        };
        for j in 0..self.k {
            z += coefs[self.layout.slopes[j]] * x[j + 1];
        }
        if let Some(off) = &self.offset {
            z += off[row];
        }
        z
    }

    fn mean_for(&self, p: &[f64], i: usize) -> f64 {
        if self.hetero_anova.is_some() {
            let g = self.groups.as_ref().unwrap().index[i];
            return p[self.layout.mu0.unwrap()] + p[self.layout.coef_start + g];
        }
        if self.cell_means() {
            let g = self.groups.as_ref().unwrap().index[i];
            return p[self.layout.coef_start + g];
        }
        self.linear_form(p, i)
    }

    fn sigma_for(&self, p: &[f64], i: usize) -> f64 {
        if let Some((start, _)) = self.layout.sigma_group {
            let g = self.groups.as_ref().unwrap().index[i];
            p[start + g]
        } else {
            p[self.layout.sigma.unwrap()]
        }
    }

    /// Single-observation log likelihood at natural-scale parameters
    /// (data-only constants excluded; see `ll_const`).
    fn obs_loglik(&self, p: &[f64], i: usize) -> f64 {
        let y = self.zy[i];
        match self.family {
            Family::Gauss => {
                let sigma = self.sigma_for(p, i);
                let mu = self.mean_for(p, i);
                let z = (y - mu) / sigma;
                -math::ln(sigma) - math::LN_SQRT_2PI - 0.5 * z * z
            }
            Family::StudentT => {
                let sigma = self.sigma_for(p, i);
                let nu = p[self.layout.nu.unwrap()];
                let mu = self.mean_for(p, i);
                let z = (y - mu) / sigma;
                math::ln_gamma((nu + 1.0) / 2.0) - math::ln_gamma(nu / 2.0)
                    - 0.5 * math::ln(math::PI * nu)
                    - math::ln(sigma)
                    - 0.5 * (nu + 1.0) * math::ln1p(z * z / nu)
            }
            Family::Bernoulli | Family::Binomial => {
                let z = self.linear_form(p, i);
                let n = self.trials.as_ref().map_or(1.0, |t| t[i]);
                // y ln(theta) + (n-y) ln(1-theta), softplus-stable.
                let log_theta = -softplus(-z);
                let log_one_minus = -softplus(z);
                y * log_theta + (n - y) * log_one_minus
            }
            Family::Poisson => {
                let z = self.linear_form(p, i);
                y * z - math::exp(z)
            }
            Family::Exponential => {
                let z = self.linear_form(p, i);
                if z >= 0.0 {
                    return f64::NEG_INFINITY;
                }
                // theta = -1/z
                -math::ln(-z) + y / z
            }
            Family::NegBinomial => {
                let size = p[self.layout.nb_size.unwrap()];
                let z = self.linear_form(p, i);
                let mu = math::exp(z);
                let theta = size / (size + mu);
                math::ln_gamma(y + size) - math::ln_gamma(size) + size * math::ln(theta)
                    + y * math::ln1p(-theta)
            }
        }
    }

    fn total_loglik_natural(&self, p: &[f64]) -> f64 {
        let mut acc = self.ll_const;
        for i in 0..self.zy.len() {
            acc += self.obs_loglik(p, i);
            if acc == f64::NEG_INFINITY {
                return acc;
            }
        }
        acc
    }

    /// Natural-scale view of a sampling-space vector.
    fn to_natural(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .zip(&self.layout.transforms)
            .map(|(v, t)| t.apply(*v))
            .collect()
    }

    fn log_prior_sampling(&self, s: &[f64]) -> f64 {
        let mut acc = 0.0;
        match &self.adaptive {
            None if self.hetero_anova.is_none() => {
                for (pi, idx) in (self.layout.coef_start..self.layout.coef_end).enumerate() {
                    acc += self.coef_priors[pi.min(self.coef_priors.len() - 1)]
                        .log_density(s[idx]);
                }
                for (j, &idx) in self.layout.slopes.iter().enumerate() {
                    acc += self.coef_priors[(j + 1).min(self.coef_priors.len() - 1)]
                        .log_density(s[idx]);
                }
            }
            Some(ad) => {
                let (g0, g1) = self.layout.group_block.unwrap();
                let omega = math::exp(s[self.layout.omega.unwrap()]);
                let centre = if ad.zero_centered { 0.0 } else { s[self.layout.zeta.unwrap()] };
                for idx in g0..g1 {
                    let z = (s[idx] - centre) / omega;
                    acc += -math::ln(omega) - math::LN_SQRT_2PI - 0.5 * z * z;
                }
                let loc_idx = if ad.zero_centered {
                    self.layout.beta_const.unwrap()
                } else {
                    self.layout.zeta.unwrap()
                };
                acc += ad.location.log_density(s[loc_idx]);
                acc += ad.scale.log_density(s[self.layout.omega.unwrap()]);
                for (j, &idx) in self.layout.slopes.iter().enumerate() {
                    acc += self.coef_priors[(j + 1).min(self.coef_priors.len() - 1)]
                        .log_density(s[idx]);
                }
            }
            None => {}
        }
        if let Some(ha) = &self.hetero_anova {
            acc += ha.mu0_prior.log_density(s[self.layout.mu0.unwrap()]);
            let tau = math::exp(s[self.layout.tau.unwrap()]);
            for idx in self.layout.coef_start..self.layout.coef_end {
                let z = s[idx] / tau;
                acc += -math::ln(tau) - math::LN_SQRT_2PI - 0.5 * z * z;
            }
            acc += ha.tau_prior.log_density(s[self.layout.tau.unwrap()]);
            if let Some((ai, bi)) = self.layout.anova_hyper {
                let (alpha, beta) = (math::exp(s[ai]), math::exp(s[bi]));
                // Gamma hyperpriors on alpha and beta, log-scale
                // Jacobians folded in.
                acc += ha.gamma0 * s[ai] - ha.delta0 * alpha;
                acc += ha.gamma0 * s[bi] - ha.delta0 * beta;
                // Group variances sigma_g^2 ~ IG(alpha, beta).
                let (s0, s1) = self.layout.sigma_group.unwrap();
                for idx in s0..s1 {
                    let u = s[idx];
                    acc += alpha * math::ln(beta) - math::ln_gamma(alpha) + math::ln(2.0)
                        - 2.0 * alpha * u
                        - beta * math::exp(-2.0 * u);
                }
            } else if let (Some(sp), Some(si)) = (self.sigma_prior, self.layout.sigma) {
                acc += sp.log_density(s[si]);
            }
        } else if let (Some(sp), Some(si)) = (self.sigma_prior, self.layout.sigma) {
            acc += sp.log_density(s[si]);
        }
        if let (Some(rate), Some(ni)) = (self.nu_rate, self.layout.nu) {
            // (nu - 2) ~ Exp(rate), sampled as w = ln(nu - 2).
            let w = s[ni];
            acc += math::ln(rate) - rate * math::exp(w) + w;
        }
        if let (Some(np), Some(ni)) = (self.nb_size_prior, self.layout.nb_size) {
            acc += np.log_density(s[ni]);
        }
        acc
    }

    fn posterior_sampling(&self, s: &[f64]) -> f64 {
        let prior = self.log_prior_sampling(s);
        if prior == f64::NEG_INFINITY {
            return prior;
        }
        let natural = self.to_natural(s);
        prior + self.total_loglik_natural(&natural)
    }

    /// Analytic gradient in sampling space; only used for the
    /// differentiable families.
    fn posterior_grad(&self, s: &[f64]) -> Vec<f64> {
        let d = self.layout.dim();
        let mut g = vec![0.0; d];
        let natural = self.to_natural(s);

        for i in 0..self.zy.len() {
            let y = self.zy[i];
            let x = &self.zx[i];
            let dll_dz;
            match self.family {
                Family::Gauss => {
                    let sigma = natural[self.layout.sigma.unwrap()];
                    let mu = self.mean_for(&natural, i);
                    dll_dz = (y - mu) / (sigma * sigma);
                    let si = self.layout.sigma.unwrap();
                    let z2 = (y - mu) * (y - mu) / (sigma * sigma);
                    g[si] += -1.0 + z2;
                }
                Family::Bernoulli | Family::Binomial => {
                    let z = self.linear_form(&natural, i);
                    let n = self.trials.as_ref().map_or(1.0, |t| t[i]);
                    let theta = 1.0 / (1.0 + math::exp(-z));
                    dll_dz = y - n * theta;
                }
                Family::Poisson => {
                    let z = self.linear_form(&natural, i);
                    dll_dz = y - math::exp(z);
                }
                Family::Exponential => {
                    let z = self.linear_form(&natural, i);
                    if z >= 0.0 {
                        dll_dz = 0.0;
                    } else {
                        dll_dz = -1.0 / z - y / (z * z);
                    }
                }
                Family::StudentT | Family::NegBinomial => {
                    dll_dz = 0.0;
                }
            }
            match (&self.adaptive, &self.groups) {
                (Some(ad), Some(gr)) => {
                    let gi = gr.index[i];
                    g[self.layout.group_block.unwrap().0 + gi] += dll_dz;
                    if ad.zero_centered {
                        g[self.layout.beta_const.unwrap()] += dll_dz;
                    }
                }
                (None, Some(gr)) if self.cell_means() => {
                    g[self.layout.coef_start + gr.index[i]] += dll_dz;
                }
                _ => {
                    g[self.layout.coef_start] += dll_dz;
                }
            }
            for j in 0..self.k {
                g[self.layout.slopes[j]] += dll_dz * x[j + 1];
            }
        }

        match &self.adaptive {
            None => {
                for (pi, idx) in (self.layout.coef_start..self.layout.coef_end).enumerate() {
                    g[idx] += self.coef_priors[pi.min(self.coef_priors.len() - 1)].grad(s[idx]);
                }
                for (j, &idx) in self.layout.slopes.iter().enumerate() {
                    g[idx] += self.coef_priors[(j + 1).min(self.coef_priors.len() - 1)].grad(s[idx]);
                }
            }
            Some(ad) => {
                let (g0, g1) = self.layout.group_block.unwrap();
                let oi = self.layout.omega.unwrap();
                let omega = math::exp(s[oi]);
                let centre_idx = if ad.zero_centered {
                    self.layout.beta_const.unwrap()
                } else {
                    self.layout.zeta.unwrap()
                };
                let centre = if ad.zero_centered { 0.0 } else { s[centre_idx] };
                for idx in g0..g1 {
                    let dev = s[idx] - centre;
                    g[idx] += -dev / (omega * omega);
                    if !ad.zero_centered {
                        g[centre_idx] += dev / (omega * omega);
                    }
                    g[oi] += -1.0 + dev * dev / (omega * omega);
                }
                g[centre_idx] += ad.location.grad(s[centre_idx]);
                g[oi] += ad.scale.grad(s[oi]);
                for (j, &idx) in self.layout.slopes.iter().enumerate() {
                    g[idx] += self.coef_priors[(j + 1).min(self.coef_priors.len() - 1)].grad(s[idx]);
                }
            }
        }
        if let (Some(sp), Some(si)) = (self.sigma_prior, self.layout.sigma) {
            g[si] += sp.grad(s[si]);
        }
        g
    }

    fn init_sample(&self, rng: &mut Rng) -> Vec<f64> {
        let d = self.layout.dim();
        let mut s = vec![0.0; d];
        match &self.adaptive {
            None => {
                for (pi, idx) in (self.layout.coef_start..self.layout.coef_end).enumerate() {
                    s[idx] = self.coef_priors[pi.min(self.coef_priors.len() - 1)].sample(rng);
                }
                for (j, &idx) in self.layout.slopes.iter().enumerate() {
                    s[idx] = self.coef_priors[(j + 1).min(self.coef_priors.len() - 1)].sample(rng);
                }
            }
            Some(ad) => {
                let loc_idx = if ad.zero_centered {
                    self.layout.beta_const.unwrap()
                } else {
                    self.layout.zeta.unwrap()
                };
                s[loc_idx] = ad.location.sample(rng);
                let oi = self.layout.omega.unwrap();
                s[oi] = ad.scale.sample_log_scale(rng).clamp(-2.0, 2.0);
                let omega = math::exp(s[oi]);
                let centre = if ad.zero_centered { 0.0 } else { s[loc_idx] };
                let (g0, g1) = self.layout.group_block.unwrap();
                for idx in g0..g1 {
                    s[idx] = centre + omega * rng.standard_normal();
                }
                for (j, &idx) in self.layout.slopes.iter().enumerate() {
                    s[idx] = self.coef_priors[(j + 1).min(self.coef_priors.len() - 1)].sample(rng);
                }
            }
        }
        if let Some(ha) = &self.hetero_anova {
            s[self.layout.mu0.unwrap()] = ha.mu0_prior.sample(rng);
            s[self.layout.tau.unwrap()] = ha.tau_prior.sample_log_scale(rng).clamp(-2.0, 2.0);
            if let Some((ai, bi)) = self.layout.anova_hyper {
                s[ai] = 0.5 * rng.standard_normal();
                s[bi] = 0.5 * rng.standard_normal();
            }
            if let Some((s0, s1)) = self.layout.sigma_group {
                for idx in s0..s1 {
                    s[idx] = 0.5 * rng.standard_normal();
                }
            }
            if let Some(si) = self.layout.sigma {
                s[si] = 0.5 * rng.standard_normal();
            }
        } else if let (Some(sp), Some(si)) = (self.sigma_prior, self.layout.sigma) {
            s[si] = sp.sample_log_scale(rng).clamp(-2.0, 2.0);
        }
        if let Some(ni) = self.layout.nu {
            s[ni] = rng.standard_normal() * 0.5 + 1.0;
        }
        if let (Some(np), Some(ni)) = (self.nb_size_prior, self.layout.nb_size) {
            s[ni] = np.sample_log_scale(rng).clamp(-2.0, 2.0);
        }
        s
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        math::ln1p(math::exp(x))
    }
}

/// Compiles a model specification and data into log targets.
pub fn compile(spec: &ModelSpec, y: &[f64], x: &DesignMatrix) -> Result<Compiled> {
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    if y.len() != x.n_rows() {
        return Err(Error::Dimension(format!(
            "response has {} rows, design matrix has {}",
            y.len(),
            x.n_rows()
        )));
    }
    check_pairing(&spec.likelihood, spec.link)?;
    if let Some(g) = &spec.groups {
        if g.index.len() != y.len() {
            return Err(Error::Dimension("group index length mismatch".to_string()));
        }
        GroupSpec::new(g.index.clone(), g.count)?;
    }

    let is_anova = matches!(spec.likelihood, Likelihood::AnovaCellMeans { .. });
    let is_expreg = matches!(spec.likelihood, Likelihood::Exponential);
    let is_metric_response =
        matches!(spec.likelihood, Likelihood::Gauss | Likelihood::StudentT { .. });
    let hierarchical = matches!(spec.intercept_prior, PriorSpec::Adaptive { .. }) && !is_anova;
    let hier_anova = is_anova
        && matches!(
            spec.likelihood,
            Likelihood::AnovaCellMeans { heteroscedastic: true, .. }
                | Likelihood::AnovaCellMeans { nu_rate: Some(_), .. }
        );

    if is_anova {
        if spec.groups.is_none() {
            return Err(Error::Spec("cell-means model requires groups".to_string()));
        }
        if x.n_predictors() > 0 {
            return Err(Error::Spec(
                "cell-means model takes no metric predictors".to_string(),
            ));
        }
    }
    if hierarchical && spec.groups.is_none() {
        return Err(Error::Spec("adaptive intercept prior requires groups".to_string()));
    }

    // Standardisation policy per family.
    let do_std = spec.standardize && !is_anova && !is_expreg;
    let (zy, zx, meta) = if do_std {
        if is_metric_response {
            standardize(y, x)?
        } else {
            let dummy_y: Vec<f64> = (0..y.len()).map(|i| i as f64).collect();
            let (_, zx, meta) = standardize(&dummy_y, x)?;
            (y.to_vec(), zx, Standardization { y: None, x: meta.x })
        }
    } else {
        (y.to_vec(), x.clone(), Standardization::identity(x.n_predictors()))
    };

    // Likelihood-specific payload validation.
    let trials: Option<Vec<f64>> = match &spec.likelihood {
        Likelihood::Binomial { trials } => {
            if trials.len() != y.len() {
                return Err(Error::Dimension("trials length mismatch".to_string()));
            }
            for (yi, n) in y.iter().zip(trials) {
                if *yi < 0.0 || math::floor(*yi) != *yi || *yi > *n as f64 {
                    return Err(Error::Domain(format!("count {yi} invalid for {n} trials")));
                }
            }
            Some(trials.iter().map(|&t| t as f64).collect())
        }
        Likelihood::Bernoulli => {
            if y.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::Domain("Bernoulli response must be 0/1".to_string()));
            }
            None
        }
        Likelihood::Poisson { .. } | Likelihood::NegativeBinomial => {
            if y.iter().any(|&v| v < 0.0 || math::floor(v) != v) {
                return Err(Error::Domain(
                    "count response must be non-negative integers".to_string(),
                ));
            }
            None
        }
        Likelihood::Exponential => {
            if y.iter().any(|&v| v < 0.0) {
                return Err(Error::Domain("exponential response must be non-negative".to_string()));
            }
            None
        }
        _ => None,
    };

    let offset: Option<Vec<f64>> = match &spec.likelihood {
        Likelihood::Poisson { exposure: Some(tau) } => {
            if tau.len() != y.len() {
                return Err(Error::Dimension("exposure length mismatch".to_string()));
            }
            if tau.iter().any(|&t| t <= 0.0) {
                return Err(Error::Domain("exposures must be positive".to_string()));
            }
            Some(tau.iter().map(|&t| -math::ln(t)).collect())
        }
        _ => None,
    };

    let family = match &spec.likelihood {
        Likelihood::Gauss => Family::Gauss,
        Likelihood::StudentT { .. } => Family::StudentT,
        Likelihood::AnovaCellMeans { nu_rate, .. } => {
            if nu_rate.is_some() {
                Family::StudentT
            } else {
                Family::Gauss
            }
        }
        Likelihood::Bernoulli => Family::Bernoulli,
        Likelihood::Binomial { .. } => Family::Binomial,
        Likelihood::Poisson { .. } => Family::Poisson,
        Likelihood::Exponential => Family::Exponential,
        Likelihood::NegativeBinomial => Family::NegBinomial,
    };

    // Data-only constants kept out of the hot likelihood loop.
    let ll_const = match family {
        Family::Poisson => zy.iter().map(|&v| -math::ln_gamma(v + 1.0)).sum(),
        Family::Binomial => {
            let t = trials.as_ref().unwrap();
            zy.iter()
                .zip(t)
                .map(|(&v, &n)| math::ln_choose(n as u64, v as u64))
                .sum()
        }
        Family::NegBinomial => zy.iter().map(|&v| -math::ln_gamma(v + 1.0)).sum(),
        _ => 0.0,
    };

    let k = zx.n_predictors();
    let slope_priors = broadcast_priors(&spec.slope_priors, k)?;

    let mut names: Vec<String> = Vec::new();
    let mut transforms: Vec<Transform> = Vec::new();
    let mut layout = Layout {
        names: vec![],
        transforms: vec![],
        coef_start: 0,
        coef_end: 0,
        group_block: None,
        zeta: None,
        beta_const: None,
        omega: None,
        sigma: None,
        sigma_group: None,
        tau: None,
        mu0: None,
        anova_hyper: None,
        nu: None,
        nb_size: None,
        slopes: vec![],
    };
    let mut coef_priors: Vec<CoefPrior> = Vec::new();
    let mut adaptive: Option<AdaptiveBlock> = None;
    let mut hetero_anova: Option<HeteroAnova> = None;
    let mut sigma_prior: Option<ScalePrior> = None;
    let mut nu_rate: Option<f64> = None;
    let mut nb_size_prior: Option<ScalePrior> = None;

    let hetero = matches!(
        spec.likelihood,
        Likelihood::AnovaCellMeans { heteroscedastic: true, .. }
    );

    if hier_anova {
        // Hierarchical cell means: mu0 + zero-centred group deviations.
        let g = spec.groups.as_ref().unwrap().count;
        let (tau_prior, mu0_prior) = match &spec.intercept_prior {
            PriorSpec::Adaptive { location, scale } => (
                ScalePrior::from_distribution(scale)?,
                coef_prior(&PriorSpec::Fixed(location.clone()), "mu0")?,
            ),
            _ => {
                // Data-driven default: centre at the sample mean with
                // the sample sd as spread.
                let ym = math::mean(&zy);
                let ys = math::sqrt(math::sample_variance(&zy)).max(1e-6);
                (
                    ScalePrior::InvGammaVar { a: 1.0, d: 1.0 },
                    CoefPrior::Gauss { m: ym, s: ys },
                )
            }
        };
        layout.mu0 = Some(push(&mut names, &mut transforms, "mu0", Transform::Identity));
        layout.coef_start = names.len();
        for gi in 1..=g {
            push(&mut names, &mut transforms, &format!("mu_{gi}"), Transform::Identity);
        }
        layout.coef_end = names.len();
        layout.tau = Some(push(&mut names, &mut transforms, "tau", Transform::Exp));
        if hetero {
            let s0 = names.len();
            for gi in 1..=g {
                push(&mut names, &mut transforms, &format!("sigma_{gi}"), Transform::Exp);
            }
            layout.sigma_group = Some((s0, names.len()));
            let ai = push(&mut names, &mut transforms, "alpha", Transform::Exp);
            let bi = push(&mut names, &mut transforms, "beta", Transform::Exp);
            layout.anova_hyper = Some((ai, bi));
        } else {
            layout.sigma = Some(push(&mut names, &mut transforms, "sigma", Transform::Exp));
            sigma_prior = Some(match &spec.dispersion_prior {
                Some(d) => ScalePrior::from_distribution(d)?,
                None => ScalePrior::InvGammaVar { a: 1.0, d: 1.0 },
            });
        }
        if let Likelihood::AnovaCellMeans { nu_rate: Some(r), .. } = spec.likelihood {
            layout.nu = Some(push(&mut names, &mut transforms, "nu", Transform::ExpPlusTwo));
            nu_rate = Some(r);
        }
        hetero_anova = Some(HeteroAnova {
            mu0_prior,
            tau_prior,
            gamma0: spec.anova_scale_hyper.0,
            delta0: spec.anova_scale_hyper.1,
        });
    } else if is_anova {
        // Fixed homoscedastic cell means.
        let g = spec.groups.as_ref().unwrap().count;
        let p = coef_prior(&spec.intercept_prior, "cell mean")?;
        layout.coef_start = 0;
        for gi in 1..=g {
            push(&mut names, &mut transforms, &format!("mu_{gi}"), Transform::Identity);
            coef_priors.push(p);
        }
        layout.coef_end = names.len();
        layout.sigma = Some(push(&mut names, &mut transforms, "sigma", Transform::Exp));
        sigma_prior = Some(match &spec.dispersion_prior {
            Some(d) => ScalePrior::from_distribution(d)?,
            None => ScalePrior::InvGammaVar { a: 1.0, d: 1.0 },
        });
    } else if hierarchical {
        let g = spec.groups.as_ref().unwrap().count;
        let (location_d, scale_d) = match &spec.intercept_prior {
            PriorSpec::Adaptive { location, scale } => (location.clone(), scale.clone()),
            _ => unreachable!(),
        };
        let zero_centered = matches!(family, Family::Poisson | Family::NegBinomial);
        let location = coef_prior(&PriorSpec::Fixed(location_d), "adaptive location")?;
        let scale = ScalePrior::from_distribution(&scale_d)?;
        if zero_centered {
            layout.beta_const =
                Some(push(&mut names, &mut transforms, "b_const", Transform::Identity));
        }
        let g0 = names.len();
        for gi in 1..=g {
            push(&mut names, &mut transforms, &format!("b0_{gi}"), Transform::Identity);
        }
        layout.group_block = Some((g0, names.len()));
        layout.coef_start = g0;
        layout.coef_end = names.len();
        for j in 0..k {
            let idx = push(
                &mut names,
                &mut transforms,
                &format!("b_{}", zx.col_names[j + 1]),
                Transform::Identity,
            );
            layout.slopes.push(idx);
        }
        if !zero_centered {
            layout.zeta = Some(push(&mut names, &mut transforms, "zeta", Transform::Identity));
        }
        layout.omega = Some(push(&mut names, &mut transforms, "omega", Transform::Exp));
        adaptive = Some(AdaptiveBlock { location, scale, zero_centered });
        coef_priors.push(CoefPrior::Gauss { m: 0.0, s: 1.0 }); // unused intercept slot
        coef_priors.extend(slope_priors.iter().copied());
        if matches!(family, Family::Gauss | Family::StudentT) {
            layout.sigma = Some(push(&mut names, &mut transforms, "sigma", Transform::Exp));
            sigma_prior = Some(match &spec.dispersion_prior {
                Some(d) => ScalePrior::from_distribution(d)?,
                None => ScalePrior::InvGammaVar { a: 1.0, d: 1.0 },
            });
        }
        if let Likelihood::StudentT { nu_rate: r } = spec.likelihood {
            layout.nu = Some(push(&mut names, &mut transforms, "nu", Transform::ExpPlusTwo));
            nu_rate = Some(r);
        }
    } else {
        // Fixed-prior regression.
        let p0 = coef_prior(&spec.intercept_prior, "intercept")?;
        layout.coef_start = push(&mut names, &mut transforms, "b0", Transform::Identity);
        layout.coef_end = names.len();
        coef_priors.push(p0);
        for j in 0..k {
            let idx = push(
                &mut names,
                &mut transforms,
                &format!("b_{}", zx.col_names[j + 1]),
                Transform::Identity,
            );
            layout.slopes.push(idx);
            coef_priors.push(slope_priors[j]);
        }
        if matches!(family, Family::Gauss | Family::StudentT) {
            layout.sigma = Some(push(&mut names, &mut transforms, "sigma", Transform::Exp));
            sigma_prior = Some(match &spec.dispersion_prior {
                Some(d) => ScalePrior::from_distribution(d)?,
                None => ScalePrior::InvGammaVar { a: 1.0, d: 1.0 },
            });
        }
        if let Likelihood::StudentT { nu_rate: r } = spec.likelihood {
            layout.nu = Some(push(&mut names, &mut transforms, "nu", Transform::ExpPlusTwo));
            nu_rate = Some(r);
        }
        if matches!(family, Family::NegBinomial) {
            layout.nb_size = Some(push(&mut names, &mut transforms, "size", Transform::Exp));
            nb_size_prior = Some(match &spec.dispersion_prior {
                Some(d) => ScalePrior::from_distribution(d)?,
                None => ScalePrior::HalfCauchySd { s: 2.0 },
            });
        }
    }

    layout.names = names;
    layout.transforms = transforms;

    let inner = Arc::new(Inner {
        family: family.clone(),
        zy,
        zx: zx.rows.clone(),
        k,
        groups: spec.groups.clone(),
        trials,
        offset,
        coef_priors,
        sigma_prior,
        nu_rate,
        nb_size_prior,
        adaptive,
        hetero_anova,
        layout: layout.clone(),
        ll_const,
    });

    let has_gradient = matches!(
        family,
        Family::Gauss
            | Family::Bernoulli
            | Family::Binomial
            | Family::Poisson
            | Family::Exponential
    ) && inner.hetero_anova.is_none()
        && inner.nu_rate.is_none();

    let eval_inner = Arc::clone(&inner);
    let mut target = LogTarget::new(layout.names.clone(), move |s: &[f64]| {
        eval_inner.posterior_sampling(s)
    })
    .with_transforms(layout.transforms.clone());

    if has_gradient {
        let grad_inner = Arc::clone(&inner);
        target = target.with_gradient(move |s: &[f64]| grad_inner.posterior_grad(s));
    }

    let init_inner = Arc::clone(&inner);
    target = target.with_init_sampler(move |rng: &mut Rng| init_inner.init_sample(rng));

    // Gibbs conditionals: homoscedastic Gauss likelihood, Gauss
    // coefficient priors, inverse-Gamma variance prior.
    let gibbs_ok = matches!(family, Family::Gauss)
        && inner.adaptive.is_none()
        && inner.hetero_anova.is_none()
        && matches!(inner.sigma_prior, Some(ScalePrior::InvGammaVar { .. }))
        && inner.coef_priors.iter().all(|p| matches!(p, CoefPrior::Gauss { .. }));
    if gibbs_ok {
        let gi = Arc::clone(&inner);
        target = target
            .with_full_conditionals(move |coord, s, rng| gauss_conditional(&gi, coord, s, rng));
    }

    let lik_inner = Arc::clone(&inner);
    let likelihood = LogTarget::new(layout.names.clone(), move |p: &[f64]| {
        lik_inner.total_loglik_natural(p)
    });

    Ok(Compiled {
        target,
        likelihood,
        layout,
        standardization: meta,
        n_obs: y.len(),
        inner,
    })
}

fn push(
    names: &mut Vec<String>,
    transforms: &mut Vec<Transform>,
    name: &str,
    t: Transform,
) -> usize {
    names.push(name.to_string());
    transforms.push(t);
    names.len() - 1
}

fn broadcast_priors(priors: &[PriorSpec], k: usize) -> Result<Vec<CoefPrior>> {
    if k == 0 {
        return Ok(vec![]);
    }
    if priors.len() == k {
        priors.iter().map(|p| coef_prior(p, "slope")).collect()
    } else if priors.len() == 1 {
        Ok(vec![coef_prior(&priors[0], "slope")?; k])
    } else if priors.is_empty() {
        Ok(vec![CoefPrior::Gauss { m: 0.0, s: 1.0 }; k])
    } else {
        Err(Error::Spec(format!(
            "{} slope priors for {} predictors",
            priors.len(),
            k
        )))
    }
}

fn check_pairing(likelihood: &Likelihood, link: LinkFunction) -> Result<()> {
    let ok = matches!(
        (likelihood, link),
        (Likelihood::Gauss, LinkFunction::Identity)
            | (Likelihood::StudentT { .. }, LinkFunction::Identity)
            | (Likelihood::AnovaCellMeans { .. }, LinkFunction::Identity)
            | (Likelihood::Bernoulli, LinkFunction::Logistic)
            | (Likelihood::Binomial { .. }, LinkFunction::Logistic)
            | (Likelihood::Poisson { .. }, LinkFunction::NaturalExp)
            | (Likelihood::NegativeBinomial, LinkFunction::NaturalExp)
            | (Likelihood::Exponential, LinkFunction::NegativeInverse)
    );
    if ok {
        Ok(())
    } else {
        Err(Error::Spec(format!(
            "likelihood {likelihood:?} cannot be paired with link {link:?}"
        )))
    }
}

/// Full conditional draws for the homoscedastic Gauss models: each
/// coefficient (or cell mean) is conditionally Gauss, the variance is
/// conditionally inverse-Gamma (the coordinate itself is ln sigma).
fn gauss_conditional(inner: &Inner, coord: usize, s: &[f64], rng: &mut Rng) -> f64 {
    let natural = inner.to_natural(s);
    let sigma_idx = inner.layout.sigma.unwrap();
    if coord == sigma_idx {
        let (a0, d0) = match inner.sigma_prior.unwrap() {
            ScalePrior::InvGammaVar { a, d } => (a, d),
            _ => unreachable!(),
        };
        let n = inner.zy.len() as f64;
        let rss: f64 = (0..inner.zy.len())
            .map(|i| {
                let r = inner.zy[i] - inner.mean_for(&natural, i);
                r * r
            })
            .sum();
        let var = Distribution::InverseGamma { alpha: a0 + n / 2.0, beta: d0 + rss / 2.0 }
            .sample_one(rng)
            .unwrap();
        return 0.5 * math::ln(var);
    }

    let sigma2 = natural[sigma_idx] * natural[sigma_idx];
    let prior_idx = if inner.cell_means() {
        coord - inner.layout.coef_start
    } else if coord == inner.layout.coef_start {
        0
    } else {
        1 + inner.layout.slopes.iter().position(|&c| c == coord).unwrap()
    };
    let (m0, s0) = match inner.coef_priors[prior_idx.min(inner.coef_priors.len() - 1)] {
        CoefPrior::Gauss { m, s } => (m, s),
        _ => unreachable!(),
    };
    let cell_means = inner.cell_means();
    let mut prec = 1.0 / (s0 * s0);
    let mut mp = m0 / (s0 * s0);
    for i in 0..inner.zy.len() {
        let xj = if cell_means {
            if inner.groups.as_ref().unwrap().index[i] + inner.layout.coef_start != coord {
                continue;
            }
            1.0
        } else if coord == inner.layout.coef_start {
            1.0
        } else {
            let j = inner.layout.slopes.iter().position(|&c| c == coord).unwrap();
            inner.zx[i][j + 1]
        };
        let mut mu_rest = 0.0;
        if !cell_means {
            if coord != inner.layout.coef_start {
                mu_rest += natural[inner.layout.coef_start];
            }
            for (j, &cidx) in inner.layout.slopes.iter().enumerate() {
                if cidx != coord {
                    mu_rest += natural[cidx] * inner.zx[i][j + 1];
                }
            }
        }
        let r = inner.zy[i] - mu_rest;
        prec += xj * xj / sigma2;
        mp += xj * r / sigma2;
    }
    let var = 1.0 / prec;
    mp * var + math::sqrt(var) * rng.standard_normal()
}

impl Compiled {
    /// Single-observation log likelihood at a natural-scale draw. The
    /// data-only constants are spread uniformly so pointwise sums
    /// reproduce the total likelihood.
    pub fn obs_log_lik(&self, natural_params: &[f64], i: usize) -> f64 {
        self.inner.obs_loglik(natural_params, i) + self.inner.ll_const / self.n_obs as f64
    }

    /// Expectation parameter for a new case at a natural-scale draw;
    /// `x_row` is a raw-scale predictor row (without the ones column),
    /// `group` a 0-based group index where the model has groups.
    pub fn predict_mean(
        &self,
        natural_params: &[f64],
        x_row: &[f64],
        group: Option<usize>,
    ) -> Result<f64> {
        let z = self.linear_form_new(natural_params, x_row, group)?;
        let link = match self.inner.family {
            Family::Gauss | Family::StudentT => LinkFunction::Identity,
            Family::Bernoulli | Family::Binomial => LinkFunction::Logistic,
            Family::Poisson | Family::NegBinomial => LinkFunction::NaturalExp,
            Family::Exponential => LinkFunction::NegativeInverse,
        };
        apply_inverse_link(link, z)
    }

    fn linear_form_new(&self, p: &[f64], x_row: &[f64], group: Option<usize>) -> Result<f64> {
        let inner = &self.inner;
        if x_row.len() != inner.k {
            return Err(Error::Dimension(format!(
                "new case has {} predictors, model has {}",
                x_row.len(),
                inner.k
            )));
        }
        let mut z = if let Some(ad) = &inner.adaptive {
            let g = group.ok_or_else(|| {
                Error::Dimension("hierarchical model needs a group for prediction".to_string())
            })?;
            let (g0, g1) = inner.layout.group_block.unwrap();
            if g0 + g >= g1 {
                return Err(Error::Dimension(format!("group {g} out of range")));
            }
            if ad.zero_centered {
                p[inner.layout.beta_const.unwrap()] + p[g0 + g]
            } else {
                p[g0 + g]
            }
        } else if inner.cell_means() || inner.hetero_anova.is_some() {
            let g = group.ok_or_else(|| {
                Error::Dimension("cell-means model needs a group for prediction".to_string())
            })?;
            if g + inner.layout.coef_start >= inner.layout.coef_end {
                return Err(Error::Dimension(format!("group {g} out of range")));
            }
            if let Some(mu0) = inner.layout.mu0 {
                p[mu0] + p[inner.layout.coef_start + g]
            } else {
                p[inner.layout.coef_start + g]
            }
        } else {
            p[inner.layout.coef_start]
        };
        for (j, &raw) in x_row.iter().enumerate() {
            let (m, sd) = self.standardization.x[j].unwrap_or((0.0, 1.0));
            z += p[inner.layout.slopes[j]] * (raw - m) / sd;
        }
        Ok(z)
    }

    /// Draws one new observation from the single-datum likelihood at a
    /// natural-scale posterior draw, on the raw response scale.
    pub fn sample_new_case(
        &self,
        natural_params: &[f64],
        x_row: &[f64],
        group: Option<usize>,
        rng: &mut Rng,
    ) -> Result<f64> {
        let inner = &self.inner;
        let mu = self.predict_mean(natural_params, x_row, group)?;
        let draw = match inner.family {
            Family::Gauss => {
                let sigma = natural_params[inner.layout.sigma.unwrap()];
                mu + sigma * rng.standard_normal()
            }
            Family::StudentT => {
                let sigma = if let Some((s0, _)) = inner.layout.sigma_group {
                    natural_params[s0 + group.unwrap_or(0)]
                } else {
                    natural_params[inner.layout.sigma.unwrap()]
                };
                let nu = natural_params[inner.layout.nu.unwrap()];
                Distribution::NoncentralT { mu, sigma, nu }.sample_one(rng)?
            }
            Family::Bernoulli | Family::Binomial => {
                // New cases default to a single trial.
                if rng.uniform() < mu {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Poisson => Distribution::Poisson { theta: mu }.sample_one(rng)?,
            Family::Exponential => Distribution::Exponential { theta: mu }.sample_one(rng)?,
            Family::NegBinomial => {
                let size = natural_params[inner.layout.nb_size.unwrap()];
                let theta = size / (size + mu);
                Distribution::NegativeBinomial { n: size, theta }.sample_one(rng)?
            }
        };
        // Metric responses were fitted on the standardised scale.
        if let Some((ym, ys)) = self.standardization.y {
            Ok(draw * ys + ym)
        } else {
            Ok(draw)
        }
    }

    /// Raw-scale coefficient view of one natural-scale draw:
    /// de-standardises the intercept/slope block (and the residual
    /// scale for metric responses), leaving other entries unchanged.
    pub fn destandardize_draw(&self, natural_params: &[f64]) -> Result<Vec<f64>> {
        let inner = &self.inner;
        if inner.adaptive.is_some() || inner.hetero_anova.is_some() {
            return self.destandardize_hierarchical(natural_params);
        }
        if inner.cell_means() {
            return Ok(natural_params.to_vec());
        }
        let mut z = Vec::with_capacity(inner.k + 2);
        z.push(natural_params[inner.layout.coef_start]);
        for &si in &inner.layout.slopes {
            z.push(natural_params[si]);
        }
        if let Some(si) = inner.layout.sigma {
            z.push(natural_params[si]);
        }
        let mut out = destandardize(&self.standardization, &z)?;
        if let Some(ni) = inner.layout.nu {
            out.push(natural_params[ni]);
        }
        if let Some(ni) = inner.layout.nb_size {
            out.push(natural_params[ni]);
        }
        Ok(out)
    }

    fn destandardize_hierarchical(&self, natural_params: &[f64]) -> Result<Vec<f64>> {
        let inner = &self.inner;
        let meta = &self.standardization;
        let (y_shift, y_scale) = meta.y.unwrap_or((0.0, 1.0));
        let mut shift = 0.0;
        let mut raw_slopes = Vec::with_capacity(inner.k);
        for (j, &si) in inner.layout.slopes.iter().enumerate() {
            let (xm, xs) = meta.x[j].unwrap_or((0.0, 1.0));
            let b = natural_params[si] * y_scale / xs;
            shift += b * xm;
            raw_slopes.push(b);
        }
        let de_intercept = |v: f64| v * y_scale + y_shift - shift;
        let mut out = Vec::with_capacity(natural_params.len());
        for (idx, &v) in natural_params.iter().enumerate() {
            let in_group = inner
                .layout
                .group_block
                .map(|(a, b)| idx >= a && idx < b)
                .unwrap_or(false);
            let in_cells = inner.hetero_anova.is_some()
                && idx >= inner.layout.coef_start
                && idx < inner.layout.coef_end;
            let w = if in_group
                || Some(idx) == inner.layout.zeta
                || Some(idx) == inner.layout.mu0
                || Some(idx) == inner.layout.beta_const
            {
                de_intercept(v)
            } else if in_cells {
                // Zero-centred deviations only rescale.
                v * y_scale
            } else if inner.layout.slopes.contains(&idx) {
                let j = inner.layout.slopes.iter().position(|&s| s == idx).unwrap();
                raw_slopes[j]
            } else if Some(idx) == inner.layout.sigma
                || Some(idx) == inner.layout.omega
                || Some(idx) == inner.layout.tau
                || inner
                    .layout
                    .sigma_group
                    .map(|(a, b)| idx >= a && idx < b)
                    .unwrap_or(false)
            {
                v * y_scale
            } else {
                v
            };
            out.push(w);
        }
        Ok(out)
    }

    /// Applies [`Compiled::destandardize_draw`] to every draw.
    pub fn destandardize_chains(&self, chains: &ChainSet) -> Result<ChainSet> {
        let mut out = chains.clone();
        for chain in out.chains.iter_mut() {
            for draw in chain.iter_mut() {
                *draw = self.destandardize_draw(draw)?;
            }
        }
        Ok(out)
    }
}
