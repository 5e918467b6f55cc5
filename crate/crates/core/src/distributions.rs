//! Distribution families for event quantities, their fits and the
//! beamwidth-dependent mean attenuation model.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::special::{std_normal_cdf, std_normal_quantile};

/// Default fraction of the upper tail left out of a fit.
pub const DEFAULT_TRIM_FRACTION: f64 = 0.02;

/// Fewest samples a fit accepts once the tail is trimmed.
pub const MIN_FIT_SAMPLES: usize = 8;

const WEIBULL_MAX_ITER: usize = 200;
const WEIBULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LogNormal,
    Weibull,
    Normal,
    Uniform,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::LogNormal, Family::Weibull, Family::Normal, Family::Uniform];

    pub fn name(self) -> &'static str {
        match self {
            Family::LogNormal => "Log-normal",
            Family::Weibull => "Weibull",
            Family::Normal => "Normal",
            Family::Uniform => "Uniform",
        }
    }
}

/// A fully parameterised member of one of the four families.
///
/// Log-normal parameters describe the underlying normal of `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    LogNormal { mu: f64, sigma: f64 },
    Weibull { scale: f64, shape: f64 },
    Normal { mu: f64, sigma: f64 },
    Uniform { lower: f64, upper: f64 },
}

impl Distribution {
    pub fn family(&self) -> Family {
        match self {
            Distribution::LogNormal { .. } => Family::LogNormal,
            Distribution::Weibull { .. } => Family::Weibull,
            Distribution::Normal { .. } => Family::Normal,
            Distribution::Uniform { .. } => Family::Uniform,
        }
    }

    /// The two parameters in table order (μ, σ / α, β / μ, σ / A, B).
    pub fn params(&self) -> (f64, f64) {
        match *self {
            Distribution::LogNormal { mu, sigma } | Distribution::Normal { mu, sigma } => (mu, sigma),
            Distribution::Weibull { scale, shape } => (scale, shape),
            Distribution::Uniform { lower, upper } => (lower, upper),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.params();
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("{self}: non-finite parameter")));
        }
        let ok = match *self {
            Distribution::LogNormal { sigma, .. } | Distribution::Normal { sigma, .. } => sigma > 0.0,
            Distribution::Weibull { scale, shape } => scale > 0.0 && shape > 0.0,
            Distribution::Uniform { lower, upper } => upper > lower,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self}: parameters out of range")))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Distribution::Weibull { scale, shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
            Distribution::Normal { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            Distribution::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
        }
    }

    /// Inverse CDF, `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        self.from_normal_score(std_normal_quantile(u))
    }

    /// Maps a standard normal score through this distribution's quantile
    /// function, `F⁻¹(Φ(z))`, without losing tail precision.
    pub fn from_normal_score(&self, z: f64) -> f64 {
        match *self {
            Distribution::LogNormal { mu, sigma } => (mu + sigma * z).exp(),
            Distribution::Normal { mu, sigma } => mu + sigma * z,
            Distribution::Weibull { scale, shape } => scale * (-std_normal_cdf(-z).ln()).powf(1.0 / shape),
            Distribution::Uniform { lower, upper } => lower + (upper - lower) * std_normal_cdf(z),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Distribution::Weibull { scale, shape } => scale * gamma(1.0 + 1.0 / shape),
            Distribution::Normal { mu, .. } => mu,
            Distribution::Uniform { lower, upper } => 0.5 * (lower + upper),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distribution::LogNormal { mu, sigma } => write!(f, "Log-normal μ = {mu:.2}; σ = {sigma:.2}"),
            Distribution::Weibull { scale, shape } => write!(f, "Weibull α = {scale:.2}; β = {shape:.2}"),
            Distribution::Normal { mu, sigma } => write!(f, "Normal μ = {mu:.2}; σ = {sigma:.2}"),
            Distribution::Uniform { lower, upper } => write!(f, "Uniform A = {lower:.2}; B = {upper:.2}"),
        }
    }
}

/// A fitted distribution with its goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFit {
    pub distribution: Distribution,
    /// NMSE between the empirical and fitted CDFs, at most 1.
    pub gof: f64,
    /// Samples the fit was computed from; `None` for published parameters.
    pub n_samples: Option<usize>,
    /// Upper-tail fraction excluded while fitting.
    pub trim_fraction: f64,
}

impl DistributionFit {
    pub fn published(distribution: Distribution, gof: f64) -> Self {
        Self {
            distribution,
            gof,
            n_samples: None,
            trim_fraction: DEFAULT_TRIM_FRACTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if !(self.gof <= 1.0) {
            return Err(Error::InvalidParameter(format!("gof {} exceeds 1", self.gof)));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return Err(Error::InvalidParameter(format!("trim fraction {} outside [0, 1)", self.trim_fraction)));
        }
        Ok(())
    }
}

/// Sorted samples with the top `trim_fraction` removed.
fn trimmed_sorted(samples: &[f64], trim_fraction: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&trim_fraction) {
        return Err(Error::InvalidParameter(format!("trim fraction {trim_fraction} outside [0, 1)")));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let drop = (sorted.len() as f64 * trim_fraction).floor() as usize;
    sorted.truncate(sorted.len() - drop);
    if sorted.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples after trimming, need {MIN_FIT_SAMPLES}",
            sorted.len()
        )));
    }
    Ok(sorted)
}

/// Maximum-likelihood fit of `family` to the trimmed samples.
pub fn fit_distribution(samples: &[f64], family: Family, trim_fraction: f64) -> Result<DistributionFit> {
    let kept = trimmed_sorted(samples, trim_fraction)?;
    let distribution = match family {
        Family::LogNormal => {
            require_positive(&kept)?;
            let logs: Vec<f64> = kept.iter().map(|x| x.ln()).collect();
            let (mu, sigma) = mean_std(&logs);
            Distribution::LogNormal { mu, sigma }
        }
        Family::Normal => {
            let (mu, sigma) = mean_std(&kept);
            Distribution::Normal { mu, sigma }
        }
        Family::Uniform => Distribution::Uniform {
            lower: kept[0],
            upper: kept[kept.len() - 1],
        },
        Family::Weibull => {
            require_positive(&kept)?;
            let (scale, shape) = weibull_mle(&kept)?;
            Distribution::Weibull { scale, shape }
        }
    };
    if distribution.validate().is_err() {
        return Err(Error::DegenerateSample);
    }
    Ok(DistributionFit {
        distribution,
        gof: cdf_gof(&kept, samples.len(), &distribution),
        n_samples: Some(samples.len()),
        trim_fraction,
    })
}

/// Fits every family and returns them best-first by GOF; families that
/// cannot be fitted (e.g. log families on non-positive data) are skipped.
pub fn fit_all_families(samples: &[f64], trim_fraction: f64) -> Result<Vec<DistributionFit>> {
    let mut fits = Vec::new();
    let mut last_err = None;
    for family in Family::ALL {
        match fit_distribution(samples, family, trim_fraction) {
            Ok(f) => fits.push(f),
            Err(e) => last_err = Some(e),
        }
    }
    if fits.is_empty() {
        return Err(last_err.unwrap_or(Error::DegenerateSample));
    }
    fits.sort_by(|a, b| b.gof.total_cmp(&a.gof));
    Ok(fits)
}

/// GOF of `distribution` against data, dropping the top `trim_fraction`
/// of points from the comparison.
pub fn distribution_gof(samples: &[f64], distribution: &Distribution, trim_fraction: f64) -> Result<f64> {
    let kept = trimmed_sorted(samples, trim_fraction)?;
    Ok(cdf_gof(&kept, samples.len(), distribution))
}

/// Empirical ordinates are `i / n_total` at the retained order statistics.
fn cdf_gof(kept_sorted: &[f64], n_total: usize, distribution: &Distribution) -> f64 {
    let empirical: Vec<f64> = (1..=kept_sorted.len()).map(|i| i as f64 / n_total as f64).collect();
    let model: Vec<f64> = kept_sorted.iter().map(|&x| distribution.cdf(x)).collect();
    nmse_gof(&empirical, &model).unwrap_or(f64::NEG_INFINITY)
}

/// `1 - Σ(e - m)² / Σ(e - ē)²`; 1 is a perfect match, unbounded below.
pub fn nmse_gof(empirical: &[f64], model: &[f64]) -> Result<f64> {
    if empirical.len() != model.len() {
        return Err(Error::LengthMismatch(empirical.len(), model.len()));
    }
    if empirical.len() < 2 {
        return Err(Error::InsufficientData("need at least two CDF ordinates".into()));
    }
    let n = empirical.len() as f64;
    let mean = empirical.iter().sum::<f64>() / n;
    let reference: f64 = empirical.iter().map(|e| (e - mean).powi(2)).sum();
    if reference == 0.0 {
        return Err(Error::ZeroVarianceReference);
    }
    let residual: f64 = empirical.iter().zip(model).map(|(e, m)| (e - m).powi(2)).sum();
    Ok(1.0 - residual / reference)
}

pub fn sample_distribution(distribution: &Distribution, n: usize, seed: u64) -> Result<Vec<f64>> {
    sample_with(distribution, n, &mut SimRng::seed_from_u64(seed))
}

/// Inverse-CDF sampling.
pub fn sample_with(distribution: &Distribution, n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
    distribution.validate()?;
    Ok((0..n).map(|_| distribution.quantile(rng.uniform())).collect())
}

fn require_positive(x: &[f64]) -> Result<()> {
    if x[0] <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "non-positive sample {} for a log-domain family",
            x[0]
        )));
    }
    Ok(())
}

/// Mean and maximum-likelihood (1/n) standard deviation.
fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Newton iteration on the profile-likelihood equation for the shape,
/// then the closed-form scale. Data are scaled by their maximum so that
/// `x^β` cannot overflow.
fn weibull_mle(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let (mean, sd) = mean_std(x);
    if !(sd > 0.0) {
        return Err(Error::DegenerateSample);
    }
    let x_max = x.iter().copied().fold(f64::MIN, f64::max);
    let logs: Vec<f64> = x.iter().map(|v| (v / x_max).ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / n;

    // method-of-moments start from the coefficient of variation
    let mut shape = (sd / mean).powf(-1.086).clamp(0.05, 500.0);
    for _ in 0..WEIBULL_MAX_ITER {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in &logs {
            let w = (shape * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let g = 1.0 / shape + mean_log - s1 / s0;
        let dg = -1.0 / (shape * shape) - (s2 * s0 - s1 * s1) / (s0 * s0);
        let mut next = shape - g / dg;
        if !(next > 0.0) || !next.is_finite() {
            next = 0.5 * shape;
        }
        let step = (next - shape).abs();
        shape = next;
        if step < WEIBULL_TOL {
            let s0: f64 = logs.iter().map(|&l| (shape * l).exp()).sum();
            let scale = x_max * (s0 / n).powf(1.0 / shape);
            return Ok((scale, shape));
        }
    }
    Err(Error::WeibullFitFailed)
}

/// Mean blockage attenuation versus antenna HPBW:
/// `10 log10(b + 180 / HPBW)` dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttenuationModel {
    pub b: f64,
}

impl AttenuationModel {
    pub const PUBLISHED_B: f64 = 9.8;

    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("b must be > 0, got {b}")));
        }
        Ok(Self { b })
    }

    /// Attenuation approached as the beamwidth grows without bound.
    pub fn wide_beam_limit_db(&self) -> f64 {
        10.0 * self.b.log10()
    }
}

pub fn predict_mean_attenuation(model: &AttenuationModel, hpbw_deg: f64) -> Result<f64> {
    if !(hpbw_deg > 0.0) {
        return Err(Error::InvalidParameter(format!("HPBW must be > 0, got {hpbw_deg}")));
    }
    Ok(10.0 * (model.b + 180.0 / hpbw_deg).log10())
}

/// Sum of squared residuals of `points` under constant `b`.
pub fn attenuation_sse(points: &[(f64, f64)], b: f64) -> f64 {
    points
        .iter()
        .map(|&(hpbw, atten)| (atten - 10.0 * (b + 180.0 / hpbw).log10()).powi(2))
        .sum()
}

/// Least-squares `b` by golden-section search on [0.01, 1000].
pub fn fit_mean_attenuation_model(points: &[(f64, f64)]) -> Result<AttenuationModel> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!("{} points, need at least 2", points.len())));
    }
    if points.iter().any(|&(h, a)| !(h > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidParameter("HPBW must be > 0 and attenuation finite".into()));
    }
    let first = points[0].0;
    if points.iter().all(|&(h, _)| h == first) {
        return Err(Error::InsufficientData("need at least two distinct HPBW values".into()));
    }
    let b = golden_section(|b| attenuation_sse(points, b), 0.01, 1000.0, 1e-6);
    AttenuationModel::new(b)
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
