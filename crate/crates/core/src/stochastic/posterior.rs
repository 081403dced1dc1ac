//! Weighted-sample duration posteriors and evidence updates.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::prior::DurationPrior;
use super::StochasticError;
use crate::rng::{stream_key, substream, unit_open, DOMAIN_PRIOR, DOMAIN_RESAMPLE};

pub const DEFAULT_SAMPLES: usize = 4096;
pub const ESS_FLOOR: f64 = 64.0;
/// Likelihood sd as a fraction of the prior mean when evidence does not set one.
pub const DEFAULT_LIKELIHOOD_SD_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosteriorFlags {
    /// Weights collapsed below the effective-sample-size floor and were resampled.
    #[serde(default)]
    pub resampled: bool,
    /// The last update produced no usable weights; the input was kept.
    #[serde(default)]
    pub degenerate_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationPosterior {
    samples: Vec<f64>,
    weights: Vec<f64>,
    prior_mean: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    key: u64,
    #[serde(default)]
    generation: u32,
    #[serde(default)]
    pub flags: PosteriorFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub activity_id: String,
    pub week: u32,
    pub percent_complete: f64,
    /// Workdays since the activity started.
    pub elapsed: f64,
    /// Defaults to 15% of the prior mean.
    #[serde(default)]
    pub likelihood_sd: Option<f64>,
}

impl Evidence {
    pub fn new(activity_id: impl Into<String>, week: u32, percent_complete: f64, elapsed: f64) -> Self {
        Evidence { activity_id: activity_id.into(), week, percent_complete, elapsed, likelihood_sd: None }
    }

    pub fn with_sd(mut self, sd: f64) -> Self {
        self.likelihood_sd = Some(sd);
        self
    }

    pub fn implied_duration(&self) -> f64 {
        self.elapsed / self.percent_complete
    }

    fn validate(&self) -> Result<(), StochasticError> {
        let pc_ok = self.percent_complete > 0.0 && self.percent_complete <= 1.0;
        let sd_ok = self.likelihood_sd.map_or(true, |s| s > 0.0);
        if !pc_ok || !(self.elapsed >= 0.0 && self.elapsed.is_finite()) || !sd_ok {
            return Err(StochasticError::DegenerateEvidence(self.activity_id.clone()));
        }
        Ok(())
    }
}

impl DurationPosterior {
    /// Draws `n` equally weighted samples from `prior`.
    ///
    /// The sample set is a pure function of `(seed, activity_id)`.
    pub fn from_prior(prior: &DurationPrior, activity_id: &str, seed: u64, n: usize) -> Result<Self, StochasticError> {
        prior.validate()?;
        if n == 0 {
            return Err(StochasticError::EmptyPosterior(String::from(activity_id)));
        }
        let key = stream_key(activity_id);
        let mut rng = substream(seed, DOMAIN_PRIOR, key, 0);
        let samples: Vec<f64> = (0..n).map(|_| prior.sample(&mut rng)).collect();
        Ok(DurationPosterior {
            weights: alloc::vec![1.0 / n as f64; n],
            samples,
            prior_mean: prior.mean(),
            seed,
            key,
            generation: 0,
            flags: PosteriorFlags::default(),
        })
    }

    /// A point mass.
    pub fn fixed(duration: f64) -> Self {
        DurationPosterior {
            samples: alloc::vec![duration],
            weights: alloc::vec![1.0],
            prior_mean: duration,
            seed: 0,
            key: 0,
            generation: 0,
            flags: PosteriorFlags::default(),
        }
    }

    /// A discrete distribution from `(duration, weight)` pairs; weights are normalized.
    pub fn discrete(points: &[(f64, f64)]) -> Result<Self, StochasticError> {
        let total: f64 = points.iter().map(|p| p.1).sum();
        let valid = points.iter().all(|&(d, w)| d >= 0.0 && d.is_finite() && w >= 0.0);
        if points.is_empty() || !valid || !(total > 0.0) {
            return Err(StochasticError::EmptyPosterior(String::from("discrete")));
        }
        let samples: Vec<f64> = points.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = points.iter().map(|p| p.1 / total).collect();
        let mean = samples.iter().zip(&weights).map(|(d, w)| d * w).sum();
        Ok(DurationPosterior {
            samples,
            weights,
            prior_mean: mean,
            seed: 0,
            key: 0,
            generation: 0,
            flags: PosteriorFlags::default(),
        })
    }

    /// Rebuilds from stored parts, normalizing the weights.
    pub fn from_parts(samples: Vec<f64>, weights: Vec<f64>, prior_mean: f64) -> Result<Self, StochasticError> {
        let pairs: Vec<(f64, f64)> = samples.into_iter().zip(weights).collect();
        let mut p = Self::discrete(&pairs)?;
        p.prior_mean = prior_mean;
        Ok(p)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().zip(&self.weights).map(|(d, w)| d * w).sum()
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let v: f64 = self.samples.iter().zip(&self.weights).map(|(d, w)| w * (d - m) * (d - m)).sum();
        libm::sqrt(v.max(0.0))
    }

    pub fn min(&self) -> f64 {
        self.support().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.support().fold(f64::NEG_INFINITY, f64::max)
    }

    fn support(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().zip(&self.weights).filter(|(_, &w)| w > 0.0).map(|(&d, _)| d)
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Adds `days` to every sample, floored at zero.
    pub fn shifted(&self, days: f64) -> Self {
        let mut p = self.clone();
        for d in &mut p.samples {
            *d = (*d + days).max(0.0);
        }
        p.prior_mean = (p.prior_mean + days).max(0.0);
        p
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut p = self.clone();
        for d in &mut p.samples {
            *d *= factor;
        }
        p.prior_mean *= factor;
        p
    }

    pub fn sampler(&self) -> PosteriorSampler {
        PosteriorSampler::new(self)
    }

    fn apply_log_likelihood(&self, loglik: impl Fn(f64) -> f64) -> Self {
        let logw: Vec<f64> = self
            .samples
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| if w > 0.0 { libm::log(w) + loglik(d) } else { f64::NEG_INFINITY })
            .collect();
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut next = self.clone();
        next.generation = self.generation + 1;
        next.flags = PosteriorFlags::default();
        if !max.is_finite() {
            next.flags.degenerate_fallback = true;
            next.weights = self.weights.clone();
            return next;
        }
        let raw: Vec<f64> = logw.iter().map(|&l| libm::exp(l - max)).collect();
        let total: f64 = raw.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            next.flags.degenerate_fallback = true;
            return next;
        }
        next.weights = raw.into_iter().map(|w| w / total).collect();
        if next.effective_sample_size() < ESS_FLOOR && next.len() as f64 >= ESS_FLOOR {
            next.resample();
            next.flags.resampled = true;
        }
        next
    }

    /// Systematic resampling to equal weights.
    fn resample(&mut self) {
        let n = self.samples.len();
        let mut rng = substream(self.seed, DOMAIN_RESAMPLE, self.key, self.generation as u64);
        let u0 = unit_open(&mut rng) / n as f64;
        let mut out = Vec::with_capacity(n);
        let mut cum = self.weights[0];
        let mut i = 0;
        for k in 0..n {
            let target = u0 + k as f64 / n as f64;
            while cum < target && i + 1 < n {
                i += 1;
                cum += self.weights[i];
            }
            out.push(self.samples[i]);
        }
        self.samples = out;
        self.weights = alloc::vec![1.0 / n as f64; n];
    }

    fn likelihood_sd(&self, e: &Evidence) -> f64 {
        e.likelihood_sd.unwrap_or(DEFAULT_LIKELIHOOD_SD_FRACTION * self.prior_mean)
    }
}

fn gaussian_loglik(d: f64, centre: f64, sd: f64) -> f64 {
    if sd.is_infinite() {
        return 0.0;
    }
    let z = (d - centre) / sd;
    -0.5 * z * z
}

/// Reweights the sample set by a Gaussian likelihood on the implied total
/// duration `elapsed / percent_complete`.
pub fn bayesian_update(post: &DurationPosterior, e: &Evidence) -> Result<DurationPosterior, StochasticError> {
    e.validate()?;
    let centre = e.implied_duration();
    let sd = post.likelihood_sd(e);
    if !(sd > 0.0) {
        return Err(StochasticError::DegenerateEvidence(e.activity_id.clone()));
    }
    Ok(post.apply_log_likelihood(|d| gaussian_loglik(d, centre, sd)))
}

/// One update with the product likelihood of several observations.
pub fn bayesian_update_batch(post: &DurationPosterior, evidence: &[Evidence]) -> Result<DurationPosterior, StochasticError> {
    let mut terms = Vec::with_capacity(evidence.len());
    for e in evidence {
        e.validate()?;
        terms.push((e.implied_duration(), post.likelihood_sd(e)));
    }
    Ok(post.apply_log_likelihood(|d| terms.iter().map(|&(c, s)| gaussian_loglik(d, c, s)).sum()))
}

/// Inverse-CDF sampling from a posterior's weighted sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSampler {
    values: Vec<f64>,
    cdf: Vec<f64>,
}

impl PosteriorSampler {
    pub fn new(post: &DurationPosterior) -> Self {
        let mut values = Vec::with_capacity(post.len());
        let mut cdf = Vec::with_capacity(post.len());
        let mut acc = 0.0;
        for (&d, &w) in post.samples.iter().zip(&post.weights) {
            if w > 0.0 {
                acc += w;
                values.push(d);
                cdf.push(acc);
            }
        }
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        PosteriorSampler { values, cdf }
    }

    pub fn is_fixed(&self) -> bool {
        self.values.len() == 1
    }

    /// The sample at cumulative weight `u` in (0, 1).
    pub fn sample(&self, u: f64) -> f64 {
        if self.values.len() == 1 {
            return self.values[0];
        }
        let i = self.cdf.partition_point(|&c| c < u);
        self.values[i.min(self.values.len() - 1)]
    }
}
