//! Duration priors.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::StochasticError;
use crate::rng::unit_open;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DurationPrior {
    /// Planner-elicited bounds: optimistic `a`, most likely `m`, pessimistic `b`.
    Triangular { a: f64, m: f64, b: f64 },
    /// Moment-specified lognormal.
    Lognormal { mean: f64, sd: f64 },
}

impl DurationPrior {
    pub fn triangular(a: f64, m: f64, b: f64) -> Result<Self, StochasticError> {
        let p = DurationPrior::Triangular { a, m, b };
        p.validate()?;
        Ok(p)
    }

    pub fn lognormal(mean: f64, sd: f64) -> Result<Self, StochasticError> {
        let p = DurationPrior::Lognormal { mean, sd };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), StochasticError> {
        let ok = match *self {
            DurationPrior::Triangular { a, m, b } => a >= 0.0 && a <= m && m <= b && b.is_finite(),
            DurationPrior::Lognormal { mean, sd } => mean > 0.0 && sd > 0.0 && mean.is_finite() && sd.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(StochasticError::InvalidPrior(*self))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DurationPrior::Triangular { a, m, b } => (a + m + b) / 3.0,
            DurationPrior::Lognormal { mean, .. } => mean,
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            DurationPrior::Triangular { a, m, b } => {
                libm::sqrt((a * a + m * m + b * b - a * m - a * b - m * b) / 18.0)
            }
            DurationPrior::Lognormal { sd, .. } => sd,
        }
    }

    /// `(mu, sigma)` of the underlying normal for the lognormal form.
    pub fn log_params(mean: f64, sd: f64) -> (f64, f64) {
        let s2 = libm::log1p((sd * sd) / (mean * mean));
        (libm::log(mean) - s2 / 2.0, libm::sqrt(s2))
    }

    /// Triangular inverse CDF at `u` in (0, 1).
    pub fn triangular_quantile(a: f64, m: f64, b: f64, u: f64) -> f64 {
        if b <= a {
            return a;
        }
        let fc = (m - a) / (b - a);
        if u < fc {
            a + libm::sqrt(u * (b - a) * (m - a))
        } else {
            b - libm::sqrt((1.0 - u) * (b - a) * (b - m))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DurationPrior::Triangular { a, m, b } => Self::triangular_quantile(a, m, b, unit_open(rng)),
            DurationPrior::Lognormal { mean, sd } => {
                let (mu, sigma) = Self::log_params(mean, sd);
                let z: f64 = StandardNormal.sample(rng);
                libm::exp(mu + sigma * z)
            }
        }
    }
}
