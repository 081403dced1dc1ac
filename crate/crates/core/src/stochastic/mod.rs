//! Duration priors, Bayesian posteriors, Monte-Carlo forecasts and buffers.

mod buffer;
mod forecast_log;
mod mcs;
mod posterior;
mod prior;

use alloc::string::String;
use thiserror::Error;

pub use buffer::{replay_buffers, BufferEntry, BufferKind, BufferLedger, BufferOverrun};
pub use forecast_log::{weekly_forecast_log, ForecastEntry, ForecastLog, CONVERGENCE_DAYS};
pub use mcs::{
    criticality_index, empirical_quantile, quantile, run_mcs, FinishDistribution, McsRunner, SequentialRunner,
    Simulation, TrialBatch,
};
pub use posterior::{
    bayesian_update, bayesian_update_batch, DurationPosterior, Evidence, PosteriorFlags, PosteriorSampler,
    DEFAULT_LIKELIHOOD_SD_FRACTION, DEFAULT_SAMPLES, ESS_FLOOR,
};
pub use prior::DurationPrior;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StochasticError {
    #[error("invalid duration prior {0:?}")]
    InvalidPrior(DurationPrior),
    #[error("{0}: posterior has no samples")]
    EmptyPosterior(String),
    #[error("{0}: no posterior for activity")]
    MissingPosterior(String),
    #[error("{0}: evidence needs 0 < percent complete <= 1, finite elapsed >= 0 and a positive sd")]
    DegenerateEvidence(String),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("buffer sizes must be positive")]
    InvalidBufferSize,
    #[error("week {0}: buffer deltas must be non-negative")]
    NegativeBufferDelta(u32),
    #[error("week {0} is not after the previous entry")]
    WeekOutOfOrder(u32),
}
