//! Project-control engine core.
//!
//! Pure, allocation-only algorithms for schedule and cost control of a
//! construction project: critical-path scheduling, quantity reconciliation and
//! classification metrics, earned value, Bayesian duration posteriors with
//! Monte-Carlo finish forecasts, resource leveling with a masked value
//! learner, and coupled what-if scenario evaluation. File formats, reports,
//! threading, and the service live in the `sitetwin` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cost;
pub mod csi;
pub mod earned_value;
pub mod leveler;
pub mod money;
pub mod progress;
pub mod project;
pub mod rng;
pub mod stochastic;
pub mod synthetic;
pub mod whatif;

pub use money::Money;
