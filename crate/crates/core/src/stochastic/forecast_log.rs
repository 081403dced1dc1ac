//! Weekly P50/P80 forecast history.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::mcs::{empirical_quantile, FinishDistribution};

/// How close P50 must come to the actual finish to count as converged.
pub const CONVERGENCE_DAYS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub week: u32,
    pub p50: f64,
    pub p80: f64,
    #[serde(default)]
    pub actual: Option<f64>,
    #[serde(default)]
    pub note: String,
}

impl ForecastEntry {
    pub fn from_distribution(week: u32, d: &FinishDistribution, actual: Option<f64>) -> Self {
        let sorted = d.sorted_finishes();
        ForecastEntry {
            week,
            p50: empirical_quantile(&sorted, 0.5),
            p80: empirical_quantile(&sorted, 0.8),
            actual,
            note: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastLog {
    pub rows: Vec<ForecastEntry>,
    /// First week with |P50 - actual| <= 0.5 day.
    pub convergence_week: Option<u32>,
    /// First week from which P80 stays at its final value through the end.
    pub p80_plateau_from: Option<u32>,
    /// P80 - P50 never widens from one week to the next.
    pub spread_non_increasing: bool,
}

pub fn weekly_forecast_log(history: &[ForecastEntry]) -> ForecastLog {
    let mut rows: Vec<ForecastEntry> = history.to_vec();
    rows.sort_by_key(|r| r.week);
    let convergence_week = rows
        .iter()
        .find(|r| r.actual.is_some_and(|a| libm::fabs(r.p50 - a) <= CONVERGENCE_DAYS))
        .map(|r| r.week);
    let p80_plateau_from = rows.last().map(|last| {
        let start = rows
            .iter()
            .rposition(|r| libm::fabs(r.p80 - last.p80) > CONVERGENCE_DAYS)
            .map_or(0, |i| i + 1);
        rows[start].week
    });
    let spread_non_increasing = rows
        .windows(2)
        .all(|w| (w[1].p80 - w[1].p50) <= (w[0].p80 - w[0].p50) + 1e-9);
    ForecastLog { rows, convergence_week, p80_plateau_from, spread_non_increasing }
}
