//! Coupled-seed scenario evaluation and sensitivity ranking.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::kg::{NodeRef, NodeType};
use super::scenario::{apply_with_footprint, Footprint, Scenario};
use super::state::TwinState;
use super::WhatIfError;
use crate::cost::ledger_delta;
use crate::money::Money;
use crate::rng::stream_key;
use crate::stochastic::{empirical_quantile, FinishDistribution, McsRunner, SequentialRunner, Simulation};

/// Default ratio of P80 to P50 cost change when no cost spread is modelled.
pub const DEFAULT_COST_P80_FACTOR: f64 = 1.3;
/// Trial cap for interactive evaluation.
pub const DEFAULT_EVAL_TRIALS: u64 = 20_000;

/// How finish deltas at a percentile are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileMode {
    /// quantile(scenario) - quantile(base).
    #[default]
    DifferenceOfQuantiles,
    /// quantile of the per-trial differences (paired trials).
    QuantileOfDifferences,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub n_trials: u64,
    pub seed: u64,
    #[serde(default = "default_factor")]
    pub cost_p80_factor: f64,
    #[serde(default)]
    pub quantile_mode: QuantileMode,
}

fn default_factor() -> f64 {
    DEFAULT_COST_P80_FACTOR
}

impl EvalConfig {
    pub fn new(n_trials: u64, seed: u64) -> Self {
        EvalConfig { n_trials, seed, cost_p80_factor: DEFAULT_COST_P80_FACTOR, quantile_mode: QuantileMode::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub delta_finish_p50: f64,
    pub delta_finish_p80: f64,
    pub delta_cost_p50: Money,
    pub delta_cost_p80: Money,
    pub base_finish_p50: f64,
    pub base_finish_p80: f64,
    pub scenario_finish_p50: f64,
    pub scenario_finish_p80: f64,
    pub affected_divisions: Vec<String>,
    /// P80 cost is the P50 change times a fixed factor.
    pub cost_spread_assumed: bool,
    #[serde(default)]
    pub notes: String,
    pub footprint: Footprint,
    pub seed: u64,
    pub n_trials: u64,
}

fn simulate(state: &TwinState, seed: u64, n: u64, runner: &dyn McsRunner) -> Result<FinishDistribution, WhatIfError> {
    let sim = Simulation::new(&state.network, &state.posteriors, state.axis(), seed)?;
    Ok(runner.run(&sim, n)?)
}

pub fn evaluate(base: &TwinState, s: &Scenario, cfg: &EvalConfig) -> Result<ScenarioResult, WhatIfError> {
    evaluate_with(base, s, cfg, &SequentialRunner)
}

/// Runs base and scenario with the same seed (or a scenario-derived seed when
/// uncoupled) and differences the finish percentiles and ledgers.
pub fn evaluate_with(base: &TwinState, s: &Scenario, cfg: &EvalConfig, runner: &dyn McsRunner) -> Result<ScenarioResult, WhatIfError> {
    if !(cfg.cost_p80_factor > 0.0 && cfg.cost_p80_factor.is_finite()) {
        return Err(WhatIfError::InvalidFactor { op: String::from("cost_p80_factor"), value: cfg.cost_p80_factor });
    }
    let (modified, footprint) = apply_with_footprint(base, s)?;
    let base_d = simulate(base, cfg.seed, cfg.n_trials, runner)?;
    let mod_seed = if s.coupled { cfg.seed } else { cfg.seed ^ stream_key(&s.name) };
    let mod_d = simulate(&modified, mod_seed, cfg.n_trials, runner)?;
    let (bs, ms) = (base_d.sorted_finishes(), mod_d.sorted_finishes());
    let q = |v: &[f64], p: f64| empirical_quantile(v, p);
    let (d50, d80) = match cfg.quantile_mode {
        QuantileMode::DifferenceOfQuantiles => (q(&ms, 0.5) - q(&bs, 0.5), q(&ms, 0.8) - q(&bs, 0.8)),
        QuantileMode::QuantileOfDifferences => {
            let mut diff: Vec<f64> = mod_d.trial_finishes.iter().zip(&base_d.trial_finishes).map(|(m, b)| m - b).collect();
            diff.sort_by(f64::total_cmp);
            (q(&diff, 0.5), q(&diff, 0.8))
        }
    };
    let ld = ledger_delta(&base.ledger, &modified.ledger)?;
    let mut divisions: BTreeSet<String> = footprint.divisions.clone();
    divisions.extend(ld.by_division.keys().cloned());
    Ok(ScenarioResult {
        scenario: s.name.clone(),
        delta_finish_p50: d50,
        delta_finish_p80: d80,
        delta_cost_p50: ld.total,
        delta_cost_p80: ld.total.scale(cfg.cost_p80_factor),
        base_finish_p50: q(&bs, 0.5),
        base_finish_p80: q(&bs, 0.8),
        scenario_finish_p50: q(&ms, 0.5),
        scenario_finish_p80: q(&ms, 0.8),
        affected_divisions: divisions.into_iter().collect(),
        cost_spread_assumed: true,
        notes: String::new(),
        footprint,
        seed: cfg.seed,
        n_trials: cfg.n_trials,
    })
}

/// One bar of a tornado chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TornadoRow {
    pub scenario: String,
    pub delta_finish_p50: f64,
    pub delta_finish_p80: f64,
    pub delta_cost_p50: Money,
}

/// Largest finish impact first; ties by larger cost impact, then name.
pub fn sensitivity_rank(results: &[ScenarioResult]) -> Vec<TornadoRow> {
    let mut rows: Vec<TornadoRow> = results
        .iter()
        .map(|r| TornadoRow {
            scenario: r.scenario.clone(),
            delta_finish_p50: r.delta_finish_p50,
            delta_finish_p80: r.delta_finish_p80,
            delta_cost_p50: r.delta_cost_p50,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.delta_finish_p50
            .total_cmp(&a.delta_finish_p50)
            .then(b.delta_cost_p50.cmp(&a.delta_cost_p50))
            .then_with(|| a.scenario.cmp(&b.scenario))
    });
    rows
}

/// Cost codes mapped to any activity the scenario touched.
pub fn affected_cost_codes(state: &TwinState, footprint: &Footprint) -> BTreeSet<NodeRef> {
    state
        .graph
        .edges()
        .filter(|e| {
            e.from.kind == NodeType::CostCode
                && e.label == "maps_to"
                && e.to.kind == NodeType::Activity
                && footprint.activities.contains(&e.to.id)
        })
        .map(|e| e.from.clone())
        .collect()
}
