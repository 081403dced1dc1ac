//! Scenario operators and their pure application to a twin state.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::state::TwinState;
use super::WhatIfError;
use crate::cost::{CostComponent, CostItem};
use crate::leveler::DAYS_PER_WEEK;
use crate::project::{cpm_indexed, NetworkError, PrecedenceRelation, ScheduleResult};

/// Cost items picked by division code or id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemSelector {
    #[serde(default)]
    pub divisions: Vec<String>,
    #[serde(default)]
    pub items: Vec<String>,
}

impl ItemSelector {
    pub fn division(d: impl Into<String>) -> Self {
        ItemSelector { divisions: alloc::vec![d.into()], items: Vec::new() }
    }

    pub fn items<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Self {
        ItemSelector { divisions: Vec::new(), items: ids.into_iter().map(Into::into).collect() }
    }

    pub fn matches(&self, item: &CostItem) -> bool {
        self.divisions.iter().any(|d| *d == item.csi_division) || self.items.iter().any(|i| *i == item.item_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "edit", rename_all = "snake_case")]
pub enum RelationEdit {
    Add { relation: PrecedenceRelation },
    Remove { predecessor: String, successor: String },
}

fn material_only() -> Vec<CostComponent> {
    alloc::vec![CostComponent::Material]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operator {
    /// Unit-price escalation on the selected items' components.
    PriceMultiplier {
        target: ItemSelector,
        factor: f64,
        #[serde(default = "material_only")]
        components: Vec<CostComponent>,
    },
    /// Late delivery: every duration sample of the activities grows by `days`.
    DeliveryShift { activities: Vec<String>, days: f64 },
    /// Additional non-working dates.
    WeatherDays { dates: Vec<NaiveDate> },
    /// Regular capacity change on a pool over weeks `from_week..=to_week`
    /// (1-based, five working days each). Activities drawing on the pool lose
    /// or gain productivity for the part of their reference window inside
    /// those weeks.
    CapacityChange { resource: String, units: f64, from_week: u32, to_week: u32 },
    /// Quantity change: item costs scale by `factor`; linked activity
    /// durations scale by the cost-weighted share of the change.
    ScopeChange { target: ItemSelector, factor: f64 },
    /// Relation edits; the network must stay acyclic.
    Resequence { edits: Vec<RelationEdit> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub operators: Vec<Operator>,
    /// Reuse the base run's random numbers for the scenario run.
    #[serde(default = "yes")]
    pub coupled: bool,
}

fn yes() -> bool {
    true
}

impl Scenario {
    pub fn new(name: impl Into<String>, operators: Vec<Operator>) -> Self {
        Scenario { name: name.into(), operators, coupled: true }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Scenario::new(name, Vec::new())
    }
}

/// What a scenario touches in the base state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footprint {
    pub activities: BTreeSet<String>,
    pub items: BTreeSet<String>,
    /// Divisions of touched activities and items.
    pub divisions: BTreeSet<String>,
}

/// CPM at posterior-mean durations: the window reference for calendar and
/// capacity operators.
pub fn reference_schedule(state: &TwinState) -> ScheduleResult {
    let d: Vec<f64> = state.network.activities().iter().map(|a| state.posteriors[&a.id].mean()).collect();
    cpm_indexed(&state.network, &d, &state.axis())
}

fn positive(op: &str, f: f64) -> Result<(), WhatIfError> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(WhatIfError::InvalidFactor { op: String::from(op), value: f })
    }
}

fn selected<'a>(state: &'a TwinState, sel: &ItemSelector) -> Result<Vec<&'a CostItem>, WhatIfError> {
    for d in &sel.divisions {
        if !state.ledger.items().iter().any(|i| &i.csi_division == d) {
            return Err(WhatIfError::UnknownTarget(d.clone()));
        }
    }
    for id in &sel.items {
        if state.ledger.get(id).is_none() {
            return Err(WhatIfError::UnknownTarget(id.clone()));
        }
    }
    Ok(state.ledger.items().iter().filter(|i| sel.matches(i)).collect())
}

fn relation_touches(rel: &PrecedenceRelation, fp: &mut Footprint) {
    fp.activities.insert(rel.predecessor.clone());
    fp.activities.insert(rel.successor.clone());
}

/// Applies one operator in place, recording what it touched.
fn apply_operator(state: &mut TwinState, op: &Operator, fp: &mut Footprint) -> Result<(), WhatIfError> {
    match op {
        Operator::PriceMultiplier { target, factor, components } => {
            positive("price_multiplier", *factor)?;
            let ids: Vec<String> = selected(state, target)?.into_iter().map(|i| i.item_id.clone()).collect();
            for item in state.ledger.items_mut().filter(|i| ids.contains(&i.item_id)) {
                item.scale_components(*factor, components);
                fp.items.insert(item.item_id.clone());
            }
        }
        Operator::DeliveryShift { activities, days } => {
            if !days.is_finite() {
                return Err(WhatIfError::InvalidFactor { op: String::from("delivery_shift"), value: *days });
            }
            for id in activities {
                let p = state.posteriors.get_mut(id).ok_or_else(|| WhatIfError::UnknownTarget(id.clone()))?;
                *p = p.shifted(*days);
                fp.activities.insert(id.clone());
            }
        }
        Operator::WeatherDays { dates } => {
            let reference = reference_schedule(state);
            let before = state.axis();
            for d in dates {
                if !state.calendar.is_workday(*d) || *d < state.start {
                    return Err(WhatIfError::InvalidOperator(format!("{d} is not a working day of the project calendar")));
                }
            }
            state.calendar.exceptions.extend(dates.iter().copied());
            let after = state.axis();
            let new_slots: Vec<u64> = after.blocked_slots().iter().copied().filter(|s| !before.blocked_slots().contains(s)).collect();
            // Activities in progress on a lost day (reference elapsed window).
            for (i, t) in reference.times.iter().enumerate() {
                let (s, f) = (before.elapsed(t.early_start), before.elapsed(t.early_finish));
                if new_slots.iter().any(|&k| (k as f64) >= libm::floor(s) && (k as f64) < f) {
                    fp.activities.insert(state.network.activity(i).id.clone());
                }
            }
        }
        Operator::CapacityChange { resource, units, from_week, to_week } => {
            if !units.is_finite() || from_week == &0 || to_week < from_week {
                return Err(WhatIfError::InvalidOperator(format!("capacity_change on {resource}: bad units or week range")));
            }
            let pool = state.pools.iter_mut().find(|p| &p.resource_id == resource).ok_or_else(|| WhatIfError::UnknownTarget(resource.clone()))?;
            let cap = pool.regular_capacity;
            let new_cap = cap + units;
            if !(cap > 0.0 && new_cap > 0.0) {
                return Err(WhatIfError::InvalidFactor { op: String::from("capacity_change"), value: new_cap });
            }
            pool.regular_capacity = new_cap;
            let stretch = cap / new_cap - 1.0;
            let lo = ((from_week - 1) * DAYS_PER_WEEK) as f64;
            let hi = (to_week * DAYS_PER_WEEK) as f64;
            let reference = reference_schedule(state);
            for (i, a) in state.network.activities().iter().enumerate() {
                if !a.resource_demands.get(resource).is_some_and(|u| *u > 0.0) {
                    continue;
                }
                let t = reference.times[i];
                let overlap = (t.early_finish.min(hi) - t.early_start.max(lo)).max(0.0);
                if overlap > 0.0 {
                    let p = state.posteriors.get_mut(&a.id).unwrap();
                    *p = p.shifted(overlap * stretch);
                    fp.activities.insert(a.id.clone());
                }
            }
        }
        Operator::ScopeChange { target, factor } => {
            positive("scope_change", *factor)?;
            let picked: Vec<(String, Option<String>, i64)> =
                selected(state, target)?.into_iter().map(|i| (i.item_id.clone(), i.activity_id.clone(), i.base_cost().cents())).collect();
            let mut linked_total: BTreeMap<String, i64> = BTreeMap::new();
            for i in state.ledger.items() {
                if let Some(a) = &i.activity_id {
                    *linked_total.entry(a.clone()).or_default() += i.base_cost().cents();
                }
            }
            let mut changed: BTreeMap<String, i64> = BTreeMap::new();
            for (_, act, cents) in &picked {
                if let Some(a) = act {
                    *changed.entry(a.clone()).or_default() += cents;
                }
            }
            let all = [CostComponent::Material, CostComponent::Labor, CostComponent::Equipment];
            for item in state.ledger.items_mut().filter(|i| picked.iter().any(|p| p.0 == i.item_id)) {
                item.scale_components(*factor, &all);
                if let Some(h) = item.crew_hours.as_mut() {
                    *h *= factor;
                }
                fp.items.insert(item.item_id.clone());
            }
            for (a, cents) in changed {
                let total = linked_total[&a];
                let share = if total > 0 { cents as f64 / total as f64 } else { 1.0 };
                let p = state.posteriors.get_mut(&a).ok_or_else(|| WhatIfError::UnknownTarget(a.clone()))?;
                *p = p.scaled(1.0 + (factor - 1.0) * share);
                fp.activities.insert(a);
            }
        }
        Operator::Resequence { edits } => {
            let (acts, mut rels) = state.network.clone().into_parts();
            for e in edits {
                match e {
                    RelationEdit::Add { relation } => {
                        relation_touches(relation, fp);
                        rels.push(relation.clone());
                    }
                    RelationEdit::Remove { predecessor, successor } => {
                        let before = rels.len();
                        rels.retain(|r| !(&r.predecessor == predecessor && &r.successor == successor));
                        if rels.len() == before {
                            return Err(WhatIfError::UnknownTarget(format!("{predecessor}->{successor}")));
                        }
                        fp.activities.insert(predecessor.clone());
                        fp.activities.insert(successor.clone());
                    }
                }
            }
            state.network = state.network.rebuild(acts, rels).map_err(|e| match e {
                NetworkError::Cycle(ids) => WhatIfError::AcyclicityViolation(ids),
                NetworkError::DanglingReference(id) => WhatIfError::UnknownTarget(id),
                other => WhatIfError::Network(other),
            })?;
        }
    }
    Ok(())
}

/// Applies every operator in order to a copy of `base`.
pub fn apply_scenario(base: &TwinState, s: &Scenario) -> Result<TwinState, WhatIfError> {
    Ok(apply_with_footprint(base, s)?.0)
}

/// As [`apply_scenario`], also returning what the scenario touched.
pub fn apply_with_footprint(base: &TwinState, s: &Scenario) -> Result<(TwinState, Footprint), WhatIfError> {
    let mut state = base.clone();
    let mut fp = Footprint::default();
    for op in &s.operators {
        apply_operator(&mut state, op, &mut fp)?;
    }
    for a in &fp.activities {
        if let Some(act) = state.network.get(a) {
            fp.divisions.insert(act.csi_division.clone());
        }
    }
    for i in &fp.items {
        if let Some(item) = state.ledger.get(i) {
            fp.divisions.insert(item.csi_division.clone());
        }
    }
    Ok((state, fp))
}
