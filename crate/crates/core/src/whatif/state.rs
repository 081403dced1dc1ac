//! The project snapshot scenarios operate on.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::kg::KnowledgeGraph;
use super::WhatIfError;
use crate::cost::CostLedger;
use crate::leveler::ResourcePool;
use crate::project::{build_network, Activity, ActivityNetwork, Calendar, CalendarAxis, PrecedenceRelation};
use crate::stochastic::DurationPosterior;

/// Network, calendar, pools, ledger, posteriors and knowledge graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTwin", into = "RawTwin")]
pub struct TwinState {
    pub name: String,
    pub start: NaiveDate,
    pub calendar: Calendar,
    pub network: ActivityNetwork,
    pub pools: Vec<ResourcePool>,
    pub ledger: CostLedger,
    /// One posterior per activity id.
    pub posteriors: BTreeMap<String, DurationPosterior>,
    pub graph: KnowledgeGraph,
}

#[derive(Serialize, Deserialize)]
struct RawTwin {
    name: String,
    start: NaiveDate,
    calendar: Calendar,
    activities: Vec<Activity>,
    relations: Vec<PrecedenceRelation>,
    #[serde(default)]
    pools: Vec<ResourcePool>,
    #[serde(default)]
    ledger: CostLedger,
    posteriors: BTreeMap<String, DurationPosterior>,
    #[serde(default)]
    graph: KnowledgeGraph,
}

impl TryFrom<RawTwin> for TwinState {
    type Error = WhatIfError;
    fn try_from(r: RawTwin) -> Result<Self, Self::Error> {
        let network = build_network(r.activities, r.relations)?;
        TwinState::new(r.name, r.start, r.calendar, network, r.pools, r.ledger, r.posteriors, r.graph)
    }
}

impl From<TwinState> for RawTwin {
    fn from(t: TwinState) -> Self {
        let (activities, relations) = t.network.into_parts();
        RawTwin {
            name: t.name,
            start: t.start,
            calendar: t.calendar,
            activities,
            relations,
            pools: t.pools,
            ledger: t.ledger,
            posteriors: t.posteriors,
            graph: t.graph,
        }
    }
}

impl TwinState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        start: NaiveDate,
        calendar: Calendar,
        network: ActivityNetwork,
        pools: Vec<ResourcePool>,
        ledger: CostLedger,
        posteriors: BTreeMap<String, DurationPosterior>,
        graph: KnowledgeGraph,
    ) -> Result<Self, WhatIfError> {
        let s = TwinState { name: name.into(), start, calendar, network, pools, ledger, posteriors, graph };
        s.validate()?;
        Ok(s)
    }

    /// A state whose posteriors are the fixed baseline durations.
    pub fn deterministic(name: impl Into<String>, start: NaiveDate, calendar: Calendar, network: ActivityNetwork) -> Self {
        let posteriors = network
            .activities()
            .iter()
            .map(|a| (a.id.clone(), DurationPosterior::fixed(a.baseline_duration)))
            .collect();
        TwinState {
            name: name.into(),
            start,
            calendar,
            network,
            pools: Vec::new(),
            ledger: CostLedger::default(),
            posteriors,
            graph: KnowledgeGraph::default(),
        }
    }

    pub fn validate(&self) -> Result<(), WhatIfError> {
        self.calendar.validate().map_err(|e| WhatIfError::Invalid(alloc::format!("{e}")))?;
        for a in self.network.activities() {
            if !self.posteriors.contains_key(&a.id) {
                return Err(WhatIfError::UnknownTarget(a.id.clone()));
            }
        }
        if let Some(id) = self.posteriors.keys().find(|k| self.network.get(k).is_none()) {
            return Err(WhatIfError::UnknownTarget(id.clone()));
        }
        for i in self.ledger.items() {
            if let Some(a) = &i.activity_id {
                if self.network.get(a).is_none() {
                    return Err(WhatIfError::UnknownTarget(a.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn axis(&self) -> CalendarAxis {
        self.calendar.axis(self.start)
    }
}
