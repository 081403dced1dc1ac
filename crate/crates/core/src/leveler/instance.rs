//! Leveling problem definition: integer-day tasks, resource pools, weights.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LevelerError;
use crate::project::ActivityNetwork;

/// Working days per look-ahead week.
pub const DAYS_PER_WEEK: u32 = 5;
/// Hours in one unit-day of resource use.
pub const HOURS_PER_UNIT_DAY: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourcePool {
    pub resource_id: String,
    /// Units per day available at regular time.
    pub regular_capacity: f64,
    /// Additional units per day available at overtime.
    pub overtime_cap: f64,
    /// Cost weight of one overtime hour on this resource.
    #[serde(default = "unit_weight")]
    pub overtime_rate_weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl ResourcePool {
    pub fn new(id: impl Into<String>, regular: f64, overtime: f64) -> Self {
        ResourcePool { resource_id: id.into(), regular_capacity: regular, overtime_cap: overtime, overtime_rate_weight: 1.0 }
    }

    pub fn capacity(&self) -> f64 {
        self.regular_capacity + self.overtime_cap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTask {
    pub id: String,
    /// Whole working days.
    pub duration: u32,
    /// Resource id to units per day.
    #[serde(default)]
    pub demands: BTreeMap<String, f64>,
    /// Finish-to-start predecessors with a whole-day lag.
    #[serde(default)]
    pub predecessors: Vec<(String, i32)>,
    /// Earliest start day.
    #[serde(default)]
    pub release: u32,
    /// Resources that may stand in for a demanded resource.
    #[serde(default)]
    pub alternates: BTreeMap<String, Vec<String>>,
    /// Excluded from recommendations.
    #[serde(default)]
    pub locked: bool,
}

impl LevelTask {
    pub fn new(id: impl Into<String>, duration: u32) -> Self {
        LevelTask {
            id: id.into(),
            duration,
            demands: BTreeMap::new(),
            predecessors: Vec::new(),
            release: 0,
            alternates: BTreeMap::new(),
            locked: false,
        }
    }

    pub fn demand(mut self, resource: impl Into<String>, units: f64) -> Self {
        self.demands.insert(resource.into(), units);
        self
    }

    pub fn after(mut self, predecessor: impl Into<String>) -> Self {
        self.predecessors.push((predecessor.into(), 0));
        self
    }

    pub fn released(mut self, day: u32) -> Self {
        self.release = day;
        self
    }

    pub fn alternate(mut self, resource: impl Into<String>, alt: impl Into<String>) -> Self {
        self.alternates.entry(resource.into()).or_default().push(alt.into());
        self
    }

    pub fn locked(mut self) -> Self {
        self.locked = true;
        self
    }
}

/// `w_span * makespan + w_overtime * weighted overtime hours + w_idle * idle hours`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub w_span: f64,
    pub w_overtime: f64,
    pub w_idle: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { w_span: 8.0, w_overtime: 1.0, w_idle: 0.25 }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<(), LevelerError> {
        let w = [self.w_span, self.w_overtime, self.w_idle];
        if w.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || w.iter().all(|x| *x == 0.0) {
            return Err(LevelerError::InvalidWeights);
        }
        Ok(())
    }
}

/// Index-resolved form of a task.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TaskIx {
    pub demands: Vec<(usize, f64)>,
    pub preds: Vec<(usize, i32)>,
    pub succs: Vec<(usize, i32)>,
    pub alternates: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct LevelingInstance {
    tasks: Vec<LevelTask>,
    pools: Vec<ResourcePool>,
    pub weights: ObjectiveWeights,
    #[serde(skip)]
    ix: Vec<TaskIx>,
    #[serde(skip)]
    order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    tasks: Vec<LevelTask>,
    pools: Vec<ResourcePool>,
    #[serde(default)]
    weights: ObjectiveWeights,
}

impl TryFrom<RawInstance> for LevelingInstance {
    type Error = LevelerError;
    fn try_from(r: RawInstance) -> Result<Self, Self::Error> {
        LevelingInstance::new(r.tasks, r.pools, r.weights)
    }
}

impl From<LevelingInstance> for RawInstance {
    fn from(i: LevelingInstance) -> Self {
        RawInstance { tasks: i.tasks, pools: i.pools, weights: i.weights }
    }
}

impl LevelingInstance {
    pub fn new(tasks: Vec<LevelTask>, pools: Vec<ResourcePool>, weights: ObjectiveWeights) -> Result<Self, LevelerError> {
        weights.validate()?;
        let mut pool_ix = BTreeMap::new();
        for (k, p) in pools.iter().enumerate() {
            if !(p.regular_capacity >= 0.0 && p.overtime_cap >= 0.0 && p.overtime_rate_weight >= 0.0) {
                return Err(LevelerError::InvalidPool(p.resource_id.clone()));
            }
            if pool_ix.insert(p.resource_id.clone(), k).is_some() {
                return Err(LevelerError::DuplicateId(p.resource_id.clone()));
            }
        }
        let mut task_ix = BTreeMap::new();
        for (k, t) in tasks.iter().enumerate() {
            if task_ix.insert(t.id.clone(), k).is_some() {
                return Err(LevelerError::DuplicateId(t.id.clone()));
            }
        }
        let resolve_pool = |t: &LevelTask, r: &str| {
            pool_ix.get(r).copied().ok_or_else(|| LevelerError::UnknownReference { task: t.id.clone(), id: String::from(r) })
        };
        let mut ix: Vec<TaskIx> = Vec::with_capacity(tasks.len());
        for t in &tasks {
            let mut demands = Vec::new();
            for (r, &u) in &t.demands {
                if !(u >= 0.0 && u.is_finite()) {
                    return Err(LevelerError::InvalidDemand(t.id.clone()));
                }
                let k = resolve_pool(t, r)?;
                if u > pools[k].capacity() + 1e-9 {
                    return Err(LevelerError::InfeasibleInstance { task: t.id.clone(), resource: r.clone() });
                }
                if u > 0.0 {
                    demands.push((k, u));
                }
            }
            let mut preds = Vec::new();
            for (p, lag) in &t.predecessors {
                let k = *task_ix
                    .get(p)
                    .ok_or_else(|| LevelerError::UnknownReference { task: t.id.clone(), id: p.clone() })?;
                preds.push((k, *lag));
            }
            let mut alternates = Vec::new();
            for (r, alts) in &t.alternates {
                let k = resolve_pool(t, r)?;
                let alts = alts.iter().map(|a| resolve_pool(t, a)).collect::<Result<Vec<_>, _>>()?;
                alternates.push((k, alts));
            }
            ix.push(TaskIx { demands, preds, succs: Vec::new(), alternates });
        }
        for j in 0..ix.len() {
            for (i, lag) in ix[j].preds.clone() {
                ix[i].succs.push((j, lag));
            }
        }
        let order = topo(&ix).ok_or(LevelerError::Cycle)?;
        Ok(LevelingInstance { tasks, pools, weights, ix, order })
    }

    /// Integer-day instance from a network: durations rounded up, every
    /// relation treated as finish-to-start with its lag rounded up.
    pub fn from_network(network: &ActivityNetwork, pools: Vec<ResourcePool>, weights: ObjectiveWeights) -> Result<Self, LevelerError> {
        let known: BTreeSet<&str> = pools.iter().map(|p| p.resource_id.as_str()).collect();
        let tasks = network
            .activities()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut t = LevelTask::new(a.id.clone(), libm::ceil(a.baseline_duration) as u32);
                for (r, &u) in &a.resource_demands {
                    if known.contains(r.as_str()) {
                        t.demands.insert(r.clone(), u);
                    }
                }
                for l in network.predecessors(i) {
                    t.predecessors.push((network.activity(l.other).id.clone(), libm::ceil(l.lag) as i32));
                }
                t
            })
            .collect();
        LevelingInstance::new(tasks, pools, weights)
    }

    pub fn tasks(&self) -> &[LevelTask] {
        &self.tasks
    }

    pub fn pools(&self) -> &[ResourcePool] {
        &self.pools
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub(crate) fn ix(&self, j: usize) -> &TaskIx {
        &self.ix[j]
    }

    pub(crate) fn topo_order(&self) -> &[usize] {
        &self.order
    }

    /// Count of transitive successors per task.
    pub fn successor_counts(&self) -> Vec<usize> {
        let n = self.tasks.len();
        let mut reach: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); n];
        for &i in self.order.iter().rev() {
            let mut s = BTreeSet::new();
            for &(j, _) in &self.ix[i].succs {
                s.insert(j);
                s.extend(reach[j].iter().copied());
            }
            reach[i] = s;
        }
        reach.iter().map(BTreeSet::len).collect()
    }
}

fn topo(ix: &[TaskIx]) -> Option<Vec<usize>> {
    let n = ix.len();
    let mut indeg: Vec<usize> = ix.iter().map(|t| t.preds.len()).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &(j, _) in &ix[i].succs {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.insert(j);
            }
        }
    }
    (order.len() == n).then_some(order)
}
