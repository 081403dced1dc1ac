//! Activities, precedence relations, and the validated activity network.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csi;

/// One schedulable unit of work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub wbs_code: String,
    pub csi_division: String,
    /// Workdays; the deterministic (single-point) duration.
    pub baseline_duration: f64,
    /// Resource id to units per day.
    #[serde(default)]
    pub resource_demands: BTreeMap<String, f64>,
    #[serde(default)]
    pub vendor_ids: Vec<String>,
    #[serde(default)]
    pub crew_ids: Vec<String>,
}

impl Activity {
    pub fn new(id: impl Into<String>, csi_division: impl Into<String>, baseline_duration: f64) -> Self {
        Activity {
            id: id.into(),
            description: String::new(),
            wbs_code: String::new(),
            csi_division: csi_division.into(),
            baseline_duration,
            resource_demands: BTreeMap::new(),
            vendor_ids: Vec::new(),
            crew_ids: Vec::new(),
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn with_wbs(mut self, wbs: impl Into<String>) -> Self {
        self.wbs_code = wbs.into();
        self
    }

    pub fn with_demand(mut self, resource: impl Into<String>, units: f64) -> Self {
        self.resource_demands.insert(resource.into(), units);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    /// Finish-to-start.
    FS,
    /// Start-to-start.
    SS,
    /// Finish-to-finish.
    FF,
    /// Start-to-finish.
    SF,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecedenceRelation {
    pub predecessor: String,
    pub successor: String,
    #[serde(default = "default_kind")]
    pub kind: RelationKind,
    /// Workdays; may be negative.
    #[serde(default)]
    pub lag: f64,
}

fn default_kind() -> RelationKind {
    RelationKind::FS
}

impl PrecedenceRelation {
    pub fn fs(predecessor: impl Into<String>, successor: impl Into<String>) -> Self {
        Self::new(predecessor, successor, RelationKind::FS, 0.0)
    }

    pub fn new(
        predecessor: impl Into<String>,
        successor: impl Into<String>,
        kind: RelationKind,
        lag: f64,
    ) -> Self {
        PrecedenceRelation {
            predecessor: predecessor.into(),
            successor: successor.into(),
            kind,
            lag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("duplicate activity id {0:?}")]
    DuplicateId(String),
    #[error("relation references unknown activity {0:?}")]
    DanglingReference(String),
    #[error("activity {0:?} cannot precede itself")]
    SelfLoop(String),
    #[error("precedence cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("activity {id:?} has an invalid baseline duration")]
    InvalidDuration { id: String },
    #[error("activity {id:?} has unknown CSI division {division:?}")]
    UnknownDivision { id: String, division: String },
    #[error("relation {predecessor:?} -> {successor:?} has a non-finite lag")]
    InvalidLag { predecessor: String, successor: String },
}

/// An adjacency entry: the activity at the other end plus the relation data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub other: usize,
    pub kind: RelationKind,
    pub lag: f64,
}

/// A validated, acyclic activity network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityNetwork {
    activities: Vec<Activity>,
    relations: Vec<PrecedenceRelation>,
    index: BTreeMap<String, usize>,
    topo: Vec<usize>,
    preds: Vec<Vec<Link>>,
    succs: Vec<Vec<Link>>,
}

/// Validates activities and relations and computes a topological order.
///
/// The order is deterministic: among ready activities the one listed first
/// is emitted first.
pub fn build_network(
    activities: Vec<Activity>,
    relations: Vec<PrecedenceRelation>,
) -> Result<ActivityNetwork, NetworkError> {
    let mut index = BTreeMap::new();
    for (i, a) in activities.iter().enumerate() {
        if !(a.baseline_duration.is_finite() && a.baseline_duration >= 0.0) {
            return Err(NetworkError::InvalidDuration { id: a.id.clone() });
        }
        if !csi::is_known_division(&a.csi_division) {
            return Err(NetworkError::UnknownDivision {
                id: a.id.clone(),
                division: a.csi_division.clone(),
            });
        }
        if index.insert(a.id.clone(), i).is_some() {
            return Err(NetworkError::DuplicateId(a.id.clone()));
        }
    }

    let n = activities.len();
    let mut preds: Vec<Vec<Link>> = vec![Vec::new(); n];
    let mut succs: Vec<Vec<Link>> = vec![Vec::new(); n];
    for r in &relations {
        let p = *index
            .get(&r.predecessor)
            .ok_or_else(|| NetworkError::DanglingReference(r.predecessor.clone()))?;
        let s = *index
            .get(&r.successor)
            .ok_or_else(|| NetworkError::DanglingReference(r.successor.clone()))?;
        if p == s {
            return Err(NetworkError::SelfLoop(r.predecessor.clone()));
        }
        if !r.lag.is_finite() {
            return Err(NetworkError::InvalidLag {
                predecessor: r.predecessor.clone(),
                successor: r.successor.clone(),
            });
        }
        succs[p].push(Link { other: s, kind: r.kind, lag: r.lag });
        preds[s].push(Link { other: p, kind: r.kind, lag: r.lag });
    }

    let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        topo.push(i);
        for l in &succs[i] {
            indegree[l.other] -= 1;
            if indegree[l.other] == 0 {
                ready.push(Reverse(l.other));
            }
        }
    }
    if topo.len() < n {
        let cycle = find_cycle(&succs, &indegree);
        return Err(NetworkError::Cycle(
            cycle.into_iter().map(|i| activities[i].id.clone()).collect(),
        ));
    }

    Ok(ActivityNetwork { activities, relations, index, topo, preds, succs })
}

/// Finds one cycle among the activities Kahn's algorithm could not release.
fn find_cycle(succs: &[Vec<Link>], indegree: &[usize]) -> Vec<usize> {
    let n = succs.len();
    let stuck: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    for root in (0..n).filter(|&i| stuck[i]) {
        if state[root] != 0 {
            continue;
        }
        stack.push((root, 0));
        path.push(root);
        state[root] = 1;
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            if let Some(link) = succs[node].get(top.1) {
                top.1 += 1;
                let m = link.other;
                if !stuck[m] {
                    continue;
                }
                match state[m] {
                    0 => {
                        state[m] = 1;
                        stack.push((m, 0));
                        path.push(m);
                    }
                    1 => {
                        let start = path.iter().position(|&p| p == m).unwrap_or(0);
                        return path[start..].to_vec();
                    }
                    _ => {}
                }
            } else {
                state[node] = 2;
                stack.pop();
                path.pop();
            }
        }
    }
    Vec::new()
}

impl ActivityNetwork {
    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }

    pub fn activities(&self) -> &[Activity] {
        &self.activities
    }

    pub fn activity(&self, i: usize) -> &Activity {
        &self.activities[i]
    }

    pub fn relations(&self) -> &[PrecedenceRelation] {
        &self.relations
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Activity> {
        self.index_of(id).map(|i| &self.activities[i])
    }

    /// Activity indices in precedence order.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn predecessors(&self, i: usize) -> &[Link] {
        &self.preds[i]
    }

    pub fn successors(&self, i: usize) -> &[Link] {
        &self.succs[i]
    }

    /// Activities without successors; they all feed the implicit finish.
    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.succs[i].is_empty())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.activities.iter().map(|a| a.id.as_str())
    }

    /// Baseline durations indexed like the activity list.
    pub fn baseline_durations(&self) -> Vec<f64> {
        self.activities.iter().map(|a| a.baseline_duration).collect()
    }

    /// Rebuilds the network with replacement parts, revalidating everything.
    pub fn rebuild(
        &self,
        activities: Vec<Activity>,
        relations: Vec<PrecedenceRelation>,
    ) -> Result<ActivityNetwork, NetworkError> {
        build_network(activities, relations)
    }

    pub fn into_parts(self) -> (Vec<Activity>, Vec<PrecedenceRelation>) {
        (self.activities, self.relations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn acts(ids: &[&str]) -> Vec<Activity> {
        ids.iter().map(|id| Activity::new(*id, "03", 1.0)).collect()
    }

    #[test]
    fn chain_topo_order() {
        let net = build_network(
            acts(&["C", "A", "B"]),
            vec![PrecedenceRelation::fs("A", "B"), PrecedenceRelation::fs("B", "C")],
        )
        .unwrap();
        let order: Vec<&str> = net.topo_order().iter().map(|&i| net.activity(i).id.as_str()).collect();
        assert_eq!(order, ["A", "B", "C"]);
    }

    #[test]
    fn two_cycle_is_named() {
        let err = build_network(
            acts(&["A", "B"]),
            vec![PrecedenceRelation::fs("A", "B"), PrecedenceRelation::fs("B", "A")],
        )
        .unwrap_err();
        match err {
            NetworkError::Cycle(mut ids) => {
                ids.sort();
                assert_eq!(ids, ["A", "B"]);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn longer_cycle_behind_a_tail() {
        let err = build_network(
            acts(&["S", "A", "B", "C", "D"]),
            vec![
                PrecedenceRelation::fs("S", "A"),
                PrecedenceRelation::fs("A", "B"),
                PrecedenceRelation::fs("B", "C"),
                PrecedenceRelation::fs("C", "A"),
                PrecedenceRelation::fs("C", "D"),
            ],
        )
        .unwrap_err();
        let NetworkError::Cycle(ids) = err else { panic!() };
        let mut ids = ids;
        ids.sort();
        assert_eq!(ids, ["A", "B", "C"]);
    }

    #[test]
    fn dangling_and_duplicate() {
        let err = build_network(acts(&["A"]), vec![PrecedenceRelation::fs("A", "Z")]).unwrap_err();
        assert_eq!(err, NetworkError::DanglingReference("Z".to_string()));
        let err = build_network(acts(&["A", "A"]), vec![]).unwrap_err();
        assert_eq!(err, NetworkError::DuplicateId("A".to_string()));
        let err = build_network(acts(&["A"]), vec![PrecedenceRelation::fs("A", "A")]).unwrap_err();
        assert_eq!(err, NetworkError::SelfLoop("A".to_string()));
    }

    #[test]
    fn rejects_bad_activity_fields() {
        let err = build_network(vec![Activity::new("A", "99", 1.0)], vec![]).unwrap_err();
        assert!(matches!(err, NetworkError::UnknownDivision { .. }));
        let err = build_network(vec![Activity::new("A", "03", -1.0)], vec![]).unwrap_err();
        assert!(matches!(err, NetworkError::InvalidDuration { .. }));
    }
}
