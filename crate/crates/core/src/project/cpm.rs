//! Deterministic critical-path computation.
//!
//! The forward pass honours all four relation kinds with lags; activities
//! without successors feed an implicit finish milestone. Late dates are
//! bounded by the project finish, so open-ended activities float against it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::calendar::CalendarAxis;
use super::network::{ActivityNetwork, RelationKind};

/// Float at or below this many workdays counts as critical.
pub const FLOAT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpmError {
    #[error("no duration supplied for activity {0:?}")]
    MissingDuration(String),
    #[error("activity {0:?} has a negative or non-finite duration")]
    InvalidDuration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivityTimes {
    pub early_start: f64,
    pub early_finish: f64,
    pub late_start: f64,
    pub late_finish: f64,
    pub total_float: f64,
}

/// A start that came out negative through a negative lag and was held at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampWarning {
    pub activity_id: String,
    pub unclamped_start: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    /// Indexed like the network's activity list.
    pub times: Vec<ActivityTimes>,
    /// Working days from project start to the last early finish.
    pub project_finish: f64,
    /// The same finish on the elapsed axis (exception days included).
    pub finish_elapsed: f64,
    pub critical: Vec<bool>,
    pub warnings: Vec<ClampWarning>,
}

impl ScheduleResult {
    pub fn critical_set<'n>(&self, network: &'n ActivityNetwork) -> BTreeSet<&'n str> {
        self.critical
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| network.activity(i).id.as_str())
            .collect()
    }

    pub fn times_of(&self, network: &ActivityNetwork, id: &str) -> Option<ActivityTimes> {
        network.index_of(id).map(|i| self.times[i])
    }
}

/// Forward and backward pass with caller-owned buffers.
///
/// One kernel per worker lets a Monte-Carlo loop run thousands of passes
/// without allocating.
#[derive(Debug, Clone, Default)]
pub struct CpmKernel {
    es: Vec<f64>,
    ef: Vec<f64>,
    ls: Vec<f64>,
    lf: Vec<f64>,
    clamped: Vec<(usize, f64)>,
}

impl CpmKernel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs both passes and returns the working-time project finish.
    ///
    /// `durations` is indexed like the network and must be non-negative.
    pub fn run(&mut self, network: &ActivityNetwork, durations: &[f64]) -> f64 {
        let n = network.len();
        debug_assert_eq!(durations.len(), n);
        self.es.clear();
        self.es.resize(n, 0.0);
        self.ef.clear();
        self.ef.resize(n, 0.0);
        self.ls.clear();
        self.ls.resize(n, 0.0);
        self.lf.clear();
        self.lf.resize(n, 0.0);
        self.clamped.clear();

        let mut finish: f64 = 0.0;
        for &j in network.topo_order() {
            let d = durations[j];
            let preds = network.predecessors(j);
            let mut start = 0.0;
            if !preds.is_empty() {
                let mut bound = f64::NEG_INFINITY;
                for l in preds {
                    let i = l.other;
                    let c = match l.kind {
                        RelationKind::FS => self.ef[i] + l.lag,
                        RelationKind::SS => self.es[i] + l.lag,
                        RelationKind::FF => self.ef[i] + l.lag - d,
                        RelationKind::SF => self.es[i] + l.lag - d,
                    };
                    if c > bound {
                        bound = c;
                    }
                }
                if bound < 0.0 {
                    self.clamped.push((j, bound));
                } else {
                    start = bound;
                }
            }
            self.es[j] = start;
            self.ef[j] = start + d;
            if self.ef[j] > finish {
                finish = self.ef[j];
            }
        }

        for &i in network.topo_order().iter().rev() {
            let d = durations[i];
            let mut lf = finish;
            for l in network.successors(i) {
                let j = l.other;
                let c = match l.kind {
                    RelationKind::FS => self.ls[j] - l.lag,
                    RelationKind::SS => self.ls[j] - l.lag + d,
                    RelationKind::FF => self.lf[j] - l.lag,
                    RelationKind::SF => self.lf[j] - l.lag + d,
                };
                if c < lf {
                    lf = c;
                }
            }
            self.lf[i] = lf;
            self.ls[i] = lf - d;
        }
        finish
    }

    pub fn total_float(&self, i: usize) -> f64 {
        self.ls[i] - self.es[i]
    }

    pub fn is_critical(&self, i: usize) -> bool {
        libm::fabs(self.total_float(i)) <= FLOAT_EPSILON
    }

    pub fn times(&self, i: usize) -> ActivityTimes {
        ActivityTimes {
            early_start: self.es[i],
            early_finish: self.ef[i],
            late_start: self.ls[i],
            late_finish: self.lf[i],
            total_float: self.total_float(i),
        }
    }

    /// Activities whose start was clamped to zero in the last run.
    pub fn clamped(&self) -> &[(usize, f64)] {
        &self.clamped
    }
}

/// CPM over index-aligned durations. Durations are assumed validated.
pub fn cpm_indexed(network: &ActivityNetwork, durations: &[f64], axis: &CalendarAxis) -> ScheduleResult {
    let mut kernel = CpmKernel::new();
    let finish = kernel.run(network, durations);
    let n = network.len();
    ScheduleResult {
        times: (0..n).map(|i| kernel.times(i)).collect(),
        project_finish: finish,
        finish_elapsed: axis.elapsed(finish),
        critical: (0..n).map(|i| kernel.is_critical(i)).collect(),
        warnings: kernel
            .clamped()
            .iter()
            .map(|&(i, s)| ClampWarning {
                activity_id: network.activity(i).id.clone(),
                unclamped_start: s,
            })
            .collect(),
    }
}

/// CPM with durations keyed by activity id.
pub fn cpm_pass(
    network: &ActivityNetwork,
    durations: &BTreeMap<String, f64>,
    axis: &CalendarAxis,
) -> Result<ScheduleResult, CpmError> {
    let mut d = vec![0.0; network.len()];
    for (i, a) in network.activities().iter().enumerate() {
        let v = *durations
            .get(&a.id)
            .ok_or_else(|| CpmError::MissingDuration(a.id.clone()))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(CpmError::InvalidDuration(a.id.clone()));
        }
        d[i] = v;
    }
    Ok(cpm_indexed(network, &d, axis))
}

/// CPM at every activity's baseline duration.
pub fn cpm_baseline(network: &ActivityNetwork, axis: &CalendarAxis) -> ScheduleResult {
    cpm_indexed(network, &network.baseline_durations(), axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::project::network::{build_network, Activity, PrecedenceRelation};
    use alloc::string::ToString;

    fn net(acts: &[(&str, f64)], rels: Vec<PrecedenceRelation>) -> ActivityNetwork {
        build_network(
            acts.iter().map(|(id, d)| Activity::new(*id, "03", *d)).collect(),
            rels,
        )
        .unwrap()
    }

    fn durations(acts: &[(&str, f64)]) -> BTreeMap<String, f64> {
        acts.iter().map(|(id, d)| (id.to_string(), *d)).collect()
    }

    #[test]
    fn chain_is_fully_critical() {
        let acts = [("A", 2.0), ("B", 3.0)];
        let n = net(&acts, vec![PrecedenceRelation::fs("A", "B")]);
        let r = cpm_pass(&n, &durations(&acts), &CalendarAxis::plain()).unwrap();
        assert_eq!(r.project_finish, 5.0);
        assert!(r.critical.iter().all(|&c| c));
        assert!(r.times.iter().all(|t| t.total_float == 0.0));
    }

    #[test]
    fn parallel_branch_has_float() {
        // Hand pass: A 0-2, B 2-5, C 0-4; finish 5; LS(C) = 1.
        let acts = [("A", 2.0), ("B", 3.0), ("C", 4.0)];
        let n = net(&acts, vec![PrecedenceRelation::fs("A", "B")]);
        let r = cpm_pass(&n, &durations(&acts), &CalendarAxis::plain()).unwrap();
        assert_eq!(r.project_finish, 5.0);
        let c = r.times_of(&n, "C").unwrap();
        assert_eq!((c.early_start, c.early_finish, c.late_start, c.late_finish), (0.0, 4.0, 1.0, 5.0));
        assert_eq!(c.total_float, 1.0);
        assert_eq!(r.critical_set(&n).into_iter().collect::<Vec<_>>(), ["A", "B"]);
    }

    #[test]
    fn zero_duration_single_activity() {
        let acts = [("M", 0.0)];
        let n = net(&acts, vec![]);
        let r = cpm_pass(&n, &durations(&acts), &CalendarAxis::plain()).unwrap();
        assert_eq!(r.project_finish, 0.0);
        assert!(r.critical[0]);
    }

    #[test]
    fn missing_duration_is_named() {
        let n = net(&[("A", 1.0), ("B", 1.0)], vec![]);
        let mut d = BTreeMap::new();
        d.insert("A".to_string(), 1.0);
        assert_eq!(
            cpm_pass(&n, &d, &CalendarAxis::plain()),
            Err(CpmError::MissingDuration("B".to_string()))
        );
    }

    #[test]
    fn all_relation_kinds_with_lags() {
        // A(4) then:
        //   SS+1 -> B(2): ES_B = 1, EF_B = 3
        //   FF+2 -> C(3): EF_C >= 6, ES_C = 3
        //   SF+5 -> D(1): EF_D >= 5, ES_D = 4
        //   FS-1 -> E(2): ES_E = 3, EF_E = 5
        let acts = [("A", 4.0), ("B", 2.0), ("C", 3.0), ("D", 1.0), ("E", 2.0)];
        let n = net(
            &acts,
            vec![
                PrecedenceRelation::new("A", "B", RelationKind::SS, 1.0),
                PrecedenceRelation::new("A", "C", RelationKind::FF, 2.0),
                PrecedenceRelation::new("A", "D", RelationKind::SF, 5.0),
                PrecedenceRelation::new("A", "E", RelationKind::FS, -1.0),
            ],
        );
        let r = cpm_pass(&n, &durations(&acts), &CalendarAxis::plain()).unwrap();
        let es = |id| r.times_of(&n, id).unwrap().early_start;
        assert_eq!([es("A"), es("B"), es("C"), es("D"), es("E")], [0.0, 1.0, 3.0, 4.0, 3.0]);
        assert_eq!(r.project_finish, 6.0);
        // C drives the finish through FF, so A is critical via LF_A = LF_C - 2 = 4.
        assert_eq!(r.critical_set(&n).into_iter().collect::<Vec<_>>(), ["A", "C"]);
        for t in &r.times {
            assert!((t.late_start - t.early_start - (t.late_finish - t.early_finish)).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_lag_start_is_clamped_with_warning() {
        let acts = [("A", 1.0), ("B", 2.0)];
        let n = net(&acts, vec![PrecedenceRelation::new("A", "B", RelationKind::SS, -3.0)]);
        let r = cpm_pass(&n, &durations(&acts), &CalendarAxis::plain()).unwrap();
        assert_eq!(r.times_of(&n, "B").unwrap().early_start, 0.0);
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.warnings[0].activity_id, "B");
        assert_eq!(r.warnings[0].unclamped_start, -3.0);
        assert!(r.times.iter().all(|t| t.total_float >= -FLOAT_EPSILON));
    }

    #[test]
    fn exception_days_push_the_elapsed_finish() {
        use crate::project::calendar::Calendar;
        use chrono::NaiveDate;
        let start = NaiveDate::from_ymd_opt(2025, 1, 6).unwrap();
        let cal = Calendar::standard().with_exceptions([
            NaiveDate::from_ymd_opt(2025, 1, 7).unwrap(),
            NaiveDate::from_ymd_opt(2025, 1, 8).unwrap(),
            NaiveDate::from_ymd_opt(2025, 1, 9).unwrap(),
        ]);
        let acts = [("A", 2.0), ("B", 3.0)];
        let n = net(&acts, vec![PrecedenceRelation::fs("A", "B")]);
        let r = cpm_pass(&n, &durations(&acts), &cal.axis(start)).unwrap();
        assert_eq!(r.project_finish, 5.0);
        assert_eq!(r.finish_elapsed, 8.0);
    }
}
