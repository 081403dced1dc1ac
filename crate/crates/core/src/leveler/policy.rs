//! Tabular value learner over masked leveling actions.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::actions::{apply_action, eligible_tasks, valid_actions, Action};
use super::instance::{LevelingInstance, DAYS_PER_WEEK};
use super::schedule::{Plan, Usage};
use crate::rng::{stream_key, substream, DOMAIN_POLICY};

/// Usage at or above this share of regular capacity counts as tight.
const TIGHT_SHARE: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub episodes: u32,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig { episodes: 200, epsilon: 0.2, alpha: 0.3, gamma: 0.9 }
    }
}

/// Discretized state: week, per-resource slack bucket, eligible-count bucket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateKey {
    pub week: u32,
    /// Per pool: 0 overtime in use, 1 tight, 2 loose.
    pub slack: Vec<u8>,
    /// Eligible tasks, capped at 3.
    pub eligible: u8,
}

impl StateKey {
    pub fn of(inst: &LevelingInstance, plan: &Plan, week: u32) -> Self {
        let usage = Usage::of(inst, plan);
        let days = week * DAYS_PER_WEEK..(week + 1) * DAYS_PER_WEEK;
        let slack = inst
            .pools()
            .iter()
            .enumerate()
            .map(|(r, p)| {
                let peak = days.clone().map(|d| usage.at(r, d)).fold(0.0, f64::max);
                if peak > p.regular_capacity + 1e-9 {
                    0
                } else if p.regular_capacity > 0.0 && peak >= TIGHT_SHARE * p.regular_capacity {
                    1
                } else {
                    2
                }
            })
            .collect();
        let eligible = eligible_tasks(inst, plan, week).len().min(3) as u8;
        StateKey { week, slack, eligible }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QEntry {
    pub state: StateKey,
    pub action: Action,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct QTable(BTreeMap<StateKey, Vec<(Action, f64)>>);

impl QTable {
    fn get(&self, s: &StateKey, a: &Action) -> f64 {
        self.0.get(s).and_then(|v| v.iter().find(|e| &e.0 == a)).map_or(0.0, |e| e.1)
    }

    fn set(&mut self, s: &StateKey, a: &Action, q: f64) {
        let row = self.0.entry(s.clone()).or_default();
        match row.iter_mut().find(|e| &e.0 == a) {
            Some(e) => e.1 = q,
            None => row.push((a.clone(), q)),
        }
    }

    /// Highest-valued action; ties go to the canonical order (no-op first).
    fn best<'a>(&self, s: &StateKey, actions: &'a [Action]) -> (&'a Action, f64) {
        let mut best = (&actions[0], self.get(s, &actions[0]));
        for a in &actions[1..] {
            let q = self.get(s, a);
            if q > best.1 {
                best = (a, q);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PolicyDoc", into = "PolicyDoc")]
pub struct Policy {
    pub seed: u64,
    pub config: PolicyConfig,
    /// Weeks covered by an episode.
    pub horizon_weeks: u32,
    q: QTable,
}

#[derive(Serialize, Deserialize)]
struct PolicyDoc {
    seed: u64,
    config: PolicyConfig,
    horizon_weeks: u32,
    values: Vec<QEntry>,
}

impl From<PolicyDoc> for Policy {
    fn from(d: PolicyDoc) -> Self {
        let mut q = QTable::default();
        for e in &d.values {
            q.set(&e.state, &e.action, e.value);
        }
        Policy { seed: d.seed, config: d.config, horizon_weeks: d.horizon_weeks, q }
    }
}

impl From<Policy> for PolicyDoc {
    fn from(p: Policy) -> Self {
        let values = p
            .q
            .0
            .into_iter()
            .flat_map(|(state, row)| row.into_iter().map(move |(action, value)| QEntry { state: state.clone(), action, value }))
            .collect();
        PolicyDoc { seed: p.seed, config: p.config, horizon_weeks: p.horizon_weeks, values }
    }
}

/// A proposed action with its exact one-step effect on the plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub week: u32,
    pub action: Action,
    pub summary: alloc::string::String,
    pub value: f64,
    pub predicted_delta: f64,
    pub predicted_overtime_delta_hours: f64,
    pub predicted_idle_delta_hours: f64,
}

impl Policy {
    pub fn q_value(&self, state: &StateKey, action: &Action) -> f64 {
        self.q.get(state, action)
    }

    pub fn entries(&self) -> usize {
        self.q.0.values().map(Vec::len).sum()
    }

    /// Best masked action for `week` (zero-based) on `plan`.
    pub fn propose(&self, inst: &LevelingInstance, plan: &Plan, week: u32) -> Proposal {
        let actions = valid_actions(inst, plan, week);
        let state = StateKey::of(inst, plan, week);
        let (action, value) = self.q.best(&state, &actions);
        let before = plan.accounting(inst);
        let next = apply_action(inst, plan, week, action).expect("masked action applies");
        let after = next.accounting(inst);
        Proposal {
            week,
            action: action.clone(),
            summary: action.summary(inst, plan),
            value,
            predicted_delta: after.objective - before.objective,
            predicted_overtime_delta_hours: after.overtime_hours - before.overtime_hours,
            predicted_idle_delta_hours: after.idle_hours - before.idle_hours,
        }
    }

    /// Plan after adopting every proposal from week 0 through the horizon.
    pub fn rollout(&self, inst: &LevelingInstance, start: &Plan) -> Plan {
        let mut plan = start.clone();
        for w in 0..self.horizon_weeks {
            let p = self.propose(inst, &plan, w);
            plan = apply_action(inst, &plan, w, &p.action).expect("masked action applies");
        }
        plan
    }
}

fn horizon(plan: &Plan) -> u32 {
    plan.makespan().div_ceil(DAYS_PER_WEEK)
}

/// Epsilon-greedy tabular learning from `start`, one action per week,
/// reward = minus the change in objective. Deterministic for a seed.
pub fn train_policy(inst: &LevelingInstance, start: &Plan, config: PolicyConfig, seed: u64) -> Policy {
    let horizon_weeks = horizon(start);
    let mut q = QTable::default();
    let key = stream_key("episode");
    for ep in 0..config.episodes {
        let mut rng = substream(seed, DOMAIN_POLICY, key, ep as u64);
        let mut plan = start.clone();
        let mut obj = plan.objective(inst);
        let mut state = StateKey::of(inst, &plan, 0);
        let mut actions = valid_actions(inst, &plan, 0);
        for w in 0..horizon_weeks {
            let action = if rng.random::<f64>() < config.epsilon {
                actions[rng.random_range(0..actions.len())].clone()
            } else {
                q.best(&state, &actions).0.clone()
            };
            let next = apply_action(inst, &plan, w, &action).expect("masked action applies");
            let next_obj = next.objective(inst);
            let reward = obj - next_obj;
            let (next_state, next_actions, future) = if w + 1 < horizon_weeks {
                let s = StateKey::of(inst, &next, w + 1);
                let a = valid_actions(inst, &next, w + 1);
                let f = q.best(&s, &a).1;
                (s, a, f)
            } else {
                (state.clone(), Vec::new(), 0.0)
            };
            let old = q.get(&state, &action);
            q.set(&state, &action, old + config.alpha * (reward + config.gamma * future - old));
            plan = next;
            obj = next_obj;
            state = next_state;
            actions = next_actions;
        }
    }
    Policy { seed, config, horizon_weeks, q }
}

/// Median of the rollout objectives over several seeds.
pub fn median_rollout_objective(inst: &LevelingInstance, start: &Plan, config: PolicyConfig, seeds: &[u64]) -> f64 {
    let mut v: Vec<f64> = seeds.iter().map(|&s| train_policy(inst, start, config, s).rollout(inst, start).objective(inst)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = v.len();
    if n == 0 {
        return start.objective(inst);
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leveler::instance::{LevelTask, ObjectiveWeights, ResourcePool};
    use crate::leveler::schedule::{greedy_baseline, PriorityRule};
    use alloc::vec;

    /// Crew task B overlaps A on day 0 and runs 4 h of overtime; the crane
    /// task fixes the makespan at 5.
    fn toy() -> (LevelingInstance, Plan) {
        let inst = LevelingInstance::new(
            vec![
                LevelTask::new("A", 2).demand("crew", 1.0),
                LevelTask::new("B", 1).demand("crew", 0.5),
                LevelTask::new("C", 5).demand("crane", 1.0),
            ],
            vec![ResourcePool::new("crew", 1.0, 1.0), ResourcePool::new("crane", 1.0, 0.0)],
            ObjectiveWeights { w_span: 8.0, w_overtime: 1.0, w_idle: 0.0 },
        )
        .unwrap();
        let plan = greedy_baseline(&inst, PriorityRule::LatestFinish).unwrap();
        assert_eq!(plan.accounting(&inst).overtime_hours, 4.0);
        (inst, plan)
    }

    #[test]
    fn untrained_policy_holds() {
        let (inst, plan) = toy();
        let p = train_policy(&inst, &plan, PolicyConfig { episodes: 0, ..Default::default() }, 1);
        assert_eq!(p.entries(), 0);
        let r = p.propose(&inst, &plan, 0);
        assert_eq!(r.action, Action::NoOp);
        assert_eq!(r.predicted_delta, 0.0);
    }

    #[test]
    fn trained_policy_takes_the_overtime_saving_shift() {
        let (inst, plan) = toy();
        for seed in 0..5 {
            let p = train_policy(&inst, &plan, PolicyConfig::default(), seed);
            let r = p.propose(&inst, &plan, 0);
            assert!(matches!(r.action, Action::ShiftStart { .. }), "{:?}", r.action);
            assert_eq!(r.predicted_delta, -4.0 * inst.weights.w_overtime);
            assert_eq!(r.predicted_overtime_delta_hours, -4.0);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (inst, plan) = toy();
        let a = train_policy(&inst, &plan, PolicyConfig::default(), 9);
        let b = train_policy(&inst, &plan, PolicyConfig::default(), 9);
        assert_eq!(a, b);
    }

    #[test]
    fn policy_round_trips_through_serde() {
        let (inst, plan) = toy();
        let p = train_policy(&inst, &plan, PolicyConfig { episodes: 20, ..Default::default() }, 3);
        let doc: PolicyDoc = p.clone().into();
        assert_eq!(Policy::from(doc), p);
    }
}
