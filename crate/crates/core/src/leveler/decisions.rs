//! Weekly recommendations, adopt/reject decisions and overtime reporting.
//!
//! Weeks are numbered from 1 here; the planner works on zero-based indices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::actions::{apply_action, Action};
use super::instance::LevelingInstance;
use super::policy::Policy;
use super::schedule::Plan;
use super::LevelerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adoption {
    Pending,
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub action_id: String,
    pub week: u32,
    pub summary: String,
    pub action: Action,
    pub predicted_delta: f64,
    pub adopted: Adoption,
    #[serde(default)]
    pub rejection_reason: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub recommendation: Recommendation,
    /// Change in objective on the live plan; zero when rejected.
    pub realized_delta: f64,
    pub realized_overtime_delta_hours: f64,
    pub realized_idle_delta_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyOvertime {
    pub week: u32,
    pub baseline_hours: f64,
    pub assisted_hours: f64,
    pub adopted: Adoption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvertimeReport {
    pub weeks: Vec<WeeklyOvertime>,
    pub decided: u32,
    pub adopted: u32,
    /// Adopted over decided, 0 when nothing is decided.
    pub adoption_rate: f64,
    pub baseline_overtime_hours: f64,
    pub assisted_overtime_hours: f64,
    pub overtime_delta_hours: f64,
    pub idle_delta_hours: f64,
    pub baseline_objective: f64,
    pub assisted_objective: f64,
    /// Sum of realized per-week deltas over adopted weeks.
    pub realized_delta_sum: f64,
}

/// A live plan walked week by week under human decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelingSession {
    pub instance: LevelingInstance,
    pub policy: Policy,
    pub baseline: Plan,
    pub current: Plan,
    pending: BTreeMap<u32, Recommendation>,
    log: Vec<DecisionRecord>,
    issued: u32,
}

impl LevelingSession {
    pub fn new(instance: LevelingInstance, policy: Policy, baseline: Plan) -> Self {
        LevelingSession {
            instance,
            policy,
            current: baseline.clone(),
            baseline,
            pending: BTreeMap::new(),
            log: Vec::new(),
            issued: 0,
        }
    }

    pub fn log(&self) -> &[DecisionRecord] {
        &self.log
    }

    pub fn pending(&self, week: u32) -> Option<&Recommendation> {
        self.pending.get(&week)
    }

    fn decided(&self, week: u32) -> bool {
        self.log.iter().any(|r| r.recommendation.week == week)
    }

    /// Issues (or returns the already pending) recommendation for `week`.
    pub fn recommend(&mut self, week: u32) -> Result<Recommendation, LevelerError> {
        if week == 0 {
            return Err(LevelerError::NoRecommendation(week));
        }
        if self.decided(week) {
            return Err(LevelerError::DuplicateDecision(week));
        }
        if let Some(r) = self.pending.get(&week) {
            return Ok(r.clone());
        }
        let p = self.policy.propose(&self.instance, &self.current, week - 1);
        self.issued += 1;
        let r = Recommendation {
            action_id: format!("RL-{:03}", self.issued),
            week,
            summary: p.summary,
            action: p.action,
            predicted_delta: p.predicted_delta,
            adopted: Adoption::Pending,
            rejection_reason: String::new(),
            notes: String::new(),
        };
        self.pending.insert(week, r.clone());
        Ok(r)
    }

    /// Records the decision on the pending recommendation for `week`. Adopted
    /// actions are applied to the live plan.
    pub fn record_decision(&mut self, week: u32, adopted: bool, reason: &str) -> Result<&DecisionRecord, LevelerError> {
        if self.decided(week) {
            return Err(LevelerError::DuplicateDecision(week));
        }
        let mut rec = self.pending.get(&week).cloned().ok_or(LevelerError::NoRecommendation(week))?;
        let reason = reason.trim();
        let (delta, ot, idle) = if adopted {
            let next = apply_action(&self.instance, &self.current, week - 1, &rec.action)?;
            let before = self.current.accounting(&self.instance);
            let after = next.accounting(&self.instance);
            self.current = next;
            rec.adopted = Adoption::Yes;
            (after.objective - before.objective, after.overtime_hours - before.overtime_hours, after.idle_hours - before.idle_hours)
        } else {
            if reason.is_empty() {
                return Err(LevelerError::EmptyRejectionReason(week));
            }
            rec.adopted = Adoption::No;
            rec.rejection_reason = String::from(reason);
            (0.0, 0.0, 0.0)
        };
        if adopted && !reason.is_empty() {
            rec.notes = String::from(reason);
        }
        self.pending.remove(&week);
        self.log.push(DecisionRecord {
            recommendation: rec,
            realized_delta: delta,
            realized_overtime_delta_hours: ot,
            realized_idle_delta_hours: idle,
        });
        Ok(self.log.last().unwrap())
    }

    pub fn overtime_report(&self) -> OvertimeReport {
        overtime_report(&self.instance, &self.baseline, &self.current, &self.log)
    }
}

/// Weekly baseline vs. assisted overtime plus adoption accounting.
pub fn overtime_report(inst: &LevelingInstance, baseline: &Plan, current: &Plan, log: &[DecisionRecord]) -> OvertimeReport {
    let b = baseline.accounting(inst);
    let a = current.accounting(inst);
    let n = b.weekly_overtime_hours.len().max(a.weekly_overtime_hours.len());
    let status: BTreeMap<u32, Adoption> = log.iter().map(|r| (r.recommendation.week, r.recommendation.adopted)).collect();
    let weeks = (0..n)
        .map(|w| WeeklyOvertime {
            week: w as u32 + 1,
            baseline_hours: b.weekly_overtime_hours.get(w).copied().unwrap_or(0.0),
            assisted_hours: a.weekly_overtime_hours.get(w).copied().unwrap_or(0.0),
            adopted: status.get(&(w as u32 + 1)).copied().unwrap_or(Adoption::Pending),
        })
        .collect();
    let decided = log.len() as u32;
    let adopted = log.iter().filter(|r| r.recommendation.adopted == Adoption::Yes).count() as u32;
    OvertimeReport {
        weeks,
        decided,
        adopted,
        adoption_rate: if decided == 0 { 0.0 } else { adopted as f64 / decided as f64 },
        baseline_overtime_hours: b.overtime_hours,
        assisted_overtime_hours: a.overtime_hours,
        overtime_delta_hours: a.overtime_hours - b.overtime_hours,
        idle_delta_hours: a.idle_hours - b.idle_hours,
        baseline_objective: b.objective,
        assisted_objective: a.objective,
        realized_delta_sum: log.iter().map(|r| r.realized_delta).sum(),
    }
}
