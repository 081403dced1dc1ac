//! Leveling actions and the feasibility mask.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::instance::{LevelingInstance, DAYS_PER_WEEK};
use super::schedule::{Plan, TaskPlan, Usage};
use super::LevelerError;

/// Start-day offsets offered by `ShiftStart`.
pub const SHIFT_OFFSETS: [i32; 4] = [-2, -1, 1, 2];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Action {
    NoOp,
    /// Move the task's start by whole days.
    ShiftStart { task: String, days: i32 },
    /// Work an extra shift: one day shorter at proportionally higher daily demand.
    AddShift { task: String },
    /// Two crews: double daily demand, half the duration (rounded up).
    SplitCrew { task: String },
    /// Start `task` in the same window as `with`.
    MergeTasks { task: String, with: String },
    /// Reassign the task's demand on `from` to the alternate pool `to`.
    MoveCrew { task: String, from: String, to: String },
}

impl Action {
    pub fn task(&self) -> Option<&str> {
        match self {
            Action::NoOp => None,
            Action::ShiftStart { task, .. }
            | Action::AddShift { task }
            | Action::SplitCrew { task }
            | Action::MergeTasks { task, .. }
            | Action::MoveCrew { task, .. } => Some(task),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Action::NoOp => 0,
            Action::ShiftStart { .. } => 1,
            Action::AddShift { .. } => 2,
            Action::SplitCrew { .. } => 3,
            Action::MergeTasks { .. } => 4,
            Action::MoveCrew { .. } => 5,
        }
    }

    /// Canonical order: no-op first, then by task id, operator, parameters.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        let params = |a: &Action| -> (i32, String, String) {
            match a {
                Action::ShiftStart { days, .. } => (*days, String::new(), String::new()),
                Action::MergeTasks { with, .. } => (0, with.clone(), String::new()),
                Action::MoveCrew { from, to, .. } => (0, from.clone(), to.clone()),
                _ => (0, String::new(), String::new()),
            }
        };
        (self.rank() != 0, self.task(), self.rank(), params(self)).cmp(&(other.rank() != 0, other.task(), other.rank(), params(other)))
    }

    pub fn summary(&self, inst: &LevelingInstance, plan: &Plan) -> String {
        let dur = |t: &str| inst.task_index(t).map(|j| plan.tasks[j].duration).unwrap_or(0);
        match self {
            Action::NoOp => String::from("Hold current plan"),
            Action::ShiftStart { task, days } => {
                let dir = if *days < 0 { "Pull" } else { "Delay" };
                format!("{dir} {task} start by {} d", days.unsigned_abs())
            }
            Action::AddShift { task } => {
                let d = dur(task);
                format!("Add shift to {task} ({d} d -> {} d)", d.saturating_sub(1))
            }
            Action::SplitCrew { task } => format!("Split {task} into two crews ({} d -> {} d)", dur(task), dur(task).div_ceil(2)),
            Action::MergeTasks { task, with } => format!("Merge {task} into the {with} window"),
            Action::MoveCrew { task, from, to } => format!("Move {task} crew from {from} to {to}"),
        }
    }
}

/// Tasks open to recommendations in `week`: unlocked, non-zero duration,
/// starting within the week.
pub fn eligible_tasks(inst: &LevelingInstance, plan: &Plan, week: u32) -> Vec<usize> {
    let (lo, hi) = (week * DAYS_PER_WEEK, (week + 1) * DAYS_PER_WEEK);
    let mut v: Vec<usize> = (0..plan.tasks.len())
        .filter(|&j| {
            let t = &plan.tasks[j];
            !inst.tasks()[j].locked && t.duration > 0 && t.start >= lo && t.start < hi
        })
        .collect();
    v.sort_by(|&a, &b| inst.tasks()[a].id.cmp(&inst.tasks()[b].id));
    v
}

/// The single-task change an action makes, before feasibility checks.
fn candidate(inst: &LevelingInstance, plan: &Plan, week: u32, action: &Action) -> Option<(usize, TaskPlan)> {
    let j = inst.task_index(action.task()?)?;
    if !eligible_tasks(inst, plan, week).contains(&j) {
        return None;
    }
    let cur = &plan.tasks[j];
    let mut next = cur.clone();
    match action {
        Action::NoOp => return None,
        Action::ShiftStart { days, .. } => {
            let s = cur.start as i64 + *days as i64;
            if *days == 0 || s < 0 {
                return None;
            }
            next.start = s as u32;
        }
        Action::AddShift { .. } => {
            if cur.duration < 2 {
                return None;
            }
            let f = cur.duration as f64 / (cur.duration - 1) as f64;
            next.duration -= 1;
            next.demands.iter_mut().for_each(|x| x.1 *= f);
        }
        Action::SplitCrew { .. } => {
            if cur.duration < 2 {
                return None;
            }
            next.duration = cur.duration.div_ceil(2);
            next.demands.iter_mut().for_each(|x| x.1 *= 2.0);
        }
        Action::MergeTasks { with, .. } => {
            let i = inst.task_index(with)?;
            let other = &plan.tasks[i];
            let shares = cur.demands.iter().any(|a| other.demands.iter().any(|b| a.0 == b.0));
            if i == j || !shares || other.start == cur.start || !eligible_tasks(inst, plan, week).contains(&i) {
                return None;
            }
            next.start = other.start;
        }
        Action::MoveCrew { from, to, .. } => {
            let r = inst.pools().iter().position(|p| &p.resource_id == from)?;
            let a = inst.pools().iter().position(|p| &p.resource_id == to)?;
            let declared = inst.ix(j).alternates.iter().any(|(k, alts)| *k == r && alts.contains(&a));
            let slot = next.demands.iter().position(|x| x.0 == r)?;
            if !declared || next.demands.iter().any(|x| x.0 == a) {
                return None;
            }
            next.demands[slot].0 = a;
        }
    }
    Some((j, next))
}

fn feasible(inst: &LevelingInstance, plan: &Plan, usage: &Usage, week: u32, j: usize, next: &TaskPlan) -> bool {
    let floor = (week * DAYS_PER_WEEK) as i64;
    (next.start as i64) >= floor.max(plan.earliest_start(inst, j))
        && (next.finish() as i64) <= plan.latest_finish(inst, j)
        && usage.fits(inst, Some(&plan.tasks[j]), next)
}

fn all_candidates(inst: &LevelingInstance, plan: &Plan, week: u32) -> Vec<Action> {
    let elig = eligible_tasks(inst, plan, week);
    let mut out = Vec::new();
    for &j in &elig {
        let id = &inst.tasks()[j].id;
        for days in SHIFT_OFFSETS {
            out.push(Action::ShiftStart { task: id.clone(), days });
        }
        out.push(Action::AddShift { task: id.clone() });
        out.push(Action::SplitCrew { task: id.clone() });
        for &i in &elig {
            if i != j {
                out.push(Action::MergeTasks { task: id.clone(), with: inst.tasks()[i].id.clone() });
            }
        }
        for (r, alts) in &inst.ix(j).alternates {
            for &a in alts {
                out.push(Action::MoveCrew {
                    task: id.clone(),
                    from: inst.pools()[*r].resource_id.clone(),
                    to: inst.pools()[a].resource_id.clone(),
                });
            }
        }
    }
    out
}

/// Every action that keeps the plan precedence- and capacity-feasible, in
/// canonical order. Always starts with `NoOp`.
pub fn valid_actions(inst: &LevelingInstance, plan: &Plan, week: u32) -> Vec<Action> {
    let usage = Usage::of(inst, plan);
    let mut out = alloc::vec![Action::NoOp];
    for a in all_candidates(inst, plan, week) {
        if let Some((j, next)) = candidate(inst, plan, week, &a) {
            if feasible(inst, plan, &usage, week, j, &next) {
                out.push(a);
            }
        }
    }
    out.sort_by(Action::canonical_cmp);
    out
}

/// Applies a valid action, returning the new plan.
pub fn apply_action(inst: &LevelingInstance, plan: &Plan, week: u32, action: &Action) -> Result<Plan, LevelerError> {
    if *action == Action::NoOp {
        return Ok(plan.clone());
    }
    let usage = Usage::of(inst, plan);
    match candidate(inst, plan, week, action) {
        Some((j, next)) if feasible(inst, plan, &usage, week, j, &next) => {
            let mut p = plan.clone();
            p.tasks[j] = next;
            Ok(p)
        }
        _ => Err(LevelerError::InvalidAction(action.clone())),
    }
}
