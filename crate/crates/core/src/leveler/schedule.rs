//! Day-grid schedules, overtime/idle accounting and the serial greedy scheduler.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::{LevelingInstance, DAYS_PER_WEEK, HOURS_PER_UNIT_DAY};
use super::LevelerError;

const CAP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPlan {
    pub start: u32,
    pub duration: u32,
    /// Pool index and units per day.
    pub demands: Vec<(usize, f64)>,
}

impl TaskPlan {
    pub fn finish(&self) -> u32 {
        self.start + self.duration
    }
}

/// A start day, duration and resource assignment for every task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub tasks: Vec<TaskPlan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Precedence { predecessor: String, successor: String },
    Release { task: String },
    Capacity { resource: String, day: u32, usage: f64, capacity: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accounting {
    pub makespan: u32,
    pub overtime_hours: f64,
    /// Overtime hours times each pool's rate weight.
    pub weighted_overtime_hours: f64,
    pub idle_hours: f64,
    pub weekly_overtime_hours: Vec<f64>,
    pub weekly_idle_hours: Vec<f64>,
    pub objective: f64,
}

/// Resource-by-day usage grid.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Usage {
    pub grid: Vec<Vec<f64>>,
}

impl Usage {
    pub fn of(inst: &LevelingInstance, plan: &Plan) -> Self {
        let horizon = plan.makespan() as usize;
        let mut grid = alloc::vec![alloc::vec![0.0; horizon]; inst.pools().len()];
        for t in &plan.tasks {
            for &(r, u) in &t.demands {
                for d in t.start..t.finish() {
                    grid[r][d as usize] += u;
                }
            }
        }
        Usage { grid }
    }

    pub fn at(&self, r: usize, day: u32) -> f64 {
        self.grid[r].get(day as usize).copied().unwrap_or(0.0)
    }

    fn add(&mut self, t: &TaskPlan) {
        for &(r, u) in &t.demands {
            let row = &mut self.grid[r];
            if row.len() < t.finish() as usize {
                row.resize(t.finish() as usize, 0.0);
            }
            for d in t.start..t.finish() {
                row[d as usize] += u;
            }
        }
    }

    /// Whether `new` fits when `old` (the task's current plan, if any) is lifted.
    pub fn fits(&self, inst: &LevelingInstance, old: Option<&TaskPlan>, new: &TaskPlan) -> bool {
        for &(r, u) in &new.demands {
            let cap = inst.pools()[r].capacity();
            for d in new.start..new.finish() {
                let mut used = self.at(r, d);
                if let Some(o) = old {
                    if d >= o.start && d < o.finish() {
                        used -= o.demands.iter().filter(|x| x.0 == r).map(|x| x.1).sum::<f64>();
                    }
                }
                if used + u > cap + CAP_EPS {
                    return false;
                }
            }
        }
        true
    }
}

impl Plan {
    pub fn makespan(&self) -> u32 {
        self.tasks.iter().map(TaskPlan::finish).max().unwrap_or(0)
    }

    /// Earliest start allowed by predecessors and release.
    pub(crate) fn earliest_start(&self, inst: &LevelingInstance, j: usize) -> i64 {
        let mut s = inst.tasks()[j].release as i64;
        for &(i, lag) in &inst.ix(j).preds {
            s = s.max(self.tasks[i].finish() as i64 + lag as i64);
        }
        s
    }

    /// Latest finish allowed by successors' current starts.
    pub(crate) fn latest_finish(&self, inst: &LevelingInstance, j: usize) -> i64 {
        let mut f = i64::MAX;
        for &(k, lag) in &inst.ix(j).succs {
            f = f.min(self.tasks[k].start as i64 - lag as i64);
        }
        f
    }

    pub fn check(&self, inst: &LevelingInstance) -> Result<(), Violation> {
        let tasks = inst.tasks();
        for (j, t) in self.tasks.iter().enumerate() {
            if t.start < tasks[j].release {
                return Err(Violation::Release { task: tasks[j].id.clone() });
            }
            for &(i, lag) in &inst.ix(j).preds {
                if (t.start as i64) < self.tasks[i].finish() as i64 + lag as i64 {
                    return Err(Violation::Precedence { predecessor: tasks[i].id.clone(), successor: tasks[j].id.clone() });
                }
            }
        }
        let usage = Usage::of(inst, self);
        for (r, row) in usage.grid.iter().enumerate() {
            let cap = inst.pools()[r].capacity();
            for (d, &u) in row.iter().enumerate() {
                if u > cap + CAP_EPS {
                    return Err(Violation::Capacity {
                        resource: inst.pools()[r].resource_id.clone(),
                        day: d as u32,
                        usage: u,
                        capacity: cap,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn accounting(&self, inst: &LevelingInstance) -> Accounting {
        let usage = Usage::of(inst, self);
        let makespan = self.makespan();
        let weeks = makespan.div_ceil(DAYS_PER_WEEK) as usize;
        let mut weekly_ot = alloc::vec![0.0; weeks];
        let mut weekly_idle = alloc::vec![0.0; weeks];
        let mut weighted = 0.0;
        for (r, pool) in inst.pools().iter().enumerate() {
            let mut active = alloc::vec![false; weeks];
            for t in &self.tasks {
                if t.duration > 0 && t.demands.iter().any(|x| x.0 == r) {
                    for w in t.start / DAYS_PER_WEEK..=(t.finish() - 1) / DAYS_PER_WEEK {
                        active[w as usize] = true;
                    }
                }
            }
            for w in 0..weeks {
                for d in w as u32 * DAYS_PER_WEEK..(w as u32 + 1) * DAYS_PER_WEEK {
                    let u = usage.at(r, d);
                    let over = u - pool.regular_capacity;
                    if over > CAP_EPS {
                        let h = over * HOURS_PER_UNIT_DAY;
                        weekly_ot[w] += h;
                        weighted += h * pool.overtime_rate_weight;
                    } else if active[w] && -over > CAP_EPS {
                        weekly_idle[w] += -over * HOURS_PER_UNIT_DAY;
                    }
                }
            }
        }
        let overtime_hours = weekly_ot.iter().sum();
        let idle_hours = weekly_idle.iter().sum();
        let w = inst.weights;
        Accounting {
            makespan,
            overtime_hours,
            weighted_overtime_hours: weighted,
            idle_hours,
            objective: w.w_span * makespan as f64 + w.w_overtime * weighted + w.w_idle * idle_hours,
            weekly_overtime_hours: weekly_ot,
            weekly_idle_hours: weekly_idle,
        }
    }

    pub fn objective(&self, inst: &LevelingInstance) -> f64 {
        self.accounting(inst).objective
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorityRule {
    /// Smallest unconstrained late finish first.
    LatestFinish,
    /// Most transitive successors first.
    MostTotalSuccessors,
}

/// Unconstrained late finish of every task against the unconstrained makespan.
fn late_finishes(inst: &LevelingInstance) -> Vec<i64> {
    let n = inst.tasks().len();
    let mut ef = alloc::vec![0i64; n];
    for &j in inst.topo_order() {
        let mut s = inst.tasks()[j].release as i64;
        for &(i, lag) in &inst.ix(j).preds {
            s = s.max(ef[i] + lag as i64);
        }
        ef[j] = s + inst.tasks()[j].duration as i64;
    }
    let end = ef.iter().copied().max().unwrap_or(0);
    let mut lf = alloc::vec![end; n];
    for &i in inst.topo_order().iter().rev() {
        for &(j, lag) in &inst.ix(i).succs {
            lf[i] = lf[i].min(lf[j] - inst.tasks()[j].duration as i64 - lag as i64);
        }
    }
    lf
}

/// Serial schedule-generation scheme: repeatedly place the best eligible task
/// at its earliest precedence- and capacity-feasible day.
pub fn greedy_baseline(inst: &LevelingInstance, rule: PriorityRule) -> Result<Plan, LevelerError> {
    let n = inst.tasks().len();
    let lf = late_finishes(inst);
    let succ = inst.successor_counts();
    let key = |j: usize| -> (i64, &str) {
        let p = match rule {
            PriorityRule::LatestFinish => lf[j],
            PriorityRule::MostTotalSuccessors => -(succ[j] as i64),
        };
        (p, inst.tasks()[j].id.as_str())
    };
    let mut placed: Vec<Option<TaskPlan>> = alloc::vec![None; n];
    let mut usage = Usage { grid: alloc::vec![Vec::new(); inst.pools().len()] };
    for _ in 0..n {
        let j = (0..n)
            .filter(|&j| placed[j].is_none() && inst.ix(j).preds.iter().all(|&(i, _)| placed[i].is_some()))
            .min_by(|&a, &b| key(a).cmp(&key(b)))
            .ok_or(LevelerError::Cycle)?;
        let mut start = inst.tasks()[j].release as i64;
        for &(i, lag) in &inst.ix(j).preds {
            start = start.max(placed[i].as_ref().unwrap().finish() as i64 + lag as i64);
        }
        let mut cand = TaskPlan { start: start.max(0) as u32, duration: inst.tasks()[j].duration, demands: inst.ix(j).demands.clone() };
        while !usage.fits(inst, None, &cand) {
            cand.start += 1;
        }
        usage.add(&cand);
        placed[j] = Some(cand);
    }
    Ok(Plan { tasks: placed.into_iter().map(Option::unwrap).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leveler::instance::{LevelTask, ObjectiveWeights, ResourcePool};
    use alloc::vec;

    #[test]
    fn chain_with_ample_capacity() {
        let inst = LevelingInstance::new(
            vec![
                LevelTask::new("A", 3).demand("crew", 1.0),
                LevelTask::new("B", 2).demand("crew", 1.0).after("A"),
                LevelTask::new("C", 4).demand("crew", 1.0).after("B"),
            ],
            vec![ResourcePool::new("crew", 5.0, 0.0)],
            ObjectiveWeights::default(),
        )
        .unwrap();
        let plan = greedy_baseline(&inst, PriorityRule::LatestFinish).unwrap();
        let acc = plan.accounting(&inst);
        assert_eq!(acc.makespan, 9);
        assert_eq!(acc.overtime_hours, 0.0);
        assert!(plan.check(&inst).is_ok());
    }

    #[test]
    fn single_crew_serializes() {
        let inst = LevelingInstance::new(
            vec![LevelTask::new("A", 3).demand("crew", 1.0), LevelTask::new("B", 4).demand("crew", 1.0)],
            vec![ResourcePool::new("crew", 1.0, 0.0)],
            ObjectiveWeights::default(),
        )
        .unwrap();
        for rule in [PriorityRule::LatestFinish, PriorityRule::MostTotalSuccessors] {
            let plan = greedy_baseline(&inst, rule).unwrap();
            assert_eq!(plan.makespan(), 7);
            assert!(plan.check(&inst).is_ok());
        }
    }

    #[test]
    fn overtime_and_idle_hours() {
        // Two tasks overlap on days 0-1 at 1.5 units against regular 1.
        let inst = LevelingInstance::new(
            vec![LevelTask::new("A", 2).demand("crew", 1.0), LevelTask::new("B", 3).demand("crew", 0.5)],
            vec![ResourcePool::new("crew", 1.0, 1.0)],
            ObjectiveWeights { w_span: 1.0, w_overtime: 1.0, w_idle: 1.0 },
        )
        .unwrap();
        let plan = greedy_baseline(&inst, PriorityRule::LatestFinish).unwrap();
        let acc = plan.accounting(&inst);
        assert_eq!(acc.overtime_hours, 8.0);
        // Day 2: 0.5 unit idle; days 3-4 of the active week: 1 unit idle each.
        assert_eq!(acc.idle_hours, 4.0 + 16.0);
        assert_eq!(acc.objective, 3.0 + 8.0 + 20.0);
    }

    #[test]
    fn demand_above_capacity_is_infeasible() {
        let r = LevelingInstance::new(
            vec![LevelTask::new("A", 2).demand("crew", 3.0)],
            vec![ResourcePool::new("crew", 1.0, 1.0)],
            ObjectiveWeights::default(),
        );
        assert!(matches!(r, Err(LevelerError::InfeasibleInstance { .. })));
    }

    #[test]
    fn violations_are_reported() {
        let inst = LevelingInstance::new(
            vec![LevelTask::new("A", 2).demand("crew", 1.0), LevelTask::new("B", 1).demand("crew", 1.0).after("A")],
            vec![ResourcePool::new("crew", 1.0, 0.0)],
            ObjectiveWeights::default(),
        )
        .unwrap();
        let mut plan = greedy_baseline(&inst, PriorityRule::LatestFinish).unwrap();
        plan.tasks[1].start = 1;
        assert!(matches!(plan.check(&inst), Err(Violation::Precedence { .. })));
    }
}
