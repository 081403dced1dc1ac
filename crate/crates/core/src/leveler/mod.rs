//! Resource leveling: greedy baseline, feasibility-masked actions, a tabular
//! value learner, and the weekly recommendation log.

mod actions;
mod decisions;
mod instance;
mod policy;
mod schedule;
mod synthetic;

use alloc::string::String;

use thiserror::Error;

pub use actions::{apply_action, eligible_tasks, valid_actions, Action, SHIFT_OFFSETS};
pub use decisions::{overtime_report, Adoption, DecisionRecord, LevelingSession, OvertimeReport, Recommendation, WeeklyOvertime};
pub use instance::{LevelTask, LevelingInstance, ObjectiveWeights, ResourcePool, DAYS_PER_WEEK, HOURS_PER_UNIT_DAY};
pub use policy::{median_rollout_objective, train_policy, Policy, PolicyConfig, Proposal, QEntry, StateKey};
pub use schedule::{greedy_baseline, Accounting, Plan, PriorityRule, TaskPlan, Violation};
pub use synthetic::{
    sixteen_week_instance, CALIBRATION_POOL, FIELD_DECISIONS, SYNTHETIC_BASELINE_OVERTIME_HOURS, SYNTHETIC_WEEKS, WEEKLY_OVERTIME_PROFILE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevelerError {
    #[error("objective weights must be finite, non-negative and not all zero")]
    InvalidWeights,
    #[error("resource pool {0} has a negative capacity or rate")]
    InvalidPool(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("task {task} references unknown id {id}")]
    UnknownReference { task: String, id: String },
    #[error("task {0} has an invalid demand")]
    InvalidDemand(String),
    #[error("task {task} demands more {resource} than regular plus overtime capacity")]
    InfeasibleInstance { task: String, resource: String },
    #[error("trade overtime in week {week} exceeds the calibration profile")]
    CalibrationOverflow { week: u32 },
    #[error("precedence cycle")]
    Cycle,
    #[error("action {0:?} is not valid for the current plan")]
    InvalidAction(Action),
    #[error("week {0} already has a decision")]
    DuplicateDecision(u32),
    #[error("rejecting week {0} requires a reason")]
    EmptyRejectionReason(u32),
    #[error("no recommendation pending for week {0}")]
    NoRecommendation(u32),
}
