//! Sixteen-week mid-rise look-ahead used for benchmarks and demos.
//!
//! Six floors of structure, envelope and interiors share eleven trade pools.
//! Locked tasks on a pool with no regular capacity top each week's baseline
//! overtime up to a fixed profile, so the greedy baseline totals exactly
//! [`SYNTHETIC_BASELINE_OVERTIME_HOURS`].

use alloc::format;
use alloc::vec::Vec;

use super::instance::{LevelTask, LevelingInstance, ObjectiveWeights, ResourcePool, DAYS_PER_WEEK, HOURS_PER_UNIT_DAY};
use super::schedule::{greedy_baseline, PriorityRule};
use super::LevelerError;

pub const SYNTHETIC_WEEKS: u32 = 16;
pub const SYNTHETIC_BASELINE_OVERTIME_HOURS: f64 = 1508.0;
/// Baseline overtime per week, summing to the total above.
pub const WEEKLY_OVERTIME_PROFILE: [u32; 16] = [80, 84, 88, 92, 96, 98, 100, 102, 102, 100, 98, 96, 94, 94, 92, 92];
/// Pool holding the injected overtime.
pub const CALIBRATION_POOL: &str = "ot-carryover";

/// Field decisions for weeks 1..=16: `None` adopts, `Some(reason)` rejects.
pub const FIELD_DECISIONS: [Option<&str>; 16] = [
    Some("Supervisor preference (learning period)"),
    None,
    None,
    Some("Vendor inflexibility"),
    None,
    None,
    None,
    Some("Budget constraint (overtime cap)"),
    None,
    None,
    None,
    None,
    None,
    Some("Tenant noise restriction"),
    None,
    None,
];

const FLOORS: u32 = 6;

fn pools() -> Vec<ResourcePool> {
    [
        ("crane", 1.0, 0.5),
        ("formwork", 2.0, 1.0),
        ("rebar", 2.0, 1.0),
        ("concrete", 1.0, 0.5),
        ("steel", 1.0, 0.5),
        ("glazing", 1.0, 0.5),
        ("electrical", 3.0, 1.0),
        ("mep", 2.0, 1.0),
        ("drywall", 2.0, 1.0),
        ("ceilings", 1.0, 0.5),
        ("painters", 2.0, 1.0),
        ("labour", 2.0, 0.0),
    ]
    .into_iter()
    .map(|(id, reg, ot)| ResourcePool::new(id, reg, ot))
    .collect()
}

fn trade_tasks() -> Vec<LevelTask> {
    let mut v = Vec::new();
    for f in 1..=FLOORS {
        let id = |p: &str| format!("{p}-L{f}");
        let mut frm = LevelTask::new(id("FRM"), 3).demand("formwork", 1.5);
        if f > 1 {
            frm = frm.after(format!("POUR-L{}", f - 1));
        }
        v.push(frm);
        v.push(LevelTask::new(id("RBR"), 2).demand("rebar", 1.5).after(id("FRM")));
        v.push(LevelTask::new(id("POUR"), 1).demand("concrete", 1.0).demand("crane", 0.5).after(id("RBR")));
        let mut strip = LevelTask::new(id("STRIP"), 2).demand("formwork", 1.0).after(id("POUR"));
        strip.predecessors[0].1 = 1;
        v.push(strip);
        v.push(LevelTask::new(id("STL"), 3).demand("steel", 1.0).demand("crane", 0.5).after(id("POUR")));
        v.push(LevelTask::new(id("GLZ"), 4).demand("glazing", 1.0).after(id("STL")));
        v.push(LevelTask::new(id("ELR"), 4).demand("electrical", 2.0).after(id("STRIP")));
        v.push(LevelTask::new(id("DCT"), 3).demand("mep", 1.5).after(id("STRIP")));
        v.push(
            LevelTask::new(id("DWB"), 5)
                .demand("drywall", 1.5)
                .after(id("ELR"))
                .after(id("DCT"))
                .alternate("drywall", "ceilings"),
        );
        v.push(LevelTask::new(id("CLG"), 3).demand("ceilings", 1.0).after(id("DWB")));
        v.push(LevelTask::new(id("PNT"), 4).demand("painters", 1.5).after(id("DWB")).alternate("painters", "drywall"));
        v.push(LevelTask::new(id("DEV"), 2).demand("electrical", 1.0).after(id("CLG")));
    }
    let mut tab = LevelTask::new("TAB", 3).demand("mep", 1.0);
    let mut cln = LevelTask::new("CLEAN", 2).demand("labour", 2.0).after("TAB");
    for f in 1..=FLOORS {
        tab = tab.after(format!("DEV-L{f}"));
        cln = cln.after(format!("PNT-L{f}"));
    }
    v.push(tab);
    v.push(cln);
    v.push(LevelTask::new("PUNCH", 2).demand("mep", 0.5).after("CLEAN"));
    v
}

/// Locked carry-over tasks realizing `hours` of overtime in zero-based `week`.
/// Demands are multiples of 1/8 unit so the hour totals are exact.
fn calibration(week: u32, hours: u32) -> Vec<LevelTask> {
    let unit = 1.0 / HOURS_PER_UNIT_DAY;
    let (per_day, rest) = (hours / DAYS_PER_WEEK, hours % DAYS_PER_WEEK);
    let mut v = Vec::new();
    let release = week * DAYS_PER_WEEK;
    if per_day > 0 {
        v.push(LevelTask::new(format!("OTC-W{:02}", week + 1), DAYS_PER_WEEK).demand(CALIBRATION_POOL, per_day as f64 * unit).released(release).locked());
    }
    if rest > 0 {
        v.push(LevelTask::new(format!("OTC-W{:02}-X", week + 1), 1).demand(CALIBRATION_POOL, rest as f64 * unit).released(release).locked());
    }
    v
}

/// The sixteen-week instance with default objective weights.
pub fn sixteen_week_instance() -> Result<LevelingInstance, LevelerError> {
    let weights = ObjectiveWeights::default();
    let trades = LevelingInstance::new(trade_tasks(), pools(), weights)?;
    let acc = greedy_baseline(&trades, PriorityRule::LatestFinish)?.accounting(&trades);
    let mut tasks = trade_tasks();
    for (w, &target) in WEEKLY_OVERTIME_PROFILE.iter().enumerate() {
        let organic = acc.weekly_overtime_hours.get(w).copied().unwrap_or(0.0);
        let organic_whole = organic as u32;
        if organic != organic_whole as f64 || organic_whole > target {
            return Err(LevelerError::CalibrationOverflow { week: w as u32 + 1 });
        }
        tasks.extend(calibration(w as u32, target - organic_whole));
    }
    let mut pools = pools();
    pools.push(ResourcePool::new(CALIBRATION_POOL, 0.0, 8.0));
    LevelingInstance::new(tasks, pools, weights)
}
