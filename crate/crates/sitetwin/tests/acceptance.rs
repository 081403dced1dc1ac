//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs against the bundled project files and the core directly.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use chrono::{Days, NaiveDate};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use sitetwin::cli::main_with;
use sitetwin::project_file::{load_project, Project};
use sitetwin::runner::ThreadedRunner;
use sitetwin_core::earned_value::{forecast, indices};
use sitetwin_core::leveler::*;
use sitetwin_core::money::round_dp;
use sitetwin_core::progress::{classification_metrics, iou_aggregate, reconcile, support_weighted};
use sitetwin_core::project::{build_network, Activity, CalendarAxis, PrecedenceRelation};
use sitetwin_core::stochastic::{
    bayesian_update, criticality_index, quantile, weekly_forecast_log, DurationPosterior, DurationPrior, Evidence, McsRunner, Simulation,
    DEFAULT_SAMPLES,
};
use sitetwin_core::whatif::{evaluate_with, sensitivity_rank, EvalConfig, Operator, Scenario};
use sitetwin_core::Money;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn dfw() -> Project {
    load_project(&fixture("dfw_midrise.json")).expect("bundled project loads")
}

fn toy() -> Project {
    load_project(&fixture("toy_whatif.json")).expect("bundled project loads")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol + 1e-12, || format!("{what}: {got:.5} vs {want} (tol {tol})"))
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn k(x: i64) -> Money {
    Money::from_thousands(x)
}

fn evm_worked_example() -> Outcome {
    let t = Instant::now();
    let ix = indices(k(100), k(95), k(106));
    let f = forecast(k(100), k(95), k(106)).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(ix.sv == k(-5) && ix.cv == k(-11), || format!("SV {} CV {}", ix.sv, ix.cv))?;
    close(round_dp(ix.spi.unwrap(), 2), 0.95, 0.0, "SPI")?;
    close(round_dp(ix.cpi.unwrap(), 2), 0.90, 0.0, "CPI")?;
    close(round_dp(ix.cpi.unwrap(), 5), 0.89623, 0.0, "CPI exact")?;
    ensure(f.eac_cpi == Money::from_cents(11_157_895), || format!("EAC {}", f.eac_cpi))?;
    ensure((f.eac_cpi - f.eac_work_remaining).cents().abs() <= 1, || "EAC forms disagree".into())?;
    let rounded = f.eac_with_rounded_cpi(k(100), 2).unwrap();
    ensure(rounded.format_thousands(1) == "111.1", || format!("rounded-CPI EAC {}", rounded.format_thousands(1)))?;
    within(elapsed, Duration::from_millis(1), "EVM")?;
    Ok(format!("EAC {} k, annotation {} k, {elapsed:?}", f.eac_cpi.format_thousands(2), rounded.format_thousands(1)))
}

/// Printed monthly metrics: month, SV, CV, SPI, CPI.
const EV_PRINTED: [(&str, i64, i64, f64, f64); 12] = [
    ("2025-01", -1, 0, 0.67, 1.00),
    ("2025-02", 1, -1, 1.13, 0.90),
    ("2025-03", 1, -1, 1.06, 0.94),
    ("2025-04", 2, -4, 1.08, 0.88),
    ("2025-05", 3, -4, 1.08, 0.91),
    ("2025-06", 6, -2, 1.12, 0.97),
    ("2025-07", 2, -4, 1.03, 0.94),
    ("2025-08", -2, -4, 0.97, 0.95),
    ("2025-09", -4, -5, 0.95, 0.94),
    ("2025-10", -5, -6, 0.95, 0.94),
    ("2025-11", -5, -8, 0.95, 0.92),
    ("2025-12", -5, -11, 0.95, 0.90),
];

fn monthly_ev_regression() -> Outcome {
    let p = dfw();
    let t = Instant::now();
    let series = p.ev_series().map_err(|e| e.to_string())?.ok_or("no earned value section")?;
    let elapsed = t.elapsed();
    ensure(series.points.len() == EV_PRINTED.len(), || format!("{} months", series.points.len()))?;
    for (pt, &(month, sv, cv, spi, cpi)) in series.points.iter().zip(&EV_PRINTED) {
        ensure(pt.label == month, || format!("month {} vs {month}", pt.label))?;
        ensure(pt.sv == k(sv) && pt.cv == k(cv), || format!("{month}: SV {} CV {}", pt.sv, pt.cv))?;
        ensure(pt.spi_reported(2) == Some((spi * 100.0).round() as i64), || format!("{month}: SPI {:?}", pt.spi_reported(2)))?;
        ensure(pt.cpi_reported(2) == Some((cpi * 100.0).round() as i64), || format!("{month}: CPI {:?}", pt.cpi_reported(2)))?;
    }
    within(elapsed, Duration::from_millis(10), "monthly EV")?;
    Ok(format!("48 cells match, {elapsed:?}"))
}

/// Printed reconciliation: WBS, delta, delta percent.
const QTY_PRINTED: [(&str, f64, f64); 10] = [
    ("WBS-001", -165.0, -2.01),
    ("WBS-002", 60.0, 2.11),
    ("WBS-003", -8.0, -1.67),
    ("WBS-004", -2.0, -0.56),
    ("WBS-005", -2.0, -1.08),
    ("WBS-006", 12.0, 1.88),
    ("WBS-007", -125.0, -2.45),
    ("WBS-008", 155.0, 1.68),
    ("WBS-009", -25.0, -1.67),
    ("WBS-010", -180.0, -1.53),
];

fn quantity_reconciliation() -> Outcome {
    let p = dfw();
    let q = &p.file.quantities;
    ensure(q.len() == QTY_PRINTED.len(), || format!("{} rows", q.len()))?;
    for (row, &(wbs, d, pct)) in q.iter().zip(&QTY_PRINTED) {
        let r = reconcile(row).map_err(|e| e.to_string())?;
        ensure(row.wbs_id == wbs, || format!("{} vs {wbs}", row.wbs_id))?;
        close(r.delta_qty, d, 0.0, wbs)?;
        close(r.delta_pct_reported(), pct, 0.0, wbs)?;
    }
    Ok("20 values match".into())
}

const CLASS_PRINTED: [(&str, f64, f64, f64); 5] = [
    ("Rebar Placement", 0.888, 0.900, 0.894),
    ("Formwork Stripping", 0.868, 0.890, 0.878),
    ("Drywall Boarding", 0.872, 0.896, 0.884),
    ("MEP Rough-In", 0.905, 0.875, 0.890),
    ("Paint/Finish", 0.936, 0.900, 0.918),
];

fn vision_metrics() -> Outcome {
    let p = dfw();
    let m = p.file.confusion_matrices.first().ok_or("no confusion matrix")?.matrix().map_err(|e| e.to_string())?;
    let r = classification_metrics(&m).map_err(|e| e.to_string())?;
    for (c, &(name, prec, rec, f1)) in r.per_class.iter().zip(&CLASS_PRINTED) {
        ensure(c.class == name, || format!("{} vs {name}", c.class))?;
        // Compared at the printed precision.
        close(round_dp(c.precision, 3), prec, 0.001, name)?;
        close(round_dp(c.recall, 3), rec, 0.001, name)?;
        close(round_dp(c.f1, 3), f1, 0.001, name)?;
    }
    close(round_dp(r.micro_accuracy, 4), 0.8918, 0.0, "micro accuracy")?;
    close(r.micro_accuracy, 0.891, 0.002, "micro accuracy vs printed")?;
    close(r.macro_avg.precision, 0.894, 0.002, "macro precision")?;
    close(r.macro_avg.recall, 0.892, 0.002, "macro recall")?;
    close(r.macro_avg.f1, 0.893, 0.002, "macro F1")?;
    let iou = iou_aggregate(&p.file.iou).map_err(|e| e.to_string())?;
    close(iou.macro_iou, 0.76, 0.005, "macro IoU")?;
    close(iou.micro_iou, 0.77, 0.005, "micro IoU")?;
    Ok(format!(
        "accuracy {:.4}, macro {:.3}/{:.3}/{:.3}, IoU {:.3}/{:.3}",
        r.micro_accuracy, r.macro_avg.precision, r.macro_avg.recall, r.macro_avg.f1, iou.macro_iou, iou.micro_iou
    ))
}

fn division_weighted_averages() -> Outcome {
    let p = dfw();
    let w = support_weighted(&p.file.division_metrics).map_err(|e| e.to_string())?;
    ensure(w.support == 1960, || format!("support {}", w.support))?;
    close(w.precision, 0.905, 0.001, "weighted precision")?;
    close(w.f1, 0.883, 0.005, "weighted F1")?;
    Ok(format!("precision {:.4}, F1 {:.4} (printed 0.883)", w.precision, w.f1))
}

/// Printed cumulative columns: week, cum feeding, cum project, project percent.
const BUFFER_PRINTED: [(u32, f64, f64, f64); 16] = [
    (1, 0.0, 0.0, 0.0),
    (2, 0.0, 0.0, 0.0),
    (3, 0.5, 0.0, 0.0),
    (4, 1.0, 0.0, 0.0),
    (5, 2.0, 0.5, 2.5),
    (6, 2.5, 1.0, 5.0),
    (7, 3.0, 1.5, 7.5),
    (8, 3.5, 2.0, 10.0),
    (9, 4.0, 2.5, 12.5),
    (10, 4.5, 3.0, 15.0),
    (11, 5.5, 3.5, 17.5),
    (12, 6.0, 4.0, 20.0),
    (13, 6.5, 4.5, 22.5),
    (14, 7.0, 5.0, 25.0),
    (15, 7.5, 5.5, 27.5),
    (16, 8.0, 6.0, 30.0),
];

fn buffer_consumption() -> Outcome {
    let p = dfw();
    let b = p.buffer_ledger().map_err(|e| e.to_string())?.ok_or("no buffers section")?;
    ensure(b.entries.len() == BUFFER_PRINTED.len(), || format!("{} weeks", b.entries.len()))?;
    for (e, &(week, cf, cp, pct)) in b.entries.iter().zip(&BUFFER_PRINTED) {
        ensure(e.week == week, || format!("week {} vs {week}", e.week))?;
        close(e.cum_feeding, cf, 1e-9, &format!("week {week} feeding"))?;
        close(e.cum_project, cp, 1e-9, &format!("week {week} project"))?;
        close(round_dp(e.project_pct, 1), pct, 0.0, &format!("week {week} percent"))?;
    }
    close(round_dp(b.project_pct(), 1), 30.0, 0.0, "project buffer used")?;
    close(round_dp(b.feeding_pct(), 1), 53.3, 0.0, "feeding buffer used")?;
    let target = p.file.buffers.as_ref().map_or(35.0, |s| s.project_target_pct);
    ensure(b.project_pct() <= target, || format!("target {target}% not met"))?;
    Ok(format!("project 30.0%, feeding {:.1} d ({:.1}%), target <= {target}% met", b.cum_feeding(), b.feeding_pct()))
}

fn mcs_enumeration() -> Outcome {
    let net = build_network(
        vec![Activity::new("A", "03", 2.0), Activity::new("B", "03", 4.0), Activity::new("C", "03", 4.0)],
        vec![PrecedenceRelation::fs("A", "B")],
    )
    .map_err(|e| e.to_string())?;
    // B in {1, 2, 6}: finish 4, 4 (tie), 8.
    let b = [(1.0, 0.2), (2.0, 0.3), (6.0, 0.5)];
    let mut post = BTreeMap::new();
    post.insert("A".to_string(), DurationPosterior::fixed(2.0));
    post.insert("B".to_string(), DurationPosterior::discrete(&b).map_err(|e| e.to_string())?);
    post.insert("C".to_string(), DurationPosterior::fixed(4.0));
    let exact = |p: f64| {
        let mut acc = 0.0;
        for &(d, w) in &b {
            acc += w;
            if acc >= p - 1e-12 {
                return (2.0f64 + d).max(4.0);
            }
        }
        f64::NAN
    };
    let t = Instant::now();
    let sim = Simulation::new(&net, &post, CalendarAxis::plain(), 42).map_err(|e| e.to_string())?;
    let one = ThreadedRunner::new(1).run(&sim, 100_000).map_err(|e| e.to_string())?;
    let many = ThreadedRunner::new(4).run(&sim, 100_000).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(one == many, || "1 and 4 workers differ".into())?;
    for p in [0.5, 0.8] {
        let q = quantile(&one, p);
        ensure(q >= exact(p - 0.02) && q <= exact(p + 0.02), || format!("P{}: {q}", p * 100.0))?;
    }
    let ci = criticality_index(&one);
    close(ci["B"], 80.0, 2.0, "CI B")?;
    close(ci["C"], 50.0, 2.0, "CI C")?;
    close(ci["A"], ci["B"], 0.0, "CI A")?;
    within(elapsed, Duration::from_secs(2), "two 100k runs")?;
    Ok(format!("P50 {} P80 {}, CI B {:.1}% C {:.1}%, {elapsed:.2?}", quantile(&one, 0.5), quantile(&one, 0.8), ci["B"], ci["C"]))
}

fn bayesian_sanity() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    let priors = (1.0f64..60.0, 0.0f64..1.0, 0.05f64..1.0, 0.05f64..0.95, 0.15f64..0.5, any::<bool>(), any::<u64>());
    let res = runner.run(&priors, |(a, mf, span, pct, shift, up, seed)| {
        let b = a * (1.0 + span) + 1.0;
        let m = a + mf * (b - a);
        let prior = DurationPrior::triangular(a, m, b).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let p = DurationPosterior::from_prior(&prior, "X", seed, DEFAULT_SAMPLES).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let flat = bayesian_update(&p, &Evidence::new("X", 1, pct, 1.0).with_sd(f64::INFINITY)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let drift = p.weights().iter().zip(flat.weights()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(drift <= 1e-9, "flat update moved weights by {drift}");
        // Evidence implying a duration inside the prior range, clearly off the mean.
        let step = shift * (b - a);
        let implied = if up { (p.mean() + step).min(b) } else { (p.mean() - step).max(a) };
        let e = Evidence::new("X", 1, pct, implied * pct);
        let q = bayesian_update(&p, &e).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let (before, after) = ((p.mean() - implied).abs(), (q.mean() - implied).abs());
        prop_assert!(after <= before + 1e-9, "mean {} -> {} for implied {implied}", p.mean(), q.mean());
        Ok(())
    });
    res.map(|_| "100 random priors: flat update is identity, evidence pulls the mean".into()).map_err(|e| e.to_string())
}

fn workday_after(p: &Project, from: NaiveDate, k: u64) -> NaiveDate {
    let mut d = from + Days::new(k);
    while !p.state.calendar.is_workday(d) {
        d = d + Days::new(1);
    }
    d
}

fn scenario_null_and_monotone() -> Outcome {
    let p = toy();
    let runner = ThreadedRunner::new(2);
    let cfg = EvalConfig::new(4000, p.seed);
    let empty = evaluate_with(&p.state, &Scenario::empty("null"), &cfg, &runner).map_err(|e| e.to_string())?;
    ensure(
        empty.delta_finish_p50 == 0.0 && empty.delta_finish_p80 == 0.0 && empty.delta_cost_p50.is_zero() && empty.delta_cost_p80.is_zero(),
        || format!("empty scenario moved: {empty:?}"),
    )?;
    let sim = Simulation::new(&p.state.network, &p.state.posteriors, p.state.axis(), p.seed).map_err(|e| e.to_string())?;
    let base = runner.run(&sim, 4000).map_err(|e| e.to_string())?;
    close(criticality_index(&base)["AHU"], 100.0, 0.0, "AHU criticality")?;
    let late = Scenario::new("late", vec![Operator::DeliveryShift { activities: vec!["AHU".into()], days: 14.0 }]);
    let r = evaluate_with(&p.state, &late, &cfg, &runner).map_err(|e| e.to_string())?;
    close(r.delta_finish_p50, 14.0, 0.1, "AHU +14 d")?;

    let mut tr = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
    let inst = (prop::collection::vec(2.0f64..20.0, 5), prop::collection::vec(0u64..80, 1..4), any::<u64>());
    let res = tr.run(&inst, |(durs, offsets, seed)| {
        let mut f = p.file.clone();
        f.metadata.seed = seed;
        for (a, d) in f.activities.iter_mut().zip(&durs) {
            a.baseline_duration = d.round();
            f.priors.insert(a.id.clone(), DurationPrior::triangular(0.8 * d.round(), d.round(), 1.3 * d.round()).unwrap());
        }
        let q = Project::from_file(f).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let dates = offsets.iter().map(|&o| workday_after(&q, q.file.metadata.start, o)).collect();
        let rain = Scenario::new("rain", vec![Operator::WeatherDays { dates }]);
        let r = evaluate_with(&q.state, &rain, &EvalConfig::new(256, seed), &runner).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(r.delta_finish_p50 >= 0.0 && r.delta_finish_p80 >= 0.0, "{r:?}");
        Ok(())
    });
    res.map_err(|e| e.to_string())?;
    Ok(format!("null exact, AHU +14 d gives {:+.2} d, weather monotone on 100 instances", r.delta_finish_p50))
}

fn sensitivity_ordering() -> Outcome {
    let p = dfw();
    let rows = sensitivity_rank(&p.file.scenario_results);
    let names: Vec<&str> = rows.iter().map(|r| r.scenario.as_str()).collect();
    let at = |i: usize, prefix: &str| names.get(i).is_some_and(|n| n.starts_with(prefix));
    let middle = (at(2, "3 rain") && at(3, "Steel")) || (at(2, "Steel") && at(3, "3 rain"));
    ensure(
        names.len() == 7 && at(0, "Drywall") && at(1, "Late AHU") && middle && at(4, "Crew") && at(5, "Fireproofing") && at(6, "Glazing"),
        || format!("order {names:?}"),
    )?;
    ensure(rows[6].delta_finish_p50 < 0.0, || "glazing is not negative".into())?;
    Ok(names.join(" > "))
}

fn leveler_fuzz_and_benchmark() -> Outcome {
    const POOLS: [&str; 3] = ["crew", "crane", "labour"];
    let task = (0u32..7, prop::collection::vec((0usize..3, 1u8..4), 0..3), prop::collection::vec(any::<prop::sample::Index>(), 0..3), prop::bool::weighted(0.2));
    let spec = (prop::collection::vec((1u8..4, 0u8..3), 3), prop::collection::vec(task, 1..10), any::<bool>(), 0u64..1000);
    let mut tr = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    let t = Instant::now();
    tr.run(&spec, |(caps, tasks, latest, seed)| {
        let pools: Vec<ResourcePool> = POOLS.iter().zip(&caps).map(|(id, &(r, o))| ResourcePool::new(*id, r as f64 * 0.5, o as f64 * 0.5)).collect();
        let tasks: Vec<LevelTask> = tasks
            .iter()
            .enumerate()
            .map(|(j, (d, dem, preds, alt))| {
                let mut t = LevelTask::new(format!("T{j:02}"), *d);
                for &(r, q) in dem {
                    t = t.demand(POOLS[r], (q as f64 * 0.5).min(pools[r].capacity()));
                }
                if j > 0 {
                    for p in preds {
                        let id = format!("T{:02}", p.index(j));
                        if !t.predecessors.iter().any(|x| x.0 == id) {
                            t = t.after(id);
                        }
                    }
                }
                if *alt {
                    t = t.alternate("crew", "labour");
                }
                t
            })
            .collect();
        let inst = LevelingInstance::new(tasks, pools, ObjectiveWeights::default()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let rule = if latest { PriorityRule::LatestFinish } else { PriorityRule::MostTotalSuccessors };
        let mut plan = greedy_baseline(&inst, rule).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(plan.check(&inst).is_ok());
        let policy = train_policy(&inst, &plan, PolicyConfig { episodes: 5, ..Default::default() }, seed);
        for w in 0..policy.horizon_weeks.max(1) {
            let valid = valid_actions(&inst, &plan, w);
            let p = policy.propose(&inst, &plan, w);
            prop_assert!(valid.contains(&p.action));
            plan = apply_action(&inst, &plan, w, &p.action).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(plan.check(&inst).is_ok(), "{:?}", plan.check(&inst));
        }
        Ok(())
    })
    .map_err(|e| format!("fuzz: {e}"))?;
    let fuzz_time = t.elapsed();

    let inst = sixteen_week_instance().map_err(|e| e.to_string())?;
    let greedy = greedy_baseline(&inst, PriorityRule::LatestFinish).map_err(|e| e.to_string())?;
    let acc = greedy.accounting(&inst);
    close(acc.overtime_hours, 1508.0, 0.0, "injected baseline overtime")?;
    let med = median_rollout_objective(&inst, &greedy, PolicyConfig::default(), &[1, 2, 3, 4, 5]);
    ensure(med <= greedy.objective(&inst), || format!("median {med} > greedy {}", greedy.objective(&inst)))?;

    let p = dfw();
    let mut s = p.leveling_session().map_err(|e| e.to_string())?.ok_or("no leveling section")?;
    for (w, d) in FIELD_DECISIONS.iter().enumerate() {
        let week = w as u32 + 1;
        s.recommend(week).map_err(|e| e.to_string())?;
        s.record_decision(week, d.is_none(), d.unwrap_or("")).map_err(|e| e.to_string())?;
    }
    let r = s.overtime_report();
    ensure(r.adopted == 12 && r.decided == 16 && r.adoption_rate == 0.75, || format!("{} of {}", r.adopted, r.decided))?;
    let adopted_sum: f64 = s.log().iter().filter(|d| d.recommendation.adopted == Adoption::Yes).map(|d| d.realized_delta).sum();
    close(adopted_sum, r.assisted_objective - r.baseline_objective, 1e-9, "accounting identity")?;
    s.current.check(&s.instance).map_err(|v| format!("{v:?}"))?;
    Ok(format!(
        "1000 instances feasible ({fuzz_time:.1?}); median {med:.1} <= greedy {:.1}; adoption 75.0%; OT {:.0} -> {:.0} h",
        greedy.objective(&inst),
        r.baseline_overtime_hours,
        r.assisted_overtime_hours
    ))
}

fn forecast_log_replay() -> Outcome {
    let p = dfw();
    let log = weekly_forecast_log(&p.file.forecast_history);
    ensure(log.convergence_week == Some(13), || format!("convergence {:?}", log.convergence_week))?;
    ensure(log.p80_plateau_from == Some(9), || format!("plateau {:?}", log.p80_plateau_from))?;
    let w13 = log.rows.iter().find(|r| r.week == 13).ok_or("no week 13")?;
    close(w13.p50, 128.0, 0.0, "week 13 P50")?;
    ensure(w13.actual.is_none_or(|a| a == 128.0), || "actual differs".into())?;
    ensure(log.rows.iter().filter(|r| r.week >= 9).all(|r| r.p80 == 130.0), || "P80 leaves 130 after week 9".into())?;
    Ok("converges week 13 at 128 d, P80 130 d from week 9".into())
}

fn determinism() -> Outcome {
    let path = fixture("dfw_midrise.json");
    let run = |workers: &str| {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args = ["sitetwin", "simulate", "--seed", "42", "--trials", "20000", "--workers", workers, "--format", "csv", "--project"];
        let code = main_with(args.iter().map(|s| s.to_string()).chain([path.display().to_string()]), &mut out, &mut err);
        (code, out, String::from_utf8_lossy(&err).into_owned())
    };
    let a = run("1");
    ensure(a.0 == 0, || a.2.clone())?;
    let b = run("1");
    let c = run("3");
    ensure(a.1 == b.1, || "repeat run differs".into())?;
    ensure(a.1 == c.1, || "worker count changes the report".into())?;
    Ok(format!("{} bytes identical across 2 runs and 1/3 workers", a.1.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("evm worked example", evm_worked_example),
        ("monthly earned value regression", monthly_ev_regression),
        ("quantity reconciliation regression", quantity_reconciliation),
        ("confusion matrix and IoU derivation", vision_metrics),
        ("division support-weighted averages", division_weighted_averages),
        ("buffer consumption regression", buffer_consumption),
        ("mcs oracle equivalence", mcs_enumeration),
        ("bayesian sanity", bayesian_sanity),
        ("scenario null and monotonicity", scenario_null_and_monotone),
        ("sensitivity ordering", sensitivity_ordering),
        ("leveling feasibility and learner benchmark", leveler_fuzz_and_benchmark),
        ("forecast log replay", forecast_log_replay),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.2?}]", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{:.2?}]", t.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
