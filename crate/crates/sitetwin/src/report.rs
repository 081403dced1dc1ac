//! Tabular reports with a seed and input-hash header, rendered as aligned
//! text or CSV.
//!
//! Every rendering starts with three comment lines:
//!
//! ```text
//! # report: <kind>
//! # seed: <u64>
//! # input_sha256: <64 hex digits>
//! ```
//!
//! followed by the column header row and data rows. Summary notes follow
//! the rows as `# key: value` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;

use sitetwin_core::earned_value::{forecast, EvSeries};
use sitetwin_core::leveler::{Adoption, DecisionRecord, OvertimeReport};
use sitetwin_core::money::{format_dp, format_fixed, format_scaled};
use sitetwin_core::progress::{
    reconcile, ClassificationReport, DivisionMetrics, IouEntry, IouSummary, ProgressError, WbsQuantity, WeightedSummary,
};
use sitetwin_core::project::{ActivityNetwork, ScheduleResult};
use sitetwin_core::stochastic::{
    criticality_index, empirical_quantile, BufferLedger, DurationPosterior, FinishDistribution, ForecastLog,
};
use sitetwin_core::whatif::{Operator, RelationEdit, Scenario, ScenarioResult, TornadoRow};
use sitetwin_core::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Header {
    pub seed: u64,
    pub input_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Summary lines after the rows, in insertion order.
    pub notes: Vec<(String, String)>,
}

impl Report {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Report { kind: kind.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self, h: &Header, format: Format) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# report: {}", self.kind);
        let _ = writeln!(out, "# seed: {}", h.seed);
        let _ = writeln!(out, "# input_sha256: {}", h.input_hash);
        match format {
            Format::Table => self.render_table(&mut out),
            Format::Csv => self.render_csv(&mut out),
        }
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }

    fn render_table(&self, out: &mut String) {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let right: Vec<bool> = (0..self.columns.len())
            .map(|j| j > 0 && !self.rows.is_empty() && self.rows.iter().all(|r| r.get(j).is_none_or(|c| numeric(c) || c == "n/a")))
            .collect();
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let pad = w - c.chars().count();
                if !right[i] {
                    s.push_str(c);
                    s.extend(std::iter::repeat_n(' ', pad));
                } else {
                    s.extend(std::iter::repeat_n(' ', pad));
                    s.push_str(c);
                }
            }
            s.truncate(s.trim_end().len());
            s
        };
        let _ = writeln!(out, "{}", line(&self.columns));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
    }

    fn render_csv(&self, out: &mut String) {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells"));
    }
}

fn numeric(s: &str) -> bool {
    !s.is_empty() && s.trim_start_matches(['-', '+']).chars().all(|c| c.is_ascii_digit() || c == '.' || c == '%')
}

/// Money in thousands at `dp` decimals.
pub fn k(m: Money, dp: u32) -> String {
    m.format_thousands(dp)
}

fn opt_k(m: Option<Money>, dp: u32) -> String {
    m.map_or_else(|| "n/a".into(), |m| k(m, dp))
}

fn signed(x: f64, dp: u32) -> String {
    let s = format_dp(x, dp);
    if x > 0.0 && !s.chars().all(|c| c == '0' || c == '.') {
        format!("+{s}")
    } else {
        s
    }
}

/// Earned-value table in the monthly metrics column order, optionally cut
/// after the first `upto` periods. Amounts in thousands.
pub fn ev_report(series: &EvSeries, upto: Option<usize>) -> Report {
    let mut r = Report::new("ev", &["month", "pv_k", "ev_k", "ac_k", "sv_k", "cv_k", "spi", "cpi", "eac_k", "vac_k"]);
    let n = upto.unwrap_or(series.points.len()).min(series.points.len());
    for p in &series.points[..n] {
        r.row(vec![
            p.label.clone(),
            k(p.pv, 2),
            k(p.ev, 2),
            k(p.ac, 2),
            k(p.sv, 2),
            k(p.cv, 2),
            p.spi_reported(2).map_or_else(|| "n/a".into(), |v| format_fixed(v, 2)),
            p.cpi_reported(2).map_or_else(|| "n/a".into(), |v| format_fixed(v, 2)),
            opt_k(p.eac, 2),
            opt_k(p.vac, 2),
        ]);
    }
    r.note("bac_k", k(series.bac, 2));
    if let Some(p) = series.points[..n].last() {
        r.note("as_of", p.label.clone());
        if let Ok(f) = forecast(series.bac, p.ev, p.ac) {
            r.note("cpi_exact", format_dp(f.cpi, 5));
            r.note("eac_k", k(f.eac_cpi, 2));
            r.note("eac_remaining_work_k", k(f.eac_work_remaining, 2));
            if let Some(e) = f.eac_with_rounded_cpi(series.bac, 2) {
                r.note("eac_with_cpi_rounded_to_2dp_k", k(e, 1));
            }
        }
    }
    r
}

/// Weekly forecast history with convergence flags.
pub fn forecast_report(log: &ForecastLog) -> Report {
    let mut r = Report::new("forecast", &["week", "p50_d", "p80_d", "actual_d", "notes"]);
    for e in &log.rows {
        r.row(vec![
            e.week.to_string(),
            format_dp(e.p50, 1),
            format_dp(e.p80, 1),
            e.actual.map_or_else(String::new, |a| format_dp(a, 1)),
            e.note.clone(),
        ]);
    }
    let wk = |w: Option<u32>| w.map_or_else(|| "none".into(), |w| w.to_string());
    r.note("convergence_week", wk(log.convergence_week));
    r.note("p80_plateau_from_week", wk(log.p80_plateau_from));
    r.note("spread_non_increasing", log.spread_non_increasing.to_string());
    r
}

/// Finish percentiles of one simulation.
pub fn simulation_report(d: &FinishDistribution) -> Report {
    let sorted = d.sorted_finishes();
    let mut r = Report::new("simulate", &["statistic", "value_d"]);
    for (name, p) in [("p10", 0.1), ("p50", 0.5), ("p80", 0.8), ("p90", 0.9)] {
        r.row(vec![name.into(), format_dp(empirical_quantile(&sorted, p), 3)]);
    }
    r.row(vec!["mean".into(), format_dp(d.mean(), 3)]);
    r.row(vec!["min".into(), format_dp(sorted[0], 3)]);
    r.row(vec!["max".into(), format_dp(sorted[sorted.len() - 1], 3)]);
    r.note("trials", d.n_trials.to_string());
    r
}

/// Criticality index and posterior duration statistics, most critical first.
pub fn criticality_report(
    network: &ActivityNetwork,
    posteriors: &BTreeMap<String, DurationPosterior>,
    d: &FinishDistribution,
) -> Report {
    let ci = criticality_index(d);
    let mut rows: Vec<(&str, f64)> = ci.iter().map(|(id, c)| (id.as_str(), *c)).collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let mut r = Report::new("criticality", &["activity_id", "description", "criticality_pct", "mean_d", "sd_d"]);
    for (id, c) in rows {
        let desc = network.get(id).map_or("", |a| a.description.as_str());
        let post = &posteriors[id];
        r.row(vec![id.into(), desc.into(), format_dp(c, 1), format_dp(post.mean(), 1), format_dp(post.sd(), 1)]);
    }
    r.note("trials", d.n_trials.to_string());
    r
}

/// Weekly buffer consumption with the project-buffer health target.
pub fn buffers_report(b: &BufferLedger, target_pct: f64) -> Report {
    let mut r = Report::new(
        "buffers",
        &["week", "feeding_delta_d", "project_delta_d", "cum_feeding_d", "cum_project_d", "project_used_pct", "feeding_used_pct"],
    );
    for e in &b.entries {
        r.row(vec![
            e.week.to_string(),
            format_dp(e.feeding_delta, 1),
            format_dp(e.project_delta, 1),
            format_dp(e.cum_feeding, 1),
            format_dp(e.cum_project, 1),
            format_dp(e.project_pct, 1),
            format_dp(e.feeding_pct, 1),
        ]);
    }
    r.note("feeding_buffer", format!("{} of {} d ({}%)", format_dp(b.cum_feeding(), 1), format_dp(b.feeding_size, 1), format_dp(b.feeding_pct(), 1)));
    r.note("project_buffer", format!("{} of {} d ({}%)", format_dp(b.cum_project(), 1), format_dp(b.project_size, 1), format_dp(b.project_pct(), 1)));
    r.note("project_target_met", format!("{} (use <= {}%)", b.project_pct() <= target_pct + 1e-9, format_dp(target_pct, 1)));
    r.note("overruns", b.overruns.len().to_string());
    r
}

fn adoption(a: Adoption) -> &'static str {
    match a {
        Adoption::Yes => "Yes",
        Adoption::No => "No",
        Adoption::Pending => "Pending",
    }
}

/// Recommendation log in the field-review column order, then accounting.
pub fn leveling_report(log: &[DecisionRecord], ot: &OvertimeReport) -> Report {
    let mut r = Report::new(
        "leveling",
        &["week", "action_id", "recommendation", "adopted", "reason_if_rejected", "notes", "predicted_delta", "realized_delta"],
    );
    let mut log: Vec<&DecisionRecord> = log.iter().collect();
    log.sort_by_key(|d| d.recommendation.week);
    for d in log {
        let rec = &d.recommendation;
        r.row(vec![
            rec.week.to_string(),
            rec.action_id.clone(),
            rec.summary.clone(),
            adoption(rec.adopted).into(),
            if rec.rejection_reason.is_empty() { "-".into() } else { rec.rejection_reason.clone() },
            rec.notes.clone(),
            format_dp(rec.predicted_delta, 2),
            format_dp(d.realized_delta, 2),
        ]);
    }
    r.note("adoption", format!("{} of {} ({}%)", ot.adopted, ot.decided, format_dp(100.0 * ot.adoption_rate, 1)));
    r.note("baseline_overtime_h", format_dp(ot.baseline_overtime_hours, 1));
    r.note("assisted_overtime_h", format_dp(ot.assisted_overtime_hours, 1));
    r.note("overtime_delta_h", format_dp(ot.overtime_delta_hours, 1));
    r.note("idle_delta_h", format_dp(ot.idle_delta_hours, 1));
    r.note("objective_delta", format_dp(ot.assisted_objective - ot.baseline_objective, 2));
    r.note("realized_delta_sum", format_dp(ot.realized_delta_sum, 2));
    r
}

/// Weekly baseline against assisted overtime.
pub fn overtime_report(ot: &OvertimeReport) -> Report {
    let mut r = Report::new("overtime", &["week", "baseline_h", "assisted_h", "adopted"]);
    for w in &ot.weeks {
        r.row(vec![w.week.to_string(), format_dp(w.baseline_hours, 1), format_dp(w.assisted_hours, 1), adoption(w.adopted).into()]);
    }
    r
}

fn join<T: AsRef<str>>(v: &[T]) -> String {
    v.iter().map(AsRef::as_ref).collect::<Vec<_>>().join("+")
}

/// Short human description of an operator's inputs.
pub fn describe_operator(op: &Operator) -> String {
    match op {
        Operator::PriceMultiplier { target, factor, .. } => {
            format!("unit price x{} on {}", format_dp(*factor, 3), join(&[target.divisions.clone(), target.items.clone()].concat()))
        }
        Operator::DeliveryShift { activities, days } => format!("{} {} d", join(activities), signed(*days, 1)),
        Operator::WeatherDays { dates } => format!("{} weather day(s)", dates.len()),
        Operator::CapacityChange { resource, units, from_week, to_week } => {
            format!("{resource} {} units wk {from_week}-{to_week}", signed(*units, 1))
        }
        Operator::ScopeChange { target, factor } => {
            format!("scope x{} on {}", format_dp(*factor, 3), join(&[target.divisions.clone(), target.items.clone()].concat()))
        }
        Operator::Resequence { edits } => {
            let e: Vec<String> = edits
                .iter()
                .map(|e| match e {
                    RelationEdit::Add { relation } => format!("add {}->{}", relation.predecessor, relation.successor),
                    RelationEdit::Remove { predecessor, successor } => format!("drop {predecessor}->{successor}"),
                })
                .collect();
            e.join(", ")
        }
    }
}

pub fn describe_scenario(s: &Scenario) -> String {
    s.operators.iter().map(describe_operator).collect::<Vec<_>>().join("; ")
}

/// Scenario deltas in the results column order. Cost in thousands.
pub fn scenario_report(results: &[ScenarioResult], scenarios: &[Scenario]) -> Report {
    let mut r = Report::new(
        "whatif",
        &["scenario", "key_inputs", "affected_divisions", "d_finish_p50_d", "d_finish_p80_d", "d_cost_p50_k", "d_cost_p80_k", "notes"],
    );
    for res in results {
        let inputs = scenarios.iter().find(|s| s.name == res.scenario).map(describe_scenario).unwrap_or_default();
        let mut notes = res.notes.clone();
        if res.cost_spread_assumed {
            if !notes.is_empty() {
                notes.push_str("; ");
            }
            notes.push_str("p80 cost from fixed spread");
        }
        r.row(vec![
            res.scenario.clone(),
            inputs,
            res.affected_divisions.join(" "),
            signed(res.delta_finish_p50, 1),
            signed(res.delta_finish_p80, 1),
            k(res.delta_cost_p50, 1),
            k(res.delta_cost_p80, 1),
            notes,
        ]);
    }
    if let Some(first) = results.first() {
        r.note("trials", first.n_trials.to_string());
    }
    r
}

/// Sensitivity ranking, largest finish impact first.
pub fn rank_report(rows: &[TornadoRow]) -> Report {
    let mut r = Report::new("rank", &["rank", "scenario", "d_finish_p50_d", "d_finish_p80_d", "d_cost_p50_k"]);
    for (i, t) in rows.iter().enumerate() {
        r.row(vec![(i + 1).to_string(), t.scenario.clone(), signed(t.delta_finish_p50, 1), signed(t.delta_finish_p80, 1), k(t.delta_cost_p50, 1)]);
    }
    r
}

/// Deterministic early/late dates and float.
pub fn cpm_report(network: &ActivityNetwork, s: &ScheduleResult) -> Report {
    let mut r = Report::new("cpm", &["activity_id", "duration_d", "es", "ef", "ls", "lf", "total_float", "critical"]);
    for (i, t) in s.times.iter().enumerate() {
        let a = network.activity(i);
        r.row(vec![
            a.id.clone(),
            format_dp(a.baseline_duration, 3),
            format_dp(t.early_start, 3),
            format_dp(t.early_finish, 3),
            format_dp(t.late_start, 3),
            format_dp(t.late_finish, 3),
            format_dp(t.total_float, 3),
            if s.critical[i] { "yes".into() } else { "no".into() },
        ]);
    }
    r.note("finish_working_d", format_dp(s.project_finish, 3));
    r.note("finish_elapsed_d", format_dp(s.finish_elapsed, 3));
    for w in &s.warnings {
        r.note("clamped", format!("{} (unclamped start {})", w.activity_id, format_dp(w.unclamped_start, 3)));
    }
    r
}

/// Per-class precision, recall and F1 with macro and micro rows.
pub fn classification_table(name: &str, c: &ClassificationReport) -> Report {
    let mut r = Report::new("metrics", &["class", "precision", "recall", "f1", "support"]);
    for m in &c.per_class {
        r.row(vec![m.class.clone(), format_dp(m.precision, 3), format_dp(m.recall, 3), format_dp(m.f1, 3), m.support.to_string()]);
    }
    r.row(vec!["Macro-average".into(), format_dp(c.macro_avg.precision, 3), format_dp(c.macro_avg.recall, 3), format_dp(c.macro_avg.f1, 3), c.total.to_string()]);
    let acc = format_dp(c.micro_accuracy, 3);
    r.row(vec!["Micro / Overall Accuracy".into(), acc.clone(), acc.clone(), acc, c.total.to_string()]);
    r.note("matrix", name);
    r.note("micro_accuracy_exact", format_dp(c.micro_accuracy, 4));
    r.note("trace_over_total", format!("{}/{}", c.trace, c.total));
    r
}

/// Per-class IoU with unweighted and support-weighted means.
pub fn iou_table(entries: &[IouEntry], s: &IouSummary) -> Report {
    let mut r = Report::new("iou", &["class", "iou", "support_kpx"]);
    for e in entries {
        r.row(vec![e.class.clone(), format_dp(e.iou, 2), format_dp(e.support_px, 0)]);
    }
    r.row(vec!["Macro-average".into(), format_dp(s.macro_iou, 2), "-".into()]);
    r.row(vec!["Micro / Overall".into(), format_dp(s.micro_iou, 2), format_dp(s.total_support, 0)]);
    r.note("macro_iou_exact", format_dp(s.macro_iou, 4));
    r.note("micro_iou_exact", format_dp(s.micro_iou, 4));
    r
}

/// Division-level mapping metrics with the support-weighted row.
pub fn division_table(rows: &[DivisionMetrics], w: &WeightedSummary) -> Report {
    let mut r = Report::new("mapping", &["division", "support", "precision", "recall", "f1", "avg_review_min"]);
    for d in rows {
        r.row(vec![
            d.division.clone(),
            d.support.to_string(),
            format_dp(d.precision, 2),
            format_dp(d.recall, 2),
            format_dp(d.f1, 2),
            format_dp(d.mean_review_minutes, 1),
        ]);
    }
    r.row(vec![
        "Weighted average (by support)".into(),
        w.support.to_string(),
        format_dp(w.precision, 3),
        format_dp(w.recall, 3),
        format_dp(w.f1, 3),
        format_dp(w.mean_review_minutes, 1),
    ]);
    r
}

/// Planned against measured quantities by WBS.
pub fn quantity_table(q: &[WbsQuantity]) -> Result<Report, ProgressError> {
    let mut r = Report::new("quantities", &["wbs", "element_class", "planned", "unit", "measured", "delta_qty", "delta_pct", "evidence_link"]);
    for w in q {
        let rec = reconcile(w)?;
        r.row(vec![
            w.wbs_id.clone(),
            w.element_class.clone(),
            format_dp(w.planned.value, 3),
            w.planned.unit.to_string(),
            format_dp(w.measured.value, 3),
            signed(rec.delta_qty, 3),
            signed(rec.delta_pct_reported(), 2),
            w.evidence_link.clone(),
        ]);
    }
    Ok(r)
}

/// Cost roll-up in thousands, used for ledger summaries.
pub fn money_rollup(kind: &str, key: &str, totals: &BTreeMap<String, Money>) -> Report {
    let mut r = Report::new(kind, &[key, "total_k"]);
    for (g, m) in totals {
        r.row(vec![g.clone(), format_scaled(m.cents(), 100_000, 2)]);
    }
    r
}
