//! Builders for the bundled project files under `fixtures/`.
//!
//! The JSON files are generated from these builders; a test keeps them in
//! sync (set `SITETWIN_BLESS=1` to rewrite them).

use std::collections::BTreeMap;

use chrono::NaiveDate;

use sitetwin_core::cost::{CostComponent, CostItem, CostLedger, LocalizationFactors};
use sitetwin_core::leveler::{PolicyConfig, ResourcePool};
use sitetwin_core::progress::{DivisionMetrics, IouEntry, Quantity, QuantityUnit, WbsQuantity};
use sitetwin_core::project::{Activity, Calendar, PrecedenceRelation};
use sitetwin_core::stochastic::{DurationPrior, Evidence, ForecastEntry};
use sitetwin_core::synthetic::{MIDRISE, MIDRISE_LOGIC};
use sitetwin_core::whatif::{
    Audit, Footprint, ItemSelector, KnowledgeGraph, Node, NodeRef, NodeType, Operator, RelationEdit, Scenario,
    ScenarioResult,
};
use sitetwin_core::Money;

use crate::project_file::{
    BufferRow, BufferSection, EvSection, EvTotals, LevelingSection, LevelingSource, NamedMatrix, ProjectFile,
};

fn day(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid fixture date")
}

fn usd(d: i64) -> Money {
    Money::from_dollars(d)
}

/// Three activities: A (3 d) feeds B (5 d) and C (2 d). Finish 8 d.
pub fn minimal_project() -> ProjectFile {
    let mut f = ProjectFile::new("minimal three-activity sample", 7, day(2025, 1, 6));
    f.activities = vec![
        Activity::new("A", "03", 3.0).with_description("Footings"),
        Activity::new("B", "05", 5.0).with_description("Steel frame"),
        Activity::new("C", "09", 2.0).with_description("Site office fit-out"),
    ];
    f.relations = vec![PrecedenceRelation::fs("A", "B"), PrecedenceRelation::fs("A", "C")];
    f
}

/// SLAB -> AHU -> MEP -> FIN with a short GLZ branch off SLAB. AHU lies on
/// every trial's critical path.
pub fn toy_whatif_project() -> ProjectFile {
    let mut f = ProjectFile::new("what-if toy", 11, day(2025, 6, 2));
    f.metadata.trials = Some(2000);
    f.activities = vec![
        Activity::new("SLAB", "03", 10.0).with_description("Level 2 slab").with_demand("concrete", 1.0),
        Activity::new("AHU", "23", 8.0).with_description("AHU set and connect"),
        Activity::new("MEP", "26", 12.0).with_description("MEP rough-in").with_demand("electrical", 2.0),
        Activity::new("GLZ", "08", 4.0).with_description("Corridor glazing"),
        Activity::new("FIN", "09", 6.0).with_description("Finishes"),
    ];
    f.relations = vec![
        PrecedenceRelation::fs("SLAB", "AHU"),
        PrecedenceRelation::fs("AHU", "MEP"),
        PrecedenceRelation::fs("MEP", "FIN"),
        PrecedenceRelation::fs("SLAB", "GLZ"),
        PrecedenceRelation::fs("GLZ", "FIN"),
    ];
    f.pools = vec![ResourcePool::new("concrete", 1.0, 0.5), ResourcePool::new("electrical", 4.0, 1.0)];
    f.priors = f
        .activities
        .iter()
        .map(|a| {
            let d = a.baseline_duration;
            (a.id.clone(), DurationPrior::triangular(0.8 * d, d, 1.3 * d).expect("ordered bounds"))
        })
        .collect();
    f.ledger = CostLedger::new(vec![
        CostItem::new("I-SLAB", "03", "W1").with_components(usd(50_000), usd(30_000), Money::ZERO).with_activity("SLAB"),
        CostItem::new("I-AHU", "23", "W2").with_components(usd(80_000), usd(10_000), Money::ZERO).with_activity("AHU"),
        CostItem::new("I-DW", "09", "W3").with_components(usd(20_000), usd(20_000), Money::ZERO).with_activity("FIN"),
    ])
    .expect("unique fixture items");
    f.scenarios = vec![
        Scenario::empty("Baseline"),
        Scenario::new("Late AHU (+14 d)", vec![Operator::DeliveryShift { activities: vec!["AHU".into()], days: 14.0 }]),
    ];
    f.leveling = Some(LevelingSection {
        instance: LevelingSource::Network { weights: Default::default() },
        policy: PolicyConfig { episodes: 20, ..PolicyConfig::default() },
        baseline_rule: sitetwin_core::leveler::PriorityRule::LatestFinish,
    });
    f
}

/// Cumulative monthly totals in thousands: label, PV, EV, AC.
pub const MONTHLY_EV: [(&str, i64, i64, i64); 12] = [
    ("2025-01", 3, 2, 2),
    ("2025-02", 8, 9, 10),
    ("2025-03", 16, 17, 18),
    ("2025-04", 26, 28, 32),
    ("2025-05", 38, 41, 45),
    ("2025-06", 52, 58, 60),
    ("2025-07", 66, 68, 72),
    ("2025-08", 78, 76, 80),
    ("2025-09", 87, 83, 88),
    ("2025-10", 94, 89, 95),
    ("2025-11", 98, 93, 101),
    ("2025-12", 100, 95, 106),
];

/// WBS, class, planned, measured, unit, evidence.
pub const QUANTITIES: [(&str, &str, f64, f64, QuantityUnit, &str); 10] = [
    ("WBS-001", "Wall", 8200.0, 8035.0, QuantityUnit::SquareMeters, "ACC Reality Capture 2025-07.laz; drone ortho 2025-07-15"),
    ("WBS-002", "Slab", 2850.0, 2910.0, QuantityUnit::CubicMeters, "ACC Reality Capture 2025-08.laz; drone ortho 2025-08-12"),
    ("WBS-003", "Beam", 480.0, 472.0, QuantityUnit::CubicMeters, "ACC Reality Capture 2025-06.laz; field photos wk 24"),
    ("WBS-004", "Column", 360.0, 358.0, QuantityUnit::CubicMeters, "ACC Reality Capture 2025-06.laz; scan notes 06-21"),
    ("WBS-005", "Door", 186.0, 184.0, QuantityUnit::Each, "Procore punch Doors_Completion_2025-07; photo log"),
    ("WBS-006", "Window", 640.0, 652.0, QuantityUnit::Each, "ACC model compare; glazier log 2025-07"),
    ("WBS-007", "Duct", 5100.0, 4975.0, QuantityUnit::Meters, "MEP walk-down wk 30; ACC point cloud 2025-07.laz"),
    ("WBS-008", "Pipe", 9200.0, 9355.0, QuantityUnit::Meters, "MEP as-built redlines; ACC 2025-08.laz"),
    ("WBS-009", "Cable Tray", 1500.0, 1475.0, QuantityUnit::Meters, "Electrical install log; drone interior set wk 32"),
    ("WBS-010", "Ceiling", 11800.0, 11620.0, QuantityUnit::SquareMeters, "ACC interior scans 2025-09.laz; QC walk-down"),
];

pub const CV_CLASSES: [&str; 5] = ["Rebar Placement", "Formwork Stripping", "Drywall Boarding", "MEP Rough-In", "Paint/Finish"];

/// Predicted classes down, actual classes across.
pub const CV_COUNTS: [[u64; 5]; 5] = [
    [198, 10, 8, 6, 1],
    [12, 178, 3, 9, 3],
    [4, 8, 233, 12, 10],
    [6, 3, 9, 210, 4],
    [0, 1, 7, 3, 162],
];

/// Class, IoU, support in thousands of pixels.
pub const IOU: [(&str, f64, f64); 5] = [
    ("Rebar Placement", 0.78, 180.0),
    ("Formwork Stripping", 0.74, 165.0),
    ("Drywall Boarding", 0.81, 220.0),
    ("MEP Rough-In", 0.76, 205.0),
    ("Paint/Finish", 0.72, 150.0),
];

/// Division, support, precision, recall, F1, mean review minutes.
pub const DIVISION_MAPPING: [(&str, u64, f64, f64, f64, f64); 12] = [
    ("03 Concrete", 188, 0.92, 0.88, 0.90, 1.2),
    ("04 Masonry", 124, 0.89, 0.84, 0.86, 1.4),
    ("05 Metals", 162, 0.91, 0.86, 0.88, 1.3),
    ("06 Wood/Plastics/Composites", 131, 0.90, 0.83, 0.86, 1.6),
    ("07 Thermal & Moisture Protection", 175, 0.88, 0.82, 0.85, 1.7),
    ("08 Openings", 149, 0.93, 0.90, 0.91, 0.9),
    ("09 Finishes", 210, 0.90, 0.85, 0.87, 1.5),
    ("21 Fire Suppression", 96, 0.89, 0.87, 0.88, 1.1),
    ("22 Plumbing", 205, 0.91, 0.88, 0.89, 1.2),
    ("23 HVAC", 198, 0.90, 0.86, 0.88, 1.4),
    ("26 Electrical", 228, 0.92, 0.89, 0.90, 1.0),
    ("27 Communications", 94, 0.89, 0.85, 0.87, 1.3),
];

/// Week, P50, P80, note. Actual finish is 128 d throughout.
pub const FORECAST_HISTORY: [(u32, f64, f64, &str); 16] = [
    (1, 120.0, 125.0, "Initial prior; high uncertainty"),
    (2, 121.0, 126.0, "Posterior updates begin"),
    (3, 122.0, 127.0, ""),
    (4, 123.0, 128.0, ""),
    (5, 124.0, 129.0, ""),
    (6, 125.0, 129.0, ""),
    (7, 126.0, 129.0, ""),
    (8, 126.0, 129.0, "Ahead in some paths; volatility"),
    (9, 127.0, 130.0, "Uncertainty narrows"),
    (10, 127.0, 130.0, ""),
    (11, 127.0, 130.0, ""),
    (12, 127.0, 130.0, ""),
    (13, 128.0, 130.0, "P50 aligns with actual"),
    (14, 128.0, 130.0, "Stable forecast"),
    (15, 128.0, 130.0, ""),
    (16, 128.0, 130.0, "Data date"),
];
pub const ACTUAL_FINISH: f64 = 128.0;

/// Week, feeding delta, project delta (days).
pub const BUFFER_DELTAS: [(u32, f64, f64); 16] = [
    (1, 0.0, 0.0),
    (2, 0.0, 0.0),
    (3, 0.5, 0.0),
    (4, 0.5, 0.0),
    (5, 1.0, 0.5),
    (6, 0.5, 0.5),
    (7, 0.5, 0.5),
    (8, 0.5, 0.5),
    (9, 0.5, 0.5),
    (10, 0.5, 0.5),
    (11, 1.0, 0.5),
    (12, 0.5, 0.5),
    (13, 0.5, 0.5),
    (14, 0.5, 0.5),
    (15, 0.5, 0.5),
    (16, 0.5, 0.5),
];
pub const FEEDING_BUFFER_DAYS: f64 = 15.0;
pub const PROJECT_BUFFER_DAYS: f64 = 20.0;

/// Recorded field results: name, affected divisions, dP50, dP80, cost P50 k$, cost P80 k$, note.
pub const RECORDED_RESULTS: [(&str, &[&str], f64, f64, f64, f64, &str); 7] = [
    ("Drywall material +8% (supply lag)", &["06", "09"], 6.0, 8.0, 6.5, 8.0, "Material escalation + ripple effect"),
    ("Late AHU delivery (2 weeks)", &["23", "26"], 5.0, 6.0, 4.2, 5.5, "Drives MEP dependencies"),
    ("3 rain days in critical window", &["03", "07"], 4.0, 4.0, 3.0, 4.0, "Lost productivity"),
    ("Steel lead time +1 week", &["03", "05"], 4.0, 5.0, 3.5, 4.5, "Framing to slab delay"),
    ("Crew shortage (-1 electrician)", &["26"], 3.0, 4.0, 2.6, 3.5, "Reduced productivity"),
    ("Fireproofing change order", &["05", "07"], 2.0, 3.0, 2.2, 3.0, "Additional inspections"),
    ("Glazing resequencing (corridor-first)", &["07", "08"], -2.0, -1.0, -1.4, -0.8, "Mitigation saves time"),
];

fn midrise_demands(id: &str) -> &'static [(&'static str, f64)] {
    match id {
        "A010" | "A020" => &[("concrete-crew", 2.0), ("crane", 1.0)],
        "A030" => &[("glaziers", 2.0), ("crane", 1.0)],
        "A040" | "A050" => &[("envelope-crew", 1.0)],
        "A060" | "A090" | "A100" => &[("drywall-crew", 2.0)],
        "A070" | "A120" | "A130" | "A150" => &[("mep-fitters", 3.0)],
        "A110" | "A160" => &[("electricians", 4.0)],
        _ => &[],
    }
}

fn midrise_pools() -> Vec<ResourcePool> {
    vec![
        ResourcePool::new("concrete-crew", 2.0, 1.0),
        ResourcePool::new("crane", 1.0, 0.0),
        ResourcePool::new("drywall-crew", 4.0, 1.0),
        ResourcePool::new("electricians", 6.0, 2.0),
        ResourcePool::new("envelope-crew", 2.0, 1.0),
        ResourcePool::new("glaziers", 2.0, 1.0),
        ResourcePool::new("mep-fitters", 6.0, 2.0),
    ]
}

fn midrise_ledger() -> CostLedger {
    // item, division, wbs, activity, material, labor, equipment (USD)
    let rows: [(&str, &str, &str, &str, i64, i64, i64); 19] = [
        ("C-01-GC", "01", "WBS-000", "A001", 0, 60_000, 40_000),
        ("C-01-CX", "01", "WBS-000", "A170", 0, 80_000, 0),
        ("C-01-CLN", "01", "WBS-000", "A180", 10_000, 35_000, 0),
        ("C-03-FND", "03", "WBS-004", "A010", 310_000, 190_000, 30_000),
        ("C-03-PT", "03", "WBS-002", "A020", 920_000, 610_000, 85_000),
        ("C-05-EMB", "05", "WBS-003", "A020", 140_000, 60_000, 0),
        ("C-07-ROOF", "07", "WBS-011", "A040", 160_000, 90_000, 0),
        ("C-07-SEAL", "07", "WBS-011", "A050", 70_000, 80_000, 0),
        ("C-07-FP", "07", "WBS-003", "A060", 18_000, 18_667, 0),
        ("C-08-CW", "08", "WBS-006", "A030", 980_000, 420_000, 0),
        ("C-09-FRM", "09", "WBS-001", "A060", 150_000, 170_000, 0),
        ("C-09-GWB", "09", "WBS-001", "A090", 81_250, 120_000, 0),
        ("C-09-ACT", "09", "WBS-010", "A100", 95_000, 85_000, 0),
        ("C-14-ELV", "14", "WBS-012", "A140", 380_000, 90_000, 0),
        ("C-22-PLB", "22", "WBS-008", "A130", 140_000, 120_000, 0),
        ("C-23-HVAC", "23", "WBS-007", "A070", 480_000, 390_000, 0),
        ("C-23-AHU", "23", "WBS-007", "A120", 260_000, 60_000, 0),
        ("C-23-TAB", "23", "WBS-007", "A150", 0, 45_000, 0),
        ("C-26-ELC", "26", "WBS-009", "A110", 310_000, 280_000, 0),
    ];
    CostLedger::new(
        rows.iter()
            .map(|&(id, div, wbs, act, m, l, e)| CostItem::new(id, div, wbs).with_components(usd(m), usd(l), usd(e)).with_activity(act))
            .collect(),
    )
    .expect("unique fixture items")
}

fn midrise_graph() -> KnowledgeGraph {
    use NodeType::*;
    let mut g = KnowledgeGraph::default();
    let audit = || Audit::new("project-controls", "2025-09-15", "initial twin load");
    let nodes: &[(NodeType, &str, &str)] = &[
        (Wbs, "WBS-006", "Envelope glazing"),
        (Wbs, "WBS-001", "Interior walls"),
        (BimElement, "CW-N-L2", "North curtainwall bay L2"),
        (BimElement, "CW-S-L2", "South curtainwall bay L2"),
        (BimElement, "GWB-L3-CORR", "L3 corridor partition"),
        (CostCode, "08 44 13", "Glazed curtain wall"),
        (CostCode, "08 80 00", "Glazing"),
        (CostCode, "07 84 00", "Firestopping"),
        (CostCode, "09 29 00", "Gypsum board"),
        (CostCode, "23 73 00", "Indoor central-station AHUs"),
        (Vendor, "V-ALU", "Lone Star Aluminum"),
        (Vendor, "V-GLS", "Trinity Glass"),
        (Vendor, "V-GYP", "Metroplex Gypsum Supply"),
        (Vendor, "V-AHU", "North Texas Air Handling"),
        (Crew, "C-GLZ", "Glazing crew"),
        (Crew, "C-DW", "Drywall crew"),
        (Activity, "A030", "Envelope-Curtainwall & windows"),
        (Activity, "A060", "Interior partitions & framing"),
        (Activity, "A090", "Drywall boarding & taping"),
        (Activity, "A120", "HVAC equipment start-up"),
    ];
    for &(kind, id, label) in nodes {
        g.add_node(Node::new(kind, id, label), audit()).expect("unique fixture nodes");
    }
    let edges: &[((NodeType, &str), &str, (NodeType, &str))] = &[
        ((Wbs, "WBS-006"), "contains", (BimElement, "CW-N-L2")),
        ((Wbs, "WBS-006"), "contains", (BimElement, "CW-S-L2")),
        ((Wbs, "WBS-001"), "contains", (BimElement, "GWB-L3-CORR")),
        ((BimElement, "CW-N-L2"), "priced_by", (CostCode, "08 44 13")),
        ((BimElement, "CW-S-L2"), "priced_by", (CostCode, "08 44 13")),
        ((BimElement, "GWB-L3-CORR"), "priced_by", (CostCode, "09 29 00")),
        ((Vendor, "V-ALU"), "supplies", (CostCode, "08 44 13")),
        ((Vendor, "V-GLS"), "supplies", (CostCode, "08 44 13")),
        ((Vendor, "V-GLS"), "supplies", (CostCode, "08 80 00")),
        ((Vendor, "V-GYP"), "supplies", (CostCode, "09 29 00")),
        ((Vendor, "V-AHU"), "supplies", (CostCode, "23 73 00")),
        ((CostCode, "08 44 13"), "maps_to", (Activity, "A030")),
        ((CostCode, "08 80 00"), "maps_to", (Activity, "A030")),
        ((CostCode, "07 84 00"), "maps_to", (Activity, "A060")),
        ((CostCode, "09 29 00"), "maps_to", (Activity, "A090")),
        ((CostCode, "23 73 00"), "maps_to", (Activity, "A120")),
        ((Crew, "C-GLZ"), "performs", (Activity, "A030")),
        ((Crew, "C-DW"), "performs", (Activity, "A060")),
        ((Crew, "C-DW"), "performs", (Activity, "A090")),
    ];
    for &((fk, fi), label, (tk, ti)) in edges {
        g.add_edge(NodeRef::new(fk, fi), label, NodeRef::new(tk, ti), audit()).expect("fixture endpoints exist");
    }
    g
}

fn midrise_scenarios() -> Vec<Scenario> {
    let items = |ids: &[&str]| ItemSelector::items(ids.iter().copied());
    vec![
        Scenario::new(
            "Drywall material +8% (supply lag)",
            vec![
                Operator::PriceMultiplier { target: items(&["C-09-GWB"]), factor: 1.08, components: vec![CostComponent::Material] },
                Operator::DeliveryShift { activities: vec!["A090".into()], days: 3.0 },
            ],
        ),
        Scenario::new("Late AHU delivery (2 weeks)", vec![Operator::DeliveryShift { activities: vec!["A120".into()], days: 14.0 }]),
        Scenario::new(
            "3 rain days in critical window",
            vec![Operator::WeatherDays { dates: vec![day(2025, 3, 4), day(2025, 3, 5), day(2025, 3, 6)] }],
        ),
        Scenario::new("Steel lead time +1 week", vec![Operator::DeliveryShift { activities: vec!["A020".into()], days: 7.0 }]),
        Scenario::new(
            "Crew shortage (-1 electrician)",
            vec![Operator::CapacityChange { resource: "electricians".into(), units: -1.0, from_week: 31, to_week: 32 }],
        ),
        Scenario::new("Fireproofing change order", vec![Operator::ScopeChange { target: items(&["C-07-FP"]), factor: 1.06 }]),
        Scenario::new(
            "Glazing resequencing (corridor-first)",
            vec![Operator::Resequence { edits: vec![RelationEdit::Remove { predecessor: "A060".into(), successor: "A090".into() }] }],
        ),
    ]
}

/// The field results recorded against the scenarios above.
pub fn recorded_results(seed: u64) -> Vec<ScenarioResult> {
    RECORDED_RESULTS
        .iter()
        .map(|&(name, divs, d50, d80, c50, c80, note)| ScenarioResult {
            scenario: name.into(),
            delta_finish_p50: d50,
            delta_finish_p80: d80,
            delta_cost_p50: Money::from_dollars_f64(c50 * 1000.0),
            delta_cost_p80: Money::from_dollars_f64(c80 * 1000.0),
            base_finish_p50: ACTUAL_FINISH,
            base_finish_p80: 130.0,
            scenario_finish_p50: ACTUAL_FINISH + d50,
            scenario_finish_p80: 130.0 + d80,
            affected_divisions: divs.iter().map(|d| d.to_string()).collect(),
            cost_spread_assumed: false,
            notes: format!("recorded: {note}"),
            footprint: Footprint { divisions: divs.iter().map(|d| d.to_string()).collect(), ..Footprint::default() },
            seed,
            n_trials: 20_000,
        })
        .collect()
}

/// Eighteen-activity mid-rise in Dallas-Fort Worth with monthly earned
/// value, quantity reconciliation, vision labels, weekly forecasts and
/// buffers, the sixteen-week leveling look-ahead, scenarios and a
/// traceability graph.
pub fn dfw_project() -> ProjectFile {
    let mut f = ProjectFile::new("DFW mid-rise (synthetic)", 42, day(2025, 1, 6));
    f.metadata.region = "Dallas-Fort Worth, TX".into();
    f.metadata.trials = Some(20_000);
    f.calendars = vec![Calendar::standard().with_exceptions([day(2025, 5, 26), day(2025, 7, 4), day(2025, 9, 1)])];
    f.activities = MIDRISE
        .iter()
        .enumerate()
        .map(|(i, &(id, desc, div, mean, _))| {
            let mut a = Activity::new(id, div, mean).with_description(desc).with_wbs(format!("WBS-1{:02}", i + 1));
            for &(r, u) in midrise_demands(id) {
                a = a.with_demand(r, u);
            }
            a
        })
        .collect();
    f.relations = MIDRISE_LOGIC.iter().map(|&(a, b)| PrecedenceRelation::fs(a, b)).collect();
    f.pools = midrise_pools();
    f.priors = MIDRISE
        .iter()
        .map(|&(id, _, _, mean, sd)| {
            let prior = match id {
                // Planner-bounded trades get triangular priors.
                "A001" | "A180" | "A160" => DurationPrior::triangular(mean - 1.5 * sd, mean, mean + 1.5 * sd),
                _ => DurationPrior::lognormal(mean, sd),
            };
            (id.to_string(), prior.expect("positive fixture moments"))
        })
        .collect::<BTreeMap<_, _>>();
    f.evidence = vec![
        Evidence::new("A010", 3, 0.6, 11.0),
        Evidence::new("A020", 8, 0.35, 20.0),
        Evidence::new("A020", 12, 0.7, 39.0),
        Evidence::new("A030", 14, 0.25, 11.0),
    ];
    f.earned_value = Some(EvSection {
        bac: Money::from_thousands(100),
        periods: Vec::new(),
        budget_items: Vec::new(),
        measured: BTreeMap::new(),
        totals: MONTHLY_EV
            .iter()
            .map(|&(p, pv, ev, ac)| EvTotals {
                period: p.into(),
                pv: Money::from_thousands(pv),
                ev: Money::from_thousands(ev),
                ac: Money::from_thousands(ac),
            })
            .collect(),
    });
    f.ledger = midrise_ledger();
    f.localization = Some(LocalizationFactors::uniform(0.89));
    f.quantities = QUANTITIES
        .iter()
        .map(|&(w, c, p, m, u, link)| WbsQuantity {
            wbs_id: w.into(),
            element_class: c.into(),
            planned: Quantity::new(p, u),
            measured: Quantity::new(m, u),
            evidence_link: link.into(),
        })
        .collect();
    f.confusion_matrices = vec![NamedMatrix {
        name: "site activity recognition".into(),
        classes: CV_CLASSES.iter().map(|c| c.to_string()).collect(),
        counts: CV_COUNTS.iter().map(|r| r.to_vec()).collect(),
    }];
    f.iou = IOU.iter().map(|&(c, iou, s)| IouEntry { class: c.into(), iou, support_px: s }).collect();
    f.division_metrics = DIVISION_MAPPING
        .iter()
        .map(|&(d, n, p, r, f1, m)| DivisionMetrics {
            division: d.into(),
            support: n,
            precision: p,
            recall: r,
            f1,
            mean_review_minutes: m,
            zero_division: false,
        })
        .collect();
    f.forecast_history = FORECAST_HISTORY
        .iter()
        .map(|&(w, p50, p80, note)| ForecastEntry { week: w, p50, p80, actual: Some(ACTUAL_FINISH), note: note.into() })
        .collect();
    f.buffers = Some(BufferSection {
        feeding_size: FEEDING_BUFFER_DAYS,
        project_size: PROJECT_BUFFER_DAYS,
        project_target_pct: 35.0,
        rows: BUFFER_DELTAS.iter().map(|&(week, fd, pd)| BufferRow { week, feeding_delta: fd, project_delta: pd }).collect(),
    });
    f.leveling = Some(LevelingSection {
        instance: LevelingSource::SixteenWeek,
        policy: PolicyConfig::default(),
        baseline_rule: sitetwin_core::leveler::PriorityRule::LatestFinish,
    });
    f.scenarios = midrise_scenarios();
    f.knowledge_graph = midrise_graph();
    f.scenario_results = recorded_results(f.metadata.seed);
    f
}

/// Vision confusion matrix as a drop file, with row and column totals.
pub fn confusion_csv() -> String {
    let mut s = String::from("Predicted / Actual");
    for c in CV_CLASSES {
        s.push(',');
        s.push_str(c);
    }
    s.push_str(",Row Total\n");
    for (c, row) in CV_CLASSES.iter().zip(CV_COUNTS) {
        s.push_str(c);
        for v in row {
            s.push_str(&format!(",{v}"));
        }
        s.push_str(&format!(",{}\n", row.iter().sum::<u64>()));
    }
    s.push_str("Column Total (support n)");
    for j in 0..5 {
        s.push_str(&format!(",{}", CV_COUNTS.iter().map(|r| r[j]).sum::<u64>()));
    }
    s.push_str(&format!(",{}\n", CV_COUNTS.iter().flatten().sum::<u64>()));
    s
}

/// Bundled fixture files: name and contents.
pub fn bundled() -> Vec<(&'static str, String)> {
    vec![
        ("dfw_midrise.json", dfw_project().to_json()),
        ("minimal.json", minimal_project().to_json()),
        ("toy_whatif.json", toy_whatif_project().to_json()),
        ("confusion.csv", confusion_csv()),
    ]
}
