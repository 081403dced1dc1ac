//! Command-line behaviour through the library entry point.

use std::path::{Path, PathBuf};

use sitetwin::cli::{execute, main_with, Cli};
use clap::Parser;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sitetwin").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn row<'a>(out: &'a str, first: &str) -> Vec<&'a str> {
    out.lines().find(|l| l.split(',').next() == Some(first)).unwrap_or_else(|| panic!("no row {first}")).split(',').collect()
}

#[test]
fn simulate_is_byte_identical_across_runs_and_workers() {
    let dfw = fixture("dfw_midrise.json");
    let args = |w: &'static str| vec!["simulate", "--project", &dfw, "--trials", "30000", "--seed", "42", "--workers", w];
    let a = ok(&args("1"));
    let b = ok(&args("1"));
    let c = ok(&args("4"));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.contains("# seed: 42"));
    assert!(a.contains("# report: forecast"));
    assert!(a.contains("# p50_d:") && a.contains("# p80_d:"));
}

#[test]
fn ev_week_12_row() {
    let out = ok(&["ev", "--week", "12", "--format", "csv", "--project", &fixture("dfw_midrise.json")]);
    assert!(out.contains("month,pv_k,ev_k,ac_k,sv_k,cv_k,spi,cpi,eac_k,vac_k\n"));
    let r = row(&out, "2025-12");
    assert_eq!(&r[1..9], ["100.00", "95.00", "106.00", "-5.00", "-11.00", "0.95", "0.90", "111.58"]);
    let short = ok(&["ev", "--week", "3", "--format", "csv", "--project", &fixture("dfw_midrise.json")]);
    assert!(short.contains("2025-03,") && !short.contains("2025-04,"));
}

#[test]
fn metrics_from_dropped_confusion_csv() {
    let out = ok(&["metrics", "--confusion", &fixture("confusion.csv"), "--format", "csv", "--project", &fixture("dfw_midrise.json")]);
    let printed = [
        ("Rebar Placement", 0.888, 0.900, 0.894),
        ("Formwork Stripping", 0.868, 0.890, 0.878),
        ("Drywall Boarding", 0.872, 0.896, 0.884),
        ("MEP Rough-In", 0.905, 0.875, 0.890),
        ("Paint/Finish", 0.936, 0.900, 0.918),
    ];
    for (class, p, r, f1) in printed {
        let cells = row(&out, class);
        let got: Vec<f64> = cells[1..4].iter().map(|c| c.parse().unwrap()).collect();
        for (g, want) in got.iter().zip([p, r, f1]) {
            assert!((g - want).abs() <= 0.001 + 1e-9, "{class}: {g} vs {want}");
        }
    }
    // Drop-file mode prints only what was dropped.
    assert!(!out.contains("# report: mapping"));
}

#[test]
fn out_dir_gets_one_file_per_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display().to_string();
    let out = ok(&["buffers", "--format", "csv", "--out", &d, "--project", &fixture("dfw_midrise.json")]);
    assert!(out.starts_with("wrote "));
    let text = std::fs::read_to_string(dir.path().join("buffers.csv")).unwrap();
    assert!(text.starts_with("# report: buffers\n# seed: 42\n# input_sha256: "));
    assert!(text.contains("16,0.5,0.5,8.0,6.0,30.0,53.3\n"));
}

#[test]
fn usage_errors_print_synopsis_and_fail() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_ne!(code, 0);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, err) = run(&["cpm"]);
    assert_eq!(code, 2);
    assert!(err.contains("--project") && err.contains("Usage"), "{err}");
}

#[test]
fn load_errors_exit_non_zero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, fixture_text("minimal.json").replace("\"successor\": \"C\"", "\"successor\": \"Z9\"")).unwrap();
    let (code, _, err) = run(&["validate", "--project", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("Z9"), "{err}");
}

fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn copy_fixture(dir: &Path, name: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, fixture_text(name)).unwrap();
    p.display().to_string()
}

#[test]
fn level_decisions_persist_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let p = copy_fixture(dir.path(), "dfw_midrise.json");
    let (code, _, err) = run(&["level", "--week", "1", "--reject", "  ", "--project", &p]);
    assert_eq!(code, 1, "blank reason must be refused");
    assert!(err.contains("reason"), "{err}");
    ok(&["level", "--week", "1", "--reject", "Supervisor preference (learning period)", "--project", &p]);
    ok(&["level", "--week", "2", "--adopt", "--project", &p]);
    let (code, _, err) = run(&["level", "--week", "2", "--adopt", "--project", &p]);
    assert_eq!(code, 1);
    assert!(err.contains("already has a decision"), "{err}");

    // Interactive prompt decides the next open week.
    let cli = Cli::try_parse_from(["sitetwin", "level", "--decide", "--format", "csv", "--project", &p]).unwrap();
    let mut input: &[u8] = b"n\nVendor inflexibility\n";
    let mut prompt = Vec::new();
    let out = execute(&cli, &mut input, &mut prompt).unwrap();
    assert!(String::from_utf8(prompt).unwrap().starts_with("week 3 RL-003"));
    let csv = out.render(sitetwin::report::Format::Csv);
    assert!(csv.contains(",Vendor inflexibility,"), "{csv}");

    let saved = sitetwin::project_file::load_project(Path::new(&p)).unwrap();
    assert_eq!(saved.file.decisions.len(), 3);
    assert_eq!(saved.leveling_session().unwrap().unwrap().log().len(), 3);
}

#[test]
fn field_replay_gives_three_quarters_adoption() {
    let out = ok(&["level", "--field", "--project", &fixture("dfw_midrise.json")]);
    assert!(out.contains("# adoption: 12 of 16 (75.0%)"), "{out}");
    assert!(out.contains("# baseline_overtime_h: 1508.0"));
}

#[test]
fn whatif_cached_rank_and_plot() {
    let out = ok(&["whatif", "--cached", "--rank", "--plot", "--format", "csv", "--project", &fixture("dfw_midrise.json")]);
    let ranks: Vec<&str> = out
        .lines()
        .skip_while(|l| *l != "rank,scenario,d_finish_p50_d,d_finish_p80_d,d_cost_p50_k")
        .skip(1)
        .take_while(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(ranks.len(), 7);
    assert!(ranks[0].starts_with("Drywall") && ranks[1].starts_with("Late AHU") && ranks[6].starts_with("Glazing"));
    assert!(out.contains("# report: tornado"));
}

#[test]
fn whatif_live_on_toy() {
    let out = ok(&["whatif", "--scenario", "Late AHU (+14 d)", "--format", "csv", "--project", &fixture("toy_whatif.json")]);
    let r = row(&out, "Late AHU (+14 d)");
    assert_eq!(r[3], "+14.0");
    let (code, _, _) = run(&["whatif", "--scenario", "nope", "--project", &fixture("toy_whatif.json")]);
    assert_eq!(code, 2);
}

#[test]
fn cpm_costs_and_kg() {
    let dfw = fixture("dfw_midrise.json");
    let cpm = ok(&["cpm", "--format", "csv", "--project", &fixture("minimal.json")]);
    assert!(cpm.contains("# finish_workdays: 8.000"));
    let costs = ok(&["costs", "--localized", "--format", "csv", "--project", &dfw]);
    assert!(costs.contains("division,total_k\n"));
    let kg = ok(&["kg", "--pattern", "vendor -supplies-> cost_code -maps_to-> activity(id=A030)", "--project", &dfw]);
    assert!(kg.contains("vendor:V-GLS -> cost_code:08 44 13 -> activity:A030"), "{kg}");
    assert!(kg.contains("# paths: 3"), "{kg}");
}

#[test]
fn simulate_record_appends_history() {
    let dir = tempfile::tempdir().unwrap();
    let p = copy_fixture(dir.path(), "toy_whatif.json");
    ok(&["simulate", "--record", "--week", "1", "--trials", "500", "--project", &p]);
    let saved = sitetwin::project_file::load_project(Path::new(&p)).unwrap();
    assert_eq!(saved.file.forecast_history.len(), 1);
    assert_eq!(saved.file.forecast_history[0].week, 1);
}
