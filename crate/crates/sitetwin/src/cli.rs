//! Command-line front end. `main.rs` only forwards to [`main_with`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use sitetwin_core::cost::{rollup_costs, GroupBy};
use sitetwin_core::leveler::{LevelerError, LevelingSession, FIELD_DECISIONS};
use sitetwin_core::money::format_dp;
use sitetwin_core::progress::{classification_metrics, iou_aggregate, support_weighted, ProgressError};
use sitetwin_core::project::cpm_baseline;
use sitetwin_core::stochastic::{
    criticality_index, weekly_forecast_log, FinishDistribution, ForecastEntry, McsRunner, Simulation, StochasticError,
};
use sitetwin_core::whatif::{
    evaluate_with, kg_query, sensitivity_rank, EvalConfig, QueryContext, ScenarioResult, TwinState, WhatIfError,
};

use crate::ingest::{self, IngestError};
use crate::project_file::{load_project, save_project, Project, ProjectError};
use crate::report::{self, Format, Header, Report};
use crate::runner::ThreadedRunner;

#[derive(Debug, Parser)]
#[command(name = "sitetwin", version, about = "Schedule and cost control over a project twin file")]
pub struct Cli {
    /// Project file (JSON, schema sitetwin/1).
    #[arg(long, global = true)]
    pub project: Option<PathBuf>,
    /// Overrides the project seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials; defaults to the project setting.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Data week for simulate and level, period count for ev.
    #[arg(long, global = true)]
    pub week: Option<u32>,
    /// Write each report to DIR/<report>.txt or .csv instead of stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Simulation threads; results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the project, resolve every reference and print a summary.
    Validate,
    /// Deterministic critical path at baseline durations.
    Cpm,
    /// Monte-Carlo finish forecast, criticality and the weekly forecast log.
    Simulate {
        /// Store this week's P50/P80 in the project's forecast history.
        #[arg(long)]
        record: bool,
    },
    /// Earned-value table, cut after `--week` periods.
    Ev,
    /// Stored weekly forecast history and its convergence checks.
    Forecast,
    /// Buffer consumption ledger.
    Buffers,
    /// Leveling recommendations and the decision log.
    Level {
        /// Adopt the recommendation for `--week`.
        #[arg(long, conflicts_with_all = ["reject", "decide"])]
        adopt: bool,
        /// Reject the recommendation for `--week` with this reason.
        #[arg(long, value_name = "REASON", conflicts_with = "decide")]
        reject: Option<String>,
        /// Prompt on stdin for the next undecided week.
        #[arg(long)]
        decide: bool,
        /// Replay the bundled field decisions for undecided weeks (not saved).
        #[arg(long)]
        field: bool,
    },
    /// Evaluate scenarios against the base state.
    Whatif {
        /// Only this scenario.
        #[arg(long)]
        scenario: Option<String>,
        /// Also print the sensitivity ranking.
        #[arg(long)]
        rank: bool,
        /// Draw the ranking as a text tornado chart.
        #[arg(long)]
        plot: bool,
        /// Use stored results where present instead of re-evaluating.
        #[arg(long)]
        cached: bool,
        /// Store the evaluated results in the project file.
        #[arg(long)]
        record: bool,
    },
    /// Vision, mapping and quantity metrics from the project or drop files.
    Metrics {
        #[arg(long, value_name = "CSV")]
        confusion: Option<PathBuf>,
        #[arg(long, value_name = "CSV")]
        iou: Option<PathBuf>,
        #[arg(long, value_name = "CSV")]
        divisions: Option<PathBuf>,
        #[arg(long, value_name = "CSV")]
        quantities: Option<PathBuf>,
    },
    /// Cost ledger roll-up.
    Costs {
        #[arg(long, value_enum, default_value_t = Grouping::Division)]
        group_by: Grouping,
        /// Apply the project's localization factors first.
        #[arg(long)]
        localized: bool,
    },
    /// Query the traceability graph, e.g. `vendor -supplies-> cost_code -maps_to-> activity(id=A030)`.
    Kg {
        #[arg(long)]
        pattern: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Trial cap for interactive scenario evaluation.
        #[arg(long, default_value_t = sitetwin_core::whatif::DEFAULT_EVAL_TRIALS)]
        trial_cap: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grouping {
    Division,
    Wbs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Progress(#[from] ProgressError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    WhatIf(#[from] WhatIfError),
    #[error(transparent)]
    Leveler(#[from] LevelerError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Reports produced by one command, with the header they carry.
#[derive(Debug, Clone)]
pub struct Output {
    pub header: Header,
    pub reports: Vec<Report>,
}

impl Output {
    /// All reports rendered in order, separated by blank lines.
    pub fn render(&self, format: Format) -> String {
        self.reports.iter().map(|r| r.render(&self.header, format)).collect::<Vec<_>>().join("\n")
    }

    /// Writes `DIR/<kind>.<ext>` per report and returns the paths.
    pub fn write_to(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let ext = match format {
            Format::Table => "txt",
            Format::Csv => "csv",
        };
        let mut paths = Vec::new();
        for r in &self.reports {
            let p = dir.join(format!("{}.{ext}", r.kind));
            std::fs::write(&p, r.render(&self.header, format)).map_err(io_err(&p))?;
            paths.push(p);
        }
        Ok(paths)
    }
}

impl Cli {
    fn project_path(&self) -> Result<&Path, CliError> {
        self.project.as_deref().ok_or_else(|| CliError::Usage("--project <FILE> is required".into()))
    }

    /// Loads the project, applying `--seed`.
    pub fn load(&self) -> Result<Project, CliError> {
        let p = load_project(self.project_path()?)?;
        Ok(match self.seed {
            Some(s) if s != p.seed => Project::with_seed(p.file, s)?,
            _ => p,
        })
    }

    fn runner(&self) -> ThreadedRunner {
        self.workers.map_or_else(ThreadedRunner::available, ThreadedRunner::new)
    }

    fn trials(&self, p: &Project) -> u64 {
        self.trials.unwrap_or_else(|| p.default_trials())
    }
}

/// Runs every command except `serve`. `input` and `prompt` back the
/// interactive decision prompt.
pub fn execute(cli: &Cli, input: &mut dyn BufRead, prompt: &mut dyn Write) -> Result<Output, CliError> {
    let mut project = cli.load()?;
    let reports = match &cli.command {
        Command::Validate => vec![validate_report(&project)],
        Command::Cpm => {
            let s = cpm_baseline(&project.state.network, &project.state.axis());
            let mut r = report::cpm_report(&project.state.network, &s);
            r.note("finish_workdays", format_dp(s.project_finish, 3));
            r.note("finish_elapsed_days", format_dp(s.finish_elapsed, 3));
            vec![r]
        }
        Command::Simulate { record } => simulate(cli, &mut project, *record)?,
        Command::Ev => {
            let series = project.ev_series()?.ok_or_else(|| CliError::Usage("project has no earned_value section".into()))?;
            vec![report::ev_report(&series, cli.week.map(|w| w as usize))]
        }
        Command::Forecast => vec![report::forecast_report(&weekly_forecast_log(&project.file.forecast_history))],
        Command::Buffers => {
            let ledger = project.buffer_ledger()?.ok_or_else(|| CliError::Usage("project has no buffers section".into()))?;
            let target = project.file.buffers.as_ref().map_or(35.0, |b| b.project_target_pct);
            vec![report::buffers_report(&ledger, target)]
        }
        Command::Level { adopt, reject, decide, field } => level(cli, &mut project, *adopt, reject.as_deref(), *decide, *field, input, prompt)?,
        Command::Whatif { scenario, rank, plot, cached, record } => {
            whatif(cli, &mut project, scenario.as_deref(), *rank, *plot, *cached, *record)?
        }
        Command::Metrics { confusion, iou, divisions, quantities } => {
            metrics(&project, confusion.as_deref(), iou.as_deref(), divisions.as_deref(), quantities.as_deref())?
        }
        Command::Costs { group_by, localized } => {
            let ledger = match (&project.file.localization, localized) {
                (Some(f), true) => project.file.ledger.localized(f).map_err(|e| CliError::Usage(e.to_string()))?,
                (None, true) => return Err(CliError::Usage("project has no localization factors".into())),
                _ => project.file.ledger.clone(),
            };
            let (g, key) = match group_by {
                Grouping::Division => (GroupBy::Division, "division"),
                Grouping::Wbs => (GroupBy::Wbs, "wbs"),
            };
            let mut r = report::money_rollup("costs", key, &rollup_costs(&ledger, g));
            r.note("total_k", report::k(ledger.total(), 2));
            vec![r]
        }
        Command::Kg { pattern } => {
            let mut ctx = QueryContext::default();
            if pattern.contains("criticality") {
                let d = run_sim(cli, &project.state, project.seed, cli.trials(&project))?;
                ctx.criticality = criticality_index(&d);
            }
            let res = kg_query(&project.state.graph, pattern, &ctx)?;
            let mut r = Report::new("kg", &["path"]);
            for path in &res.paths {
                r.row(vec![path.iter().map(|n| format!("{}:{}", n.kind.as_str(), n.id)).collect::<Vec<_>>().join(" -> ")]);
            }
            r.note("paths", res.paths.len().to_string());
            vec![r]
        }
        Command::Serve { .. } => return Err(CliError::Usage("serve is handled by main_with".into())),
    };
    Ok(Output { header: Header { seed: project.seed, input_hash: project.input_hash.clone() }, reports })
}

fn validate_report(p: &Project) -> Report {
    let f = &p.file;
    let s = cpm_baseline(&p.state.network, &p.state.axis());
    let mut r = Report::new("validate", &["item", "value"]);
    let mut add = |k: &str, v: String| r.row(vec![k.into(), v]);
    add("schema", f.schema.clone());
    add("name", f.metadata.name.clone());
    add("region", f.metadata.region.clone());
    add("start", f.metadata.start.to_string());
    add("calendar", p.state.calendar.name.clone());
    add("activities", f.activities.len().to_string());
    add("relations", f.relations.len().to_string());
    add("resource_pools", f.pools.len().to_string());
    add("priors", f.priors.len().to_string());
    add("evidence_rows", f.evidence.len().to_string());
    add("cost_items", f.ledger.items().len().to_string());
    add("ledger_total_k", report::k(f.ledger.total(), 2));
    add("ev_periods", f.earned_value.as_ref().map_or(0, |e| e.totals.len().max(e.periods.len())).to_string());
    add("quantity_rows", f.quantities.len().to_string());
    add("confusion_matrices", f.confusion_matrices.len().to_string());
    add("scenarios", f.scenarios.len().to_string());
    add("kg_nodes", p.state.graph.nodes().count().to_string());
    add("kg_edges", p.state.graph.edges().count().to_string());
    add("decisions", f.decisions.len().to_string());
    add("cpm_finish_workdays", format_dp(s.project_finish, 3));
    r.note("status", "ok");
    r
}

pub fn run_sim(cli: &Cli, state: &TwinState, seed: u64, trials: u64) -> Result<FinishDistribution, CliError> {
    let sim = Simulation::new(&state.network, &state.posteriors, state.axis(), seed)?;
    Ok(cli.runner().run(&sim, trials)?)
}

fn simulate(cli: &Cli, project: &mut Project, record: bool) -> Result<Vec<Report>, CliError> {
    let state = match cli.week {
        Some(w) => project.state_as_of(w)?,
        None => project.state.clone(),
    };
    let trials = cli.trials(project);
    let d = run_sim(cli, &state, project.seed, trials)?;
    let history = &project.file.forecast_history;
    let week = cli.week.unwrap_or_else(|| history.iter().map(|e| e.week).max().map_or(1, |w| w + 1));
    let actual = history.iter().rev().find_map(|e| e.actual);
    let mut entry = ForecastEntry::from_distribution(week, &d, actual);
    entry.note = format!("simulated, {trials} trials");
    let mut rows: Vec<ForecastEntry> = history.iter().filter(|e| e.week < week).cloned().collect();
    rows.push(entry.clone());
    let mut summary = report::simulation_report(&d);
    summary.note("data_week", week.to_string());
    summary.note("p50_d", format_dp(entry.p50, 1));
    summary.note("p80_d", format_dp(entry.p80, 1));
    let reports = vec![
        summary,
        report::criticality_report(&state.network, &state.posteriors, &d),
        report::forecast_report(&weekly_forecast_log(&rows)),
    ];
    if record {
        let h = &mut project.file.forecast_history;
        h.retain(|e| e.week != week);
        h.push(entry);
        h.sort_by_key(|e| e.week);
        save_project(&project.file, cli.project_path()?)?;
    }
    Ok(reports)
}

fn session(project: &Project) -> Result<LevelingSession, CliError> {
    project.leveling_session()?.ok_or_else(|| CliError::Usage("project has no leveling section".into()))
}

/// Weeks covered by the baseline plan.
pub fn leveling_horizon(s: &LevelingSession) -> u32 {
    s.policy.horizon_weeks.max(1)
}

fn next_undecided(s: &LevelingSession, horizon: u32) -> Option<u32> {
    (1..=horizon).find(|w| !s.log().iter().any(|d| d.recommendation.week == *w))
}

#[allow(clippy::too_many_arguments)]
fn level(
    cli: &Cli,
    project: &mut Project,
    adopt: bool,
    reject: Option<&str>,
    decide: bool,
    field: bool,
    input: &mut dyn BufRead,
    prompt: &mut dyn Write,
) -> Result<Vec<Report>, CliError> {
    let mut s = session(project)?;
    let horizon = leveling_horizon(&s);
    let before = s.log().len();
    if adopt || reject.is_some() {
        let week = cli.week.ok_or_else(|| CliError::Usage("--adopt and --reject need --week".into()))?;
        if week > horizon {
            return Err(CliError::Usage(format!("week {week} is past the {horizon}-week plan")));
        }
        s.recommend(week)?;
        s.record_decision(week, adopt, reject.unwrap_or(""))?;
    } else if decide {
        let week = match cli.week {
            Some(w) => w,
            None => next_undecided(&s, horizon).ok_or_else(|| CliError::Usage("every week is decided".into()))?,
        };
        let r = s.recommend(week)?;
        let pio = |e| CliError::Io { path: "<stdin>".into(), source: e };
        writeln!(prompt, "week {week} {}: {} (predicted {:+.1})", r.action_id, r.summary, r.predicted_delta).map_err(pio)?;
        write!(prompt, "adopt? [y/n] ").map_err(pio)?;
        prompt.flush().map_err(pio)?;
        let mut line = String::new();
        input.read_line(&mut line).map_err(pio)?;
        let adopted = matches!(line.trim(), "y" | "Y" | "yes");
        write!(prompt, "{} ", if adopted { "notes:" } else { "reason:" }).map_err(pio)?;
        prompt.flush().map_err(pio)?;
        let mut reason = String::new();
        input.read_line(&mut reason).map_err(pio)?;
        s.record_decision(week, adopted, reason.trim())?;
    }
    if s.log().len() > before {
        project.file.decisions = s.log().to_vec();
        save_project(&project.file, cli.project_path()?)?;
        project.refresh_hash();
    }
    if field {
        for (i, d) in FIELD_DECISIONS.iter().enumerate() {
            let week = i as u32 + 1;
            if week > horizon || s.log().iter().any(|r| r.recommendation.week == week) {
                continue;
            }
            s.recommend(week)?;
            s.record_decision(week, d.is_none(), d.unwrap_or(""))?;
        }
    }
    let ot = s.overtime_report();
    let mut log = report::leveling_report(s.log(), &ot);
    if let Some(w) = next_undecided(&s, horizon) {
        let r = s.recommend(w)?;
        log.note("next_week", w.to_string());
        log.note("next_recommendation", format!("{} {}", r.action_id, r.summary));
    }
    Ok(vec![log, report::overtime_report(&ot)])
}

fn whatif(
    cli: &Cli,
    project: &mut Project,
    only: Option<&str>,
    rank: bool,
    plot: bool,
    cached: bool,
    record: bool,
) -> Result<Vec<Report>, CliError> {
    let scenarios: Vec<_> = project.file.scenarios.iter().filter(|s| only.is_none_or(|n| s.name == n)).cloned().collect();
    if let Some(n) = only.filter(|_| scenarios.is_empty()) {
        return Err(CliError::Usage(format!("no scenario named {n:?}")));
    }
    let cfg = EvalConfig::new(cli.trials(project), project.seed);
    let runner = cli.runner();
    let mut results: Vec<ScenarioResult> = Vec::new();
    for s in &scenarios {
        let stored = project.file.scenario_results.iter().find(|r| r.scenario == s.name);
        match stored.filter(|_| cached) {
            Some(r) => results.push(r.clone()),
            None => results.push(evaluate_with(&project.state, s, &cfg, &runner)?),
        }
    }
    let mut out = vec![report::scenario_report(&results, &project.file.scenarios)];
    let rows = sensitivity_rank(&results);
    if rank {
        out.push(report::rank_report(&rows));
    }
    if plot {
        out.push(tornado(&rows));
    }
    if record {
        for r in &results {
            project.file.scenario_results.retain(|x| x.scenario != r.scenario);
            project.file.scenario_results.push(r.clone());
        }
        save_project(&project.file, cli.project_path()?)?;
    }
    Ok(out)
}

/// Text tornado chart: one bar per scenario, scaled to the largest P50 shift.
pub fn tornado(rows: &[sitetwin_core::whatif::TornadoRow]) -> Report {
    const HALF: f64 = 20.0;
    let max = rows.iter().map(|r| r.delta_finish_p50.abs()).fold(0.0, f64::max);
    let mut r = Report::new("tornado", &["scenario", "d_finish_p50_d", "bar"]);
    for t in rows {
        let len = if max > 0.0 { (t.delta_finish_p50.abs() / max * HALF).round() as usize } else { 0 };
        let (l, rr) = if t.delta_finish_p50 < 0.0 { (len, 0) } else { (0, len) };
        let mut bar = String::new();
        let _ = write!(bar, "{}{}|{}{}", " ".repeat(HALF as usize - l), "#".repeat(l), "#".repeat(rr), " ".repeat(HALF as usize - rr));
        r.row(vec![t.scenario.clone(), format_dp(t.delta_finish_p50, 1), format!("[{bar}]")]);
    }
    r
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(io_err(path))
}

fn metrics(
    project: &Project,
    confusion: Option<&Path>,
    iou: Option<&Path>,
    divisions: Option<&Path>,
    quantities: Option<&Path>,
) -> Result<Vec<Report>, CliError> {
    let f = &project.file;
    let from_files = confusion.is_some() || iou.is_some() || divisions.is_some() || quantities.is_some();
    let mut out = Vec::new();
    let matrices = match confusion {
        Some(p) => vec![(p.display().to_string(), ingest::read_confusion(open(p)?)?)],
        None if from_files => Vec::new(),
        None => f.confusion_matrices.iter().map(|m| Ok((m.name.clone(), m.matrix()?))).collect::<Result<_, ProgressError>>()?,
    };
    for (name, m) in matrices {
        out.push(report::classification_table(&name, &classification_metrics(&m)?));
    }
    let iou_rows = match iou {
        Some(p) => ingest::read_iou(open(p)?)?,
        None if from_files => Vec::new(),
        None => f.iou.clone(),
    };
    if !iou_rows.is_empty() {
        out.push(report::iou_table(&iou_rows, &iou_aggregate(&iou_rows)?));
    }
    let div_rows = match divisions {
        Some(p) => ingest::read_divisions(open(p)?)?,
        None if from_files => Vec::new(),
        None => f.division_metrics.clone(),
    };
    if !div_rows.is_empty() {
        out.push(report::division_table(&div_rows, &support_weighted(&div_rows)?));
    }
    let q_rows = match quantities {
        Some(p) => ingest::read_quantities(open(p)?)?,
        None if from_files => Vec::new(),
        None => f.quantities.clone(),
    };
    if !q_rows.is_empty() {
        out.push(report::quantity_table(&q_rows)?);
    }
    if out.is_empty() {
        return Err(CliError::Usage("no metric inputs in the project or on the command line".into()));
    }
    Ok(out)
}

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if e.use_stderr() { write!(stderr, "{}", e.render()) } else { write!(stdout, "{}", e.render()) };
            return code;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}\n\n{}", <Cli as clap::CommandFactory>::command().render_usage());
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let pio = |e| CliError::Io { path: "<stdout>".into(), source: e };
    if let Command::Serve { port, host, trial_cap } = &cli.command {
        let project = cli.load()?;
        let state = crate::service::AppState::new(project, cli.project.clone(), *trial_cap, cli.runner());
        let rt = tokio::runtime::Runtime::new().map_err(pio)?;
        let addr = format!("{host}:{port}");
        return rt.block_on(async {
            let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| CliError::Io { path: addr.clone().into(), source: e })?;
            eprintln!("listening on http://{addr}");
            axum::serve(listener, crate::service::router(state)).await.map_err(pio)
        });
    }
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut prompt = std::io::stderr();
    let out = execute(cli, &mut input, &mut prompt)?;
    match &cli.out {
        Some(dir) => {
            for p in out.write_to(dir, cli.format)? {
                writeln!(stdout, "wrote {}", p.display()).map_err(pio)?;
            }
        }
        None => stdout.write_all(out.render(cli.format).as_bytes()).map_err(pio)?,
    }
    Ok(())
}
