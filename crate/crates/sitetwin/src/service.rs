//! HTTP API over a loaded project.
//!
//! Reads share the state; decisions, scenario results and saves take the
//! single write lock, so the project file has one writer at a time. Every
//! response, including errors, carries the seed and the input hash.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;

use sitetwin_core::leveler::{LevelerError, LevelingSession};
use sitetwin_core::project::cpm_baseline;
use sitetwin_core::stochastic::{criticality_index, weekly_forecast_log, FinishDistribution, McsRunner, Simulation};
use sitetwin_core::whatif::{evaluate_with, kg_query, sensitivity_rank, EvalConfig, QueryContext, Scenario, ScenarioResult, WhatIfError};

use crate::cli::leveling_horizon;
use crate::project_file::{save_project, Project, ProjectError};
use crate::report::{self, Format, Header, Report};
use crate::runner::ThreadedRunner;

pub struct Session {
    pub project: Project,
    pub leveling: Option<LevelingSession>,
    /// Base-state simulation behind the criticality endpoint.
    pub base: Option<Arc<FinishDistribution>>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<RwLock<Session>>,
    save_path: Option<PathBuf>,
    trial_cap: u64,
    runner: ThreadedRunner,
}

impl AppState {
    /// `save_path` receives the project file after every write; `None`
    /// keeps changes in memory.
    pub fn new(project: Project, save_path: Option<PathBuf>, trial_cap: u64, runner: ThreadedRunner) -> Self {
        AppState {
            inner: Arc::new(RwLock::new(Session { project, leveling: None, base: None })),
            save_path,
            trial_cap: trial_cap.max(1),
            runner,
        }
    }

    fn trials(&self, p: &Project, requested: Option<u64>) -> u64 {
        requested.unwrap_or_else(|| p.default_trials()).clamp(1, self.trial_cap)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/state/summary", get(summary))
        .route("/forecast", get(forecast))
        .route("/ev", get(ev))
        .route("/buffers", get(buffers))
        .route("/criticality", get(criticality))
        .route("/scenario/evaluate", post(evaluate))
        .route("/scenarios/rank", get(rank))
        .route("/leveler/recommendation/{week}", get(recommendation))
        .route("/leveler/recommendation/{week}/decision", post(decision))
        .route("/leveler/log", get(leveler_log))
        .route("/kg/query", get(kg))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    field: Option<String>,
    header: Header,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "seed": self.header.seed,
            "input_hash": self.header.input_hash,
            "error": { "message": self.message, "field": self.field },
        });
        (self.status, Json(body)).into_response()
    }
}

fn header_of(p: &Project) -> Header {
    Header { seed: p.seed, input_hash: p.input_hash.clone() }
}

fn fail(p: &Project, status: StatusCode, message: impl Into<String>) -> ApiError {
    ApiError { status, message: message.into(), field: None, header: header_of(p) }
}

fn project_err(p: &Project, e: ProjectError) -> ApiError {
    match e {
        ProjectError::Io { .. } => fail(p, StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        ProjectError::Leveler(l) => leveler_err(p, l),
        other => fail(p, StatusCode::BAD_REQUEST, other.to_string()),
    }
}

fn whatif_err(p: &Project, e: WhatIfError) -> ApiError {
    fail(p, StatusCode::BAD_REQUEST, e.to_string())
}

fn leveler_err(p: &Project, e: LevelerError) -> ApiError {
    let status = match e {
        LevelerError::DuplicateDecision(_) => StatusCode::CONFLICT,
        LevelerError::NoRecommendation(_) => StatusCode::NOT_FOUND,
        _ => StatusCode::BAD_REQUEST,
    };
    let mut err = fail(p, status, e.to_string());
    if matches!(e, LevelerError::EmptyRejectionReason(_)) {
        err.field = Some("reason".into());
    }
    err
}

/// Parses a JSON body, reporting the failing field path.
fn parse_body<T: for<'de> Deserialize<'de>>(p: &Project, body: &str) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_str(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let mut err = fail(p, StatusCode::BAD_REQUEST, e.inner().to_string());
        err.field = (path != ".").then_some(path);
        err
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Wire {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Default, Deserialize)]
struct ReportQuery {
    #[serde(default)]
    format: Wire,
}

/// The JSON envelope or, for `?format=csv`, the same CSV the CLI writes.
fn respond<T: Serialize>(p: &Project, q: &ReportQuery, data: T, table: impl FnOnce() -> Report) -> Response {
    let h = header_of(p);
    match q.format {
        Wire::Json => Json(json!({ "seed": h.seed, "input_hash": h.input_hash, "data": data })).into_response(),
        Wire::Csv => ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], table().render(&h, Format::Csv)).into_response(),
    }
}

fn envelope<T: Serialize>(p: &Project, data: T) -> Response {
    respond(p, &ReportQuery::default(), data, || unreachable!("json only"))
}

async fn summary(State(app): State<AppState>) -> Response {
    let s = app.inner.read().await;
    let p = &s.project;
    let f = &p.file;
    let cpm = cpm_baseline(&p.state.network, &p.state.axis());
    envelope(
        p,
        json!({
            "name": f.metadata.name,
            "region": f.metadata.region,
            "start": f.metadata.start,
            "calendar": p.state.calendar.name,
            "activities": f.activities.len(),
            "relations": f.relations.len(),
            "resource_pools": f.pools.len(),
            "cost_items": f.ledger.items().len(),
            "ledger_total": f.ledger.total(),
            "cpm_finish_workdays": cpm.project_finish,
            "critical_path": cpm.critical_set(&p.state.network),
            "scenarios": f.scenarios.iter().map(|s| &s.name).collect::<Vec<_>>(),
            "cached_results": f.scenario_results.len(),
            "decisions": f.decisions.len(),
            "kg_nodes": p.state.graph.nodes().count(),
            "kg_edges": p.state.graph.edges().count(),
            "default_trials": p.default_trials(),
            "trial_cap": app.trial_cap,
        }),
    )
}

async fn forecast(State(app): State<AppState>, Query(q): Query<ReportQuery>) -> Response {
    let s = app.inner.read().await;
    let log = weekly_forecast_log(&s.project.file.forecast_history);
    respond(&s.project, &q, &log, || report::forecast_report(&log))
}

async fn ev(State(app): State<AppState>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let s = app.inner.read().await;
    let p = &s.project;
    let series = p.ev_series().map_err(|e| project_err(p, e))?.ok_or_else(|| fail(p, StatusCode::NOT_FOUND, "project has no earned_value section"))?;
    Ok(respond(p, &q, &series, || report::ev_report(&series, None)))
}

async fn buffers(State(app): State<AppState>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let s = app.inner.read().await;
    let p = &s.project;
    let ledger = p.buffer_ledger().map_err(|e| project_err(p, e))?.ok_or_else(|| fail(p, StatusCode::NOT_FOUND, "project has no buffers section"))?;
    let target = p.file.buffers.as_ref().map_or(35.0, |b| b.project_target_pct);
    Ok(respond(p, &q, &ledger, || report::buffers_report(&ledger, target)))
}

/// The cached base simulation, run once on first use.
async fn base_distribution(app: &AppState) -> Result<Arc<FinishDistribution>, ApiError> {
    if let Some(d) = app.inner.read().await.base.clone() {
        return Ok(d);
    }
    let mut s = app.inner.write().await;
    if let Some(d) = s.base.clone() {
        return Ok(d);
    }
    let p = &s.project;
    let (state, seed, n, runner) = (p.state.clone(), p.seed, app.trials(p, None), app.runner);
    let d = tokio::task::spawn_blocking(move || {
        let sim = Simulation::new(&state.network, &state.posteriors, state.axis(), seed)?;
        runner.run(&sim, n)
    })
    .await
    .map_err(|e| fail(&s.project, StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| fail(&s.project, StatusCode::BAD_REQUEST, e.to_string()))?;
    let d = Arc::new(d);
    s.base = Some(d.clone());
    Ok(d)
}

#[derive(Serialize)]
struct CriticalityRow<'a> {
    activity_id: &'a str,
    description: &'a str,
    criticality_pct: f64,
    mean_d: f64,
    sd_d: f64,
}

async fn criticality(State(app): State<AppState>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let d = base_distribution(&app).await?;
    let s = app.inner.read().await;
    let st = &s.project.state;
    let ci = criticality_index(&d);
    let mut rows: Vec<CriticalityRow> = ci
        .iter()
        .map(|(id, c)| {
            let post = &st.posteriors[id];
            let desc = st.network.get(id).map_or("", |a| a.description.as_str());
            CriticalityRow { activity_id: id, description: desc, criticality_pct: *c, mean_d: post.mean(), sd_d: post.sd() }
        })
        .collect();
    rows.sort_by(|a, b| b.criticality_pct.total_cmp(&a.criticality_pct).then(a.activity_id.cmp(b.activity_id)));
    Ok(respond(&s.project, &q, json!({ "trials": d.n_trials, "rows": rows }), || {
        report::criticality_report(&st.network, &st.posteriors, &d)
    }))
}

#[derive(Debug, Default, Deserialize)]
struct EvalQuery {
    trials: Option<u64>,
}

async fn run_eval(app: &AppState, scenario: Scenario, trials: Option<u64>) -> Result<ScenarioResult, ApiError> {
    let (state, cfg) = {
        let s = app.inner.read().await;
        let p = &s.project;
        (p.state.clone(), EvalConfig::new(app.trials(p, trials), p.seed))
    };
    let runner = app.runner;
    let res = tokio::task::spawn_blocking(move || evaluate_with(&state, &scenario, &cfg, &runner)).await;
    let s = app.inner.read().await;
    res.map_err(|e| fail(&s.project, StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?.map_err(|e| whatif_err(&s.project, e))
}

/// Stores a result in the scenario cache and persists the file.
async fn cache_result(app: &AppState, scenario: Option<Scenario>, result: &ScenarioResult) -> Result<(), ApiError> {
    let mut s = app.inner.write().await;
    let f = &mut s.project.file;
    if let Some(sc) = scenario {
        if !f.scenarios.iter().any(|x| x.name == sc.name) {
            f.scenarios.push(sc);
        }
    }
    f.scenario_results.retain(|r| r.scenario != result.scenario);
    f.scenario_results.push(result.clone());
    persist(app, &mut s)
}

fn persist(app: &AppState, s: &mut Session) -> Result<(), ApiError> {
    s.project.refresh_hash();
    if let Some(path) = &app.save_path {
        save_project(&s.project.file, path).map_err(|e| project_err(&s.project, e))?;
    }
    Ok(())
}

async fn evaluate(State(app): State<AppState>, Query(q): Query<EvalQuery>, body: String) -> Result<Response, ApiError> {
    let scenario: Scenario = {
        let s = app.inner.read().await;
        parse_body(&s.project, &body)?
    };
    let result = run_eval(&app, scenario.clone(), q.trials).await?;
    cache_result(&app, Some(scenario), &result).await?;
    let s = app.inner.read().await;
    Ok(envelope(&s.project, &result))
}

async fn rank(State(app): State<AppState>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let missing: Vec<Scenario> = {
        let s = app.inner.read().await;
        let f = &s.project.file;
        f.scenarios.iter().filter(|sc| !f.scenario_results.iter().any(|r| r.scenario == sc.name)).cloned().collect()
    };
    for sc in missing {
        let r = run_eval(&app, sc, None).await?;
        cache_result(&app, None, &r).await?;
    }
    let s = app.inner.read().await;
    let f = &s.project.file;
    let results: Vec<ScenarioResult> =
        f.scenarios.iter().filter_map(|sc| f.scenario_results.iter().find(|r| r.scenario == sc.name).cloned()).collect();
    let rows = sensitivity_rank(&results);
    Ok(respond(&s.project, &q, &rows, || report::rank_report(&rows)))
}

/// The leveling session, built and trained on first use.
fn leveling<'a>(s: &'a mut Session) -> Result<&'a mut LevelingSession, ApiError> {
    if s.leveling.is_none() {
        let built = s.project.leveling_session().map_err(|e| project_err(&s.project, e))?;
        s.leveling = Some(built.ok_or_else(|| fail(&s.project, StatusCode::NOT_FOUND, "project has no leveling section"))?);
    }
    Ok(s.leveling.as_mut().expect("built above"))
}

fn check_week(s: &mut Session, week: u32) -> Result<(), ApiError> {
    let horizon = leveling_horizon(leveling(s)?);
    if week == 0 || week > horizon {
        return Err(fail(&s.project, StatusCode::NOT_FOUND, format!("week {week} is outside the 1..={horizon} plan")));
    }
    Ok(())
}

async fn recommendation(State(app): State<AppState>, Path(week): Path<u32>) -> Result<Response, ApiError> {
    let mut s = app.inner.write().await;
    check_week(&mut s, week)?;
    let r = leveling(&mut s)?.recommend(week);
    match r {
        Ok(r) => Ok(envelope(&s.project, r)),
        Err(e) => Err(leveler_err(&s.project, e)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecisionBody {
    adopt: bool,
    #[serde(default)]
    reason: String,
}

async fn decision(State(app): State<AppState>, Path(week): Path<u32>, body: String) -> Result<Response, ApiError> {
    let mut s = app.inner.write().await;
    let d: DecisionBody = parse_body(&s.project, &body)?;
    check_week(&mut s, week)?;
    let l = leveling(&mut s)?;
    let rec = l.recommend(week).and_then(|_| l.record_decision(week, d.adopt, &d.reason).cloned());
    let rec = match rec {
        Ok(r) => r,
        Err(e) => return Err(leveler_err(&s.project, e)),
    };
    let log = leveling(&mut s)?.log().to_vec();
    s.project.file.decisions = log;
    persist(&app, &mut s)?;
    Ok(envelope(&s.project, rec))
}

async fn leveler_log(State(app): State<AppState>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let mut s = app.inner.write().await;
    let l = leveling(&mut s)?;
    let (log, ot) = (l.log().to_vec(), l.overtime_report());
    let data: Value = json!({ "log": log, "overtime": ot });
    Ok(respond(&s.project, &q, data, || report::leveling_report(&log, &ot)))
}

#[derive(Debug, Deserialize)]
struct KgQuery {
    pattern: Option<String>,
}

async fn kg(State(app): State<AppState>, Query(q): Query<KgQuery>) -> Result<Response, ApiError> {
    let Some(pattern) = q.pattern.filter(|p| !p.trim().is_empty()) else {
        let s = app.inner.read().await;
        let mut e = fail(&s.project, StatusCode::BAD_REQUEST, "missing query parameter");
        e.field = Some("pattern".into());
        return Err(e);
    };
    let mut ctx = QueryContext::default();
    if pattern.contains("criticality") {
        ctx.criticality = criticality_index(&*base_distribution(&app).await?);
    }
    let s = app.inner.read().await;
    let res = kg_query(&s.project.state.graph, &pattern, &ctx).map_err(|e| {
        let mut err = whatif_err(&s.project, e);
        err.field = Some("pattern".into());
        err
    })?;
    Ok(envelope(&s.project, res))
}
