//! The versioned project file and its resolution into a twin state.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use sitetwin_core::cost::{CostLedger, LocalizationFactors};
use sitetwin_core::earned_value::{rollup, EvError, EvSeries, MeasuredProgress};
use sitetwin_core::leveler::{
    greedy_baseline, sixteen_week_instance, train_policy, DecisionRecord, LevelerError, LevelingInstance, LevelingSession,
    ObjectiveWeights, PolicyConfig, PriorityRule, ResourcePool,
};
use sitetwin_core::progress::{ConfusionMatrix, DivisionMetrics, IouEntry, ProgressError, WbsQuantity};
use sitetwin_core::project::{build_network, Activity, Calendar, NetworkError, PrecedenceRelation};
use sitetwin_core::stochastic::{
    bayesian_update_batch, replay_buffers, BufferLedger, DurationPosterior, DurationPrior, Evidence, ForecastEntry,
    StochasticError, DEFAULT_SAMPLES,
};
use sitetwin_core::whatif::{apply_scenario, KnowledgeGraph, Scenario, ScenarioResult, TwinState, WhatIfError};
use sitetwin_core::Money;

/// Schema tag written to and required from every project file.
pub const SCHEMA: &str = "sitetwin/1";

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("schema error at line {line}, column {column}, field `{field}`: {message}")]
    Schema { line: usize, column: usize, field: String, message: String },
    #[error("reference error: {id:?} {message}")]
    Reference { id: String, message: String },
    #[error("invalid project: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Ev(#[from] EvError),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    Leveler(#[from] LevelerError),
    #[error(transparent)]
    Progress(#[from] ProgressError),
}

impl ProjectError {
    fn reference(id: impl Into<String>, message: impl Into<String>) -> Self {
        ProjectError::Reference { id: id.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub name: String,
    #[serde(default)]
    pub region: String,
    pub seed: u64,
    /// Data date of elapsed-day zero.
    pub start: NaiveDate,
    /// Name of the calendar the network runs on; the first one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calendar: Option<String>,
    /// Monte-Carlo trials when the command line does not say.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
}

/// Cumulative totals for one reporting period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvTotals {
    pub period: String,
    pub pv: Money,
    pub ev: Money,
    pub ac: Money,
}

/// Earned-value inputs: either item curves with measured progress, or
/// already rolled-up project totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvSection {
    pub bac: Money,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub periods: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub budget_items: Vec<sitetwin_core::earned_value::BudgetItem>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measured: MeasuredProgress,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub totals: Vec<EvTotals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMatrix {
    pub name: String,
    pub classes: Vec<String>,
    /// Rows are predicted classes, columns actual classes.
    pub counts: Vec<Vec<u64>>,
}

impl NamedMatrix {
    pub fn matrix(&self) -> Result<ConfusionMatrix, ProgressError> {
        ConfusionMatrix::new(self.classes.clone(), self.counts.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferRow {
    pub week: u32,
    pub feeding_delta: f64,
    pub project_delta: f64,
}

fn default_target() -> f64 {
    35.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferSection {
    pub feeding_size: f64,
    pub project_size: f64,
    /// Project-buffer use (percent) that still counts as healthy.
    #[serde(default = "default_target")]
    pub project_target_pct: f64,
    pub rows: Vec<BufferRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum LevelingSource {
    /// Tasks from the activity network and the declared pools.
    Network {
        #[serde(default)]
        weights: ObjectiveWeights,
    },
    /// The bundled sixteen-week look-ahead.
    SixteenWeek,
    Explicit { instance: LevelingInstance },
}

fn default_rule() -> PriorityRule {
    PriorityRule::LatestFinish
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelingSection {
    pub instance: LevelingSource,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default = "default_rule")]
    pub baseline_rule: PriorityRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub schema: String,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calendars: Vec<Calendar>,
    pub activities: Vec<Activity>,
    #[serde(default)]
    pub relations: Vec<PrecedenceRelation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pools: Vec<ResourcePool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub earned_value: Option<EvSection>,
    #[serde(default)]
    pub ledger: CostLedger,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization: Option<LocalizationFactors>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub priors: BTreeMap<String, DurationPrior>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<Evidence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantities: Vec<WbsQuantity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub confusion_matrices: Vec<NamedMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iou: Vec<IouEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub division_metrics: Vec<DivisionMetrics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forecast_history: Vec<ForecastEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffers: Option<BufferSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leveling: Option<LevelingSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<Scenario>,
    #[serde(default)]
    pub knowledge_graph: KnowledgeGraph,
    /// Decision log of the leveling loop, replayed on load.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decisions: Vec<DecisionRecord>,
    /// Cached scenario evaluations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scenario_results: Vec<ScenarioResult>,
}

impl ProjectFile {
    /// An empty project on the standard calendar.
    pub fn new(name: impl Into<String>, seed: u64, start: NaiveDate) -> Self {
        ProjectFile {
            schema: SCHEMA.into(),
            metadata: Metadata { name: name.into(), region: String::new(), seed, start, calendar: None, trials: None },
            calendars: vec![Calendar::standard()],
            activities: Vec::new(),
            relations: Vec::new(),
            pools: Vec::new(),
            earned_value: None,
            ledger: CostLedger::default(),
            localization: None,
            priors: BTreeMap::new(),
            evidence: Vec::new(),
            quantities: Vec::new(),
            confusion_matrices: Vec::new(),
            iou: Vec::new(),
            division_metrics: Vec::new(),
            forecast_history: Vec::new(),
            buffers: None,
            leveling: None,
            scenarios: Vec::new(),
            knowledge_graph: KnowledgeGraph::default(),
            decisions: Vec::new(),
            scenario_results: Vec::new(),
        }
    }

    /// Pretty JSON with a trailing newline; the on-disk form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("project files always serialize");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("project files always serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Parses a project file. Syntax and type errors carry line, column and the
/// dotted field path.
pub fn parse_project(text: &str) -> Result<ProjectFile, ProjectError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ProjectError::Schema {
        line: e.line(),
        column: e.column(),
        field: String::new(),
        message: e.to_string(),
    })?;
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(SCHEMA) => {}
        Some(other) => {
            return Err(ProjectError::Schema {
                line: 1,
                column: 1,
                field: "schema".into(),
                message: format!("unsupported schema {other:?}, expected {SCHEMA:?}"),
            })
        }
        None => {
            return Err(ProjectError::Schema { line: 1, column: 1, field: "schema".into(), message: "missing schema tag".into() })
        }
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ProjectError::Schema { line: inner.line(), column: inner.column(), field, message: inner.to_string() }
    })
}

/// A resolved project: the file, the twin state built from it, and the
/// content hash every report carries.
#[derive(Debug, Clone)]
pub struct Project {
    pub file: ProjectFile,
    pub state: TwinState,
    pub seed: u64,
    pub input_hash: String,
}

impl Project {
    /// Resolves with the file's own seed.
    pub fn from_file(file: ProjectFile) -> Result<Self, ProjectError> {
        let seed = file.metadata.seed;
        Self::with_seed(file, seed)
    }

    /// Resolves with `seed` driving prior sampling, trials and training.
    pub fn with_seed(file: ProjectFile, seed: u64) -> Result<Self, ProjectError> {
        let state = resolve(&file, seed, None)?;
        let input_hash = file.content_hash();
        Ok(Project { file, state, seed, input_hash })
    }

    /// Twin state using only evidence up to `week`.
    pub fn state_as_of(&self, week: u32) -> Result<TwinState, ProjectError> {
        resolve(&self.file, self.seed, Some(week))
    }

    pub fn refresh_hash(&mut self) {
        self.input_hash = self.file.content_hash();
    }

    pub fn default_trials(&self) -> u64 {
        self.file.metadata.trials.unwrap_or(10_000)
    }

    pub fn ev_series(&self) -> Result<Option<EvSeries>, ProjectError> {
        let Some(ev) = &self.file.earned_value else { return Ok(None) };
        if !ev.budget_items.is_empty() {
            return Ok(Some(rollup(&ev.budget_items, &ev.measured, &ev.periods)?));
        }
        Ok(Some(EvSeries::from_totals(ev.bac, ev.totals.iter().map(|t| (t.period.as_str(), t.pv, t.ev, t.ac)))))
    }

    pub fn buffer_ledger(&self) -> Result<Option<BufferLedger>, ProjectError> {
        let Some(b) = &self.file.buffers else { return Ok(None) };
        let rows: Vec<(u32, f64, f64)> = b.rows.iter().map(|r| (r.week, r.feeding_delta, r.project_delta)).collect();
        Ok(Some(replay_buffers(b.feeding_size, b.project_size, &rows)?))
    }

    /// The leveling instance, its baseline plan and a trained policy, with
    /// the stored decision log replayed onto it.
    pub fn leveling_session(&self) -> Result<Option<LevelingSession>, ProjectError> {
        let Some(l) = &self.file.leveling else { return Ok(None) };
        let inst = match &l.instance {
            LevelingSource::Network { weights } => {
                LevelingInstance::from_network(&self.state.network, self.file.pools.clone(), *weights)?
            }
            LevelingSource::SixteenWeek => sixteen_week_instance()?,
            LevelingSource::Explicit { instance } => instance.clone(),
        };
        let baseline = greedy_baseline(&inst, l.baseline_rule)?;
        let policy = train_policy(&inst, &baseline, l.policy, self.seed);
        let mut session = LevelingSession::new(inst, policy, baseline);
        for d in &self.file.decisions {
            let r = &d.recommendation;
            let issued = session.recommend(r.week)?;
            if issued.action != r.action {
                return Err(ProjectError::Invalid(format!(
                    "decision log week {} records {:?} but the policy recommends {:?}",
                    r.week, r.action, issued.action
                )));
            }
            let adopted = r.adopted == sitetwin_core::leveler::Adoption::Yes;
            let reason = if adopted { r.notes.as_str() } else { r.rejection_reason.as_str() };
            session.record_decision(r.week, adopted, reason)?;
        }
        Ok(Some(session))
    }
}

fn resolve(file: &ProjectFile, seed: u64, as_of: Option<u32>) -> Result<TwinState, ProjectError> {
    let network = build_network(file.activities.clone(), file.relations.clone()).map_err(|e| match e {
        NetworkError::DanglingReference(id) => ProjectError::reference(id, "is not a declared activity"),
        other => ProjectError::Invalid(other.to_string()),
    })?;
    let calendar = match &file.metadata.calendar {
        Some(name) => file
            .calendars
            .iter()
            .find(|c| &c.name == name)
            .cloned()
            .ok_or_else(|| ProjectError::reference(name, "is not a declared calendar"))?,
        None => file.calendars.first().cloned().unwrap_or_else(Calendar::standard),
    };
    let pools: BTreeSet<&str> = file.pools.iter().map(|p| p.resource_id.as_str()).collect();
    for a in &file.activities {
        if let Some(r) = a.resource_demands.keys().find(|r| !pools.contains(r.as_str())) {
            return Err(ProjectError::reference(r, format!("demanded by {} is not a declared pool", a.id)));
        }
    }
    for id in file.priors.keys() {
        if network.get(id).is_none() {
            return Err(ProjectError::reference(id, "has a prior but is not a declared activity"));
        }
    }
    for e in &file.evidence {
        if network.get(&e.activity_id).is_none() {
            return Err(ProjectError::reference(&e.activity_id, "has evidence but is not a declared activity"));
        }
    }
    for i in file.ledger.items() {
        if let Some(a) = &i.activity_id {
            if network.get(a).is_none() {
                return Err(ProjectError::reference(a, format!("linked from cost item {} is not a declared activity", i.item_id)));
            }
        }
    }
    if let Some(ev) = &file.earned_value {
        let items: BTreeSet<&str> = ev.budget_items.iter().map(|b| b.id.as_str()).collect();
        if let Some(id) = ev.measured.keys().find(|k| !items.contains(k.as_str())) {
            return Err(ProjectError::reference(id, "has measured progress but no budget item"));
        }
    }
    let mut posteriors = BTreeMap::new();
    for a in network.activities() {
        let post = match file.priors.get(&a.id) {
            Some(prior) => {
                let p = DurationPosterior::from_prior(prior, &a.id, seed, DEFAULT_SAMPLES)?;
                let mut ev: Vec<Evidence> = file
                    .evidence
                    .iter()
                    .filter(|e| e.activity_id == a.id && as_of.is_none_or(|w| e.week <= w))
                    .cloned()
                    .collect();
                ev.sort_by_key(|e| e.week);
                if ev.is_empty() {
                    p
                } else {
                    bayesian_update_batch(&p, &ev)?
                }
            }
            None => DurationPosterior::fixed(a.baseline_duration),
        };
        posteriors.insert(a.id.clone(), post);
    }
    let state = TwinState::new(
        file.metadata.name.clone(),
        file.metadata.start,
        calendar,
        network,
        file.pools.clone(),
        file.ledger.clone(),
        posteriors,
        file.knowledge_graph.clone(),
    )
    .map_err(|e| match e {
        WhatIfError::UnknownTarget(id) => ProjectError::reference(id, "is not a declared activity"),
        other => ProjectError::Invalid(other.to_string()),
    })?;
    for s in &file.scenarios {
        apply_scenario(&state, s).map_err(|e| match e {
            WhatIfError::UnknownTarget(id) => ProjectError::reference(id, format!("targeted by scenario {:?} does not exist", s.name)),
            other => ProjectError::Invalid(format!("scenario {:?}: {other}", s.name)),
        })?;
    }
    Ok(state)
}

pub fn read_project_file(path: &Path) -> Result<ProjectFile, ProjectError> {
    let text = fs::read_to_string(path).map_err(|source| ProjectError::Io { path: path.display().to_string(), source })?;
    parse_project(&text)
}

pub fn load_project(path: &Path) -> Result<Project, ProjectError> {
    Project::from_file(read_project_file(path)?)
}

pub fn save_project(file: &ProjectFile, path: &Path) -> Result<(), ProjectError> {
    fs::write(path, file.to_json()).map_err(|source| ProjectError::Io { path: path.display().to_string(), source })
}
