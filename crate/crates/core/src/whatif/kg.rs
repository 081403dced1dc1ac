//! Typed knowledge graph linking WBS, model elements, cost codes, vendors,
//! crews and activities, with path-pattern queries and an edit audit.
//!
//! Pattern syntax: `type(args) -label-> type(args) ...` where `args` is an
//! optional quoted text match on id or label followed by comma-separated
//! filters `key op number-or-word`. `criticality` filters against live
//! criticality indices (percent); other keys compare node attributes. A label
//! of `*` matches any edge.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::WhatIfError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeType {
    Wbs,
    BimElement,
    CostCode,
    Vendor,
    Crew,
    Activity,
}

impl NodeType {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeType::Wbs => "wbs",
            NodeType::BimElement => "bim_element",
            NodeType::CostCode => "cost_code",
            NodeType::Vendor => "vendor",
            NodeType::Crew => "crew",
            NodeType::Activity => "activity",
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeType {
    type Err = WhatIfError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "wbs" => NodeType::Wbs,
            "bim_element" => NodeType::BimElement,
            "cost_code" => NodeType::CostCode,
            "vendor" => NodeType::Vendor,
            "crew" => NodeType::Crew,
            "activity" => NodeType::Activity,
            _ => return Err(WhatIfError::MalformedPattern(format!("unknown node type {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub kind: NodeType,
    pub id: String,
}

impl NodeRef {
    pub fn new(kind: NodeType, id: impl Into<String>) -> Self {
        NodeRef { kind, id: id.into() }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeType,
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub attrs: BTreeMap<String, String>,
}

impl Node {
    pub fn new(kind: NodeType, id: impl Into<String>, label: impl Into<String>) -> Self {
        Node { kind, id: id.into(), label: label.into(), attrs: BTreeMap::new() }
    }

    pub fn with_attr(mut self, k: impl Into<String>, v: impl Into<String>) -> Self {
        self.attrs.insert(k.into(), v.into());
        self
    }

    pub fn key(&self) -> NodeRef {
        NodeRef::new(self.kind, self.id.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeRef,
    pub label: String,
    pub to: NodeRef,
}

/// Who changed the graph, when and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    pub who: String,
    pub when: String,
    pub why: String,
}

impl Audit {
    pub fn new(who: impl Into<String>, when: impl Into<String>, why: impl Into<String>) -> Self {
        Audit { who: who.into(), when: when.into(), why: why.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub change: String,
    #[serde(flatten)]
    pub audit: Audit,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct KnowledgeGraph {
    nodes: BTreeMap<NodeRef, Node>,
    edges: BTreeSet<Edge>,
    audit: Vec<AuditEntry>,
}

#[derive(Serialize, Deserialize, Default)]
struct RawGraph {
    #[serde(default)]
    nodes: Vec<Node>,
    #[serde(default)]
    edges: Vec<Edge>,
    #[serde(default)]
    audit: Vec<AuditEntry>,
}

impl TryFrom<RawGraph> for KnowledgeGraph {
    type Error = WhatIfError;
    fn try_from(r: RawGraph) -> Result<Self, Self::Error> {
        let mut g = KnowledgeGraph::default();
        for n in r.nodes {
            if g.nodes.insert(n.key(), n.clone()).is_some() {
                return Err(WhatIfError::DuplicateNode(n.key().to_string()));
            }
        }
        for e in r.edges {
            g.check_endpoints(&e)?;
            g.edges.insert(e);
        }
        g.audit = r.audit;
        Ok(g)
    }
}

impl From<KnowledgeGraph> for RawGraph {
    fn from(g: KnowledgeGraph) -> Self {
        RawGraph { nodes: g.nodes.into_values().collect(), edges: g.edges.into_iter().collect(), audit: g.audit }
    }
}

impl KnowledgeGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node(&self, r: &NodeRef) -> Option<&Node> {
        self.nodes.get(r)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn audit(&self) -> &[AuditEntry] {
        &self.audit
    }

    fn log(&mut self, change: String, audit: Audit) {
        let seq = self.audit.len() as u64 + 1;
        self.audit.push(AuditEntry { seq, change, audit });
    }

    fn check_endpoints(&self, e: &Edge) -> Result<(), WhatIfError> {
        for end in [&e.from, &e.to] {
            if !self.nodes.contains_key(end) {
                return Err(WhatIfError::DanglingEdge(end.to_string()));
            }
        }
        Ok(())
    }

    pub fn add_node(&mut self, node: Node, audit: Audit) -> Result<(), WhatIfError> {
        let key = node.key();
        if self.nodes.contains_key(&key) {
            return Err(WhatIfError::DuplicateNode(key.to_string()));
        }
        self.nodes.insert(key.clone(), node);
        self.log(format!("add node {key}"), audit);
        Ok(())
    }

    pub fn add_edge(&mut self, from: NodeRef, label: impl Into<String>, to: NodeRef, audit: Audit) -> Result<(), WhatIfError> {
        let e = Edge { from, label: label.into(), to };
        self.check_endpoints(&e)?;
        let change = format!("add edge {} -{}-> {}", e.from, e.label, e.to);
        if self.edges.insert(e) {
            self.log(change, audit);
        }
        Ok(())
    }

    /// Removes an edge; returns whether it existed.
    pub fn remove_edge(&mut self, from: &NodeRef, label: &str, to: &NodeRef, audit: Audit) -> bool {
        let e = Edge { from: from.clone(), label: String::from(label), to: to.clone() };
        let had = self.edges.remove(&e);
        if had {
            self.log(format!("remove edge {from} -{label}-> {to}"), audit);
        }
        had
    }

    fn out_edges<'a>(&'a self, from: &'a NodeRef) -> impl Iterator<Item = &'a Edge> + 'a {
        let lo = Edge { from: from.clone(), label: String::new(), to: NodeRef::new(NodeType::Wbs, "") };
        self.edges.range(lo..).take_while(move |e| &e.from == from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl CmpOp {
    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Le => a <= b,
            CmpOp::Lt => a < b,
            CmpOp::Eq => a == b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    pub key: String,
    pub op: CmpOp,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub kind: NodeType,
    /// Case-insensitive substring of id or label.
    pub text: Option<String>,
    pub filters: Vec<Filter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPattern {
    pub steps: Vec<Step>,
    /// Edge labels between consecutive steps; `*` matches any.
    pub labels: Vec<String>,
}

struct Lexer<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, what: &str) -> WhatIfError {
        WhatIfError::MalformedPattern(format!("{what} at offset {}", self.pos))
    }

    fn ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, t: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(t) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Option<&'a str> {
        self.ws();
        let rest = &self.s[self.pos..];
        let n = rest.find(|c: char| c.is_whitespace() || c == ',' || c == ')' || c == '%').unwrap_or(rest.len());
        if n == 0 {
            return None;
        }
        self.pos += n;
        Some(&rest[..n])
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.ws();
        let rest = &self.s[self.pos..];
        let n = rest.find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '*')).unwrap_or(rest.len());
        if n == 0 {
            return None;
        }
        self.pos += n;
        Some(&rest[..n])
    }

    fn quoted(&mut self) -> Result<Option<String>, WhatIfError> {
        self.ws();
        if !self.s[self.pos..].starts_with('"') {
            return Ok(None);
        }
        let rest = &self.s[self.pos + 1..];
        let end = rest.find('"').ok_or_else(|| self.err("unterminated string"))?;
        self.pos += end + 2;
        Ok(Some(String::from(&rest[..end])))
    }

    fn done(&mut self) -> bool {
        self.ws();
        self.pos == self.s.len()
    }
}

impl FromStr for PathPattern {
    type Err = WhatIfError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lx = Lexer { s, pos: 0 };
        let mut steps = Vec::new();
        let mut labels = Vec::new();
        loop {
            let kind: NodeType = lx.ident().ok_or_else(|| lx.err("expected node type"))?.parse()?;
            let mut step = Step { kind, text: None, filters: Vec::new() };
            if lx.eat("(") {
                step.text = lx.quoted()?;
                let mut first = step.text.is_none();
                while !lx.eat(")") {
                    if !first && !lx.eat(",") {
                        return Err(lx.err("expected ',' or ')'"));
                    }
                    first = false;
                    let key = lx.ident().ok_or_else(|| lx.err("expected filter key"))?;
                    let op = [(">=", CmpOp::Ge), ("<=", CmpOp::Le), (">", CmpOp::Gt), ("<", CmpOp::Lt), ("=", CmpOp::Eq)]
                        .into_iter()
                        .find(|(t, _)| lx.eat(t))
                        .map(|x| x.1)
                        .ok_or_else(|| lx.err("expected comparison"))?;
                    let value = match lx.quoted()? {
                        Some(v) => v,
                        None => String::from(lx.word().ok_or_else(|| lx.err("expected value"))?),
                    };
                    lx.eat("%");
                    step.filters.push(Filter { key: String::from(key), op, value });
                }
            }
            steps.push(step);
            if lx.done() {
                break;
            }
            if !lx.eat("-") {
                return Err(lx.err("expected '-label->'"));
            }
            let label = lx.ident().ok_or_else(|| lx.err("expected edge label"))?;
            if !lx.eat("->") {
                return Err(lx.err("expected '->'"));
            }
            labels.push(String::from(label));
        }
        Ok(PathPattern { steps, labels })
    }
}

/// Live data a query may join against.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryContext {
    /// Activity id to criticality index in percent.
    pub criticality: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    /// Every matching path, as node sequences.
    pub paths: Vec<Vec<NodeRef>>,
    pub nodes: BTreeSet<NodeRef>,
    pub edges: BTreeSet<Edge>,
}

impl QueryResult {
    /// Distinct nodes in the first position of the matched paths.
    pub fn heads(&self) -> BTreeSet<NodeRef> {
        self.paths.iter().filter_map(|p| p.first().cloned()).collect()
    }
}

fn step_matches(step: &Step, n: &Node, ctx: &QueryContext) -> bool {
    if n.kind != step.kind {
        return false;
    }
    if let Some(t) = &step.text {
        let t = t.to_lowercase();
        if !n.id.to_lowercase().contains(&t) && !n.label.to_lowercase().contains(&t) {
            return false;
        }
    }
    step.filters.iter().all(|f| {
        let actual: Option<String> = if f.key == "criticality" {
            let id = n.attrs.get("activity_id").unwrap_or(&n.id);
            ctx.criticality.get(id).map(|c| format!("{c}"))
        } else if f.key == "id" {
            Some(n.id.clone())
        } else {
            n.attrs.get(&f.key).cloned()
        };
        let Some(actual) = actual else { return false };
        match (actual.parse::<f64>(), f.value.parse::<f64>()) {
            (Ok(a), Ok(b)) => f.op.holds(a, b),
            _ => f.op == CmpOp::Eq && actual == f.value,
        }
    })
}

pub fn kg_query(g: &KnowledgeGraph, pattern: &str, ctx: &QueryContext) -> Result<QueryResult, WhatIfError> {
    let p: PathPattern = pattern.parse()?;
    Ok(kg_match(g, &p, ctx))
}

pub fn kg_match(g: &KnowledgeGraph, p: &PathPattern, ctx: &QueryContext) -> QueryResult {
    let mut partial: Vec<(Vec<NodeRef>, Vec<Edge>)> =
        g.nodes().filter(|n| step_matches(&p.steps[0], n, ctx)).map(|n| (alloc::vec![n.key()], Vec::new())).collect();
    for (k, step) in p.steps.iter().enumerate().skip(1) {
        let label = &p.labels[k - 1];
        let mut next = Vec::new();
        for (path, edges) in &partial {
            let last = path.last().unwrap();
            for e in g.out_edges(last) {
                if (label == "*" || &e.label == label) && g.node(&e.to).is_some_and(|n| step_matches(step, n, ctx)) {
                    let mut p2 = path.clone();
                    p2.push(e.to.clone());
                    let mut e2 = edges.clone();
                    e2.push(e.clone());
                    next.push((p2, e2));
                }
            }
        }
        partial = next;
    }
    let mut out = QueryResult::default();
    for (path, edges) in partial {
        out.nodes.extend(path.iter().cloned());
        out.edges.extend(edges);
        out.paths.push(path);
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    fn a() -> Audit {
        Audit::new("scheduler", "2025-10-01", "fixture")
    }

    /// Ten nodes: three vendors, three cost codes, three activities, one crew.
    pub(crate) fn fixture() -> KnowledgeGraph {
        use NodeType::*;
        let mut g = KnowledgeGraph::default();
        let nodes = [
            Node::new(Vendor, "V-ALU", "Lone Star Aluminum"),
            Node::new(Vendor, "V-GLS", "Trinity Glass"),
            Node::new(Vendor, "V-STL", "Brazos Steel"),
            Node::new(CostCode, "08 44 13", "Glazed curtain wall"),
            Node::new(CostCode, "08 80 00", "Glazing"),
            Node::new(CostCode, "05 12 00", "Structural steel"),
            Node::new(Activity, "A-CW", "Curtainwall install"),
            Node::new(Activity, "A-GLZ", "Corridor glazing"),
            Node::new(Activity, "A-STL", "Steel erection"),
            Node::new(Crew, "C-GLZ", "Glazing crew"),
        ];
        for n in nodes {
            g.add_node(n, a()).unwrap();
        }
        let e = |g: &mut KnowledgeGraph, f: (NodeType, &str), l: &str, t: (NodeType, &str)| {
            g.add_edge(NodeRef::new(f.0, f.1), l, NodeRef::new(t.0, t.1), a()).unwrap()
        };
        e(&mut g, (Vendor, "V-ALU"), "supplies", (CostCode, "08 44 13"));
        e(&mut g, (Vendor, "V-GLS"), "supplies", (CostCode, "08 44 13"));
        e(&mut g, (Vendor, "V-GLS"), "supplies", (CostCode, "08 80 00"));
        e(&mut g, (Vendor, "V-STL"), "supplies", (CostCode, "05 12 00"));
        e(&mut g, (CostCode, "08 44 13"), "maps_to", (Activity, "A-CW"));
        e(&mut g, (CostCode, "08 80 00"), "maps_to", (Activity, "A-GLZ"));
        e(&mut g, (CostCode, "05 12 00"), "maps_to", (Activity, "A-STL"));
        e(&mut g, (Crew, "C-GLZ"), "performs", (Activity, "A-GLZ"));
        g
    }

    fn ctx(cw: f64) -> QueryContext {
        QueryContext {
            criticality: [("A-CW", cw), ("A-GLZ", 20.0), ("A-STL", 90.0)].into_iter().map(|(k, v)| (String::from(k), v)).collect(),
        }
    }

    #[test]
    fn vendors_behind_critical_curtainwall() {
        let g = fixture();
        let q = r#"vendor -supplies-> cost_code -maps_to-> activity("curtainwall", criticality>=40)"#;
        let r = kg_query(&g, q, &ctx(62.0)).unwrap();
        let heads: Vec<String> = r.heads().into_iter().map(|n| n.id).collect();
        assert_eq!(heads, vec!["V-ALU", "V-GLS"]);
        // Returned edges close over returned nodes.
        for e in &r.edges {
            assert!(r.nodes.contains(&e.from) && r.nodes.contains(&e.to));
        }
        assert!(kg_query(&g, q, &ctx(35.0)).unwrap().paths.is_empty());
        let pct = r#"vendor -supplies-> cost_code -maps_to-> activity("curtainwall", criticality >= 40%)"#;
        assert_eq!(kg_query(&g, pct, &ctx(62.0)).unwrap(), r);
    }

    #[test]
    fn wildcard_and_single_step() {
        let g = fixture();
        let r = kg_query(&g, "crew -*-> activity", &QueryContext::default()).unwrap();
        assert_eq!(r.paths, vec![vec![NodeRef::new(NodeType::Crew, "C-GLZ"), NodeRef::new(NodeType::Activity, "A-GLZ")]]);
        assert_eq!(kg_query(&g, "vendor", &QueryContext::default()).unwrap().nodes.len(), 3);
        assert_eq!(kg_query(&g, r#"cost_code(id="05 12 00")"#, &QueryContext::default()).unwrap().nodes.len(), 1);
    }

    #[test]
    fn empty_graph_matches_nothing() {
        let r = kg_query(&KnowledgeGraph::default(), "vendor -supplies-> cost_code", &QueryContext::default()).unwrap();
        assert!(r.paths.is_empty() && r.nodes.is_empty());
    }

    #[test]
    fn malformed_patterns() {
        for p in ["", "supplier", "vendor -supplies cost_code", "vendor(", "activity(criticality ~ 4)", r#"activity("x"#] {
            assert!(matches!(kg_query(&KnowledgeGraph::default(), p, &QueryContext::default()), Err(WhatIfError::MalformedPattern(_))), "{p}");
        }
    }

    #[test]
    fn edits_are_audited_and_checked() {
        let mut g = fixture();
        let n = g.audit().len();
        assert!(matches!(
            g.add_edge(NodeRef::new(NodeType::Vendor, "V-X"), "supplies", NodeRef::new(NodeType::CostCode, "08 80 00"), a()),
            Err(WhatIfError::DanglingEdge(_))
        ));
        assert!(matches!(g.add_node(Node::new(NodeType::Vendor, "V-ALU", ""), a()), Err(WhatIfError::DuplicateNode(_))));
        assert!(g.remove_edge(&NodeRef::new(NodeType::Crew, "C-GLZ"), "performs", &NodeRef::new(NodeType::Activity, "A-GLZ"), Audit::new("pm", "2025-10-02", "crew released")));
        assert_eq!(g.audit().len(), n + 1);
        assert_eq!(g.audit().last().unwrap().audit.why, "crew released");
    }
}
