//! Problem instances: domain types, JSON ingestion and validation.
//!
//! A scenario file is UTF-8 JSON with top-level keys `nodes`, `edges`,
//! `traffic_types`, `flows`, `risk`, `costs`, `weights`, `paths_per_pair`
//! and an optional `options` object. Unknown keys are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a node within [`Scenario::nodes`].
pub type NodeId = usize;

/// Wildcard traffic type used only for block-everything firewalls.
pub const WILDCARD: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Host,
    Switch,
    Gateway,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Host => write!(f, "host"),
            NodeKind::Switch => write!(f, "switch"),
            NodeKind::Gateway => write!(f, "gateway"),
        }
    }
}

/// A network device with abstract memory available for defenses.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    pub mem: f64,
}

/// Undirected link between two devices.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub capacity: f64,
}

impl Edge {
    /// Normalized endpoint pair, for set membership independent of order.
    pub fn key(&self) -> (NodeId, NodeId) {
        (self.a.min(self.b), self.a.max(self.b))
    }
}

/// A demanded traffic flow between two endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub src: NodeId,
    pub dst: NodeId,
    pub ttype: String,
    pub demand: f64,
}

/// Per-device, per-traffic-type risk scores plus the neighborhood radius
/// used when scoring paths. Unlisted pairs default to the baseline of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskModel {
    entries: BTreeMap<(NodeId, String), f64>,
    pub radius: usize,
}

impl RiskModel {
    pub fn new(entries: BTreeMap<(NodeId, String), f64>, radius: usize) -> Self {
        Self { entries, radius }
    }

    /// Risk of device `n` for traffic type `ttype`; baseline 1 when unlisted.
    pub fn risk(&self, n: NodeId, ttype: &str) -> f64 {
        self.entries
            .get(&(n, ttype.to_string()))
            .copied()
            .unwrap_or(1.0)
    }

    pub fn entries(&self) -> &BTreeMap<(NodeId, String), f64> {
        &self.entries
    }

    pub fn set_risk(&mut self, n: NodeId, ttype: &str, value: f64) {
        self.entries.insert((n, ttype.to_string()), value);
    }
}

/// Memory and complexity footprints for defenses, and the blocking penalty
/// scale. A `None` penalty scale means "derive from the current iteration":
/// the maximum path risk over active flows.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityCosts {
    fw_cost: BTreeMap<String, f64>,
    pub pi_cost: f64,
    pub fw_complexity: f64,
    pub pi_complexity: f64,
    pub penalty_scale: Option<f64>,
}

impl SecurityCosts {
    pub fn new(
        fw_cost: BTreeMap<String, f64>,
        pi_cost: f64,
        fw_complexity: f64,
        pi_complexity: f64,
        penalty_scale: Option<f64>,
    ) -> Self {
        Self {
            fw_cost,
            pi_cost,
            fw_complexity,
            pi_complexity,
            penalty_scale,
        }
    }

    /// Memory footprint of a firewall for `ttype`. The wildcard defaults to
    /// the sum of all per-type costs when not listed explicitly.
    pub fn fw_cost(&self, ttype: &str) -> f64 {
        if let Some(v) = self.fw_cost.get(ttype) {
            return *v;
        }
        if ttype == WILDCARD {
            return self
                .fw_cost
                .iter()
                .filter(|(t, _)| t.as_str() != WILDCARD)
                .map(|(_, v)| v)
                .sum();
        }
        0.0
    }

    pub fn fw_cost_map(&self) -> &BTreeMap<String, f64> {
        &self.fw_cost
    }
}

/// Objective weights: `alpha` for the routing layer, `beta` for the
/// security layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub alpha: [f64; 3],
    pub beta: [f64; 4],
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            alpha: [1.0, 10.0, 0.01],
            beta: [1.0, 0.01, 1.0, 1.0],
        }
    }
}

/// Tunables that rarely change between instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioOptions {
    /// Neighborhood radius for path risk scoring.
    pub risk_radius: usize,
    /// A host is high-risk when its peak risk reaches this fraction of the
    /// network-wide peak.
    pub high_risk_fraction: f64,
    /// Quantile of active-flow risks below which a blocked flow counts as
    /// collateral damage.
    pub low_risk_quantile: f64,
    /// Permit firewalls / inspection posts on hosts.
    pub allow_host_defenses: bool,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            risk_radius: 2,
            high_risk_fraction: 0.8,
            low_risk_quantile: 0.5,
            allow_host_defenses: false,
        }
    }
}

/// A full problem instance. Immutable after construction; safe to share
/// across concurrent readers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub traffic_types: Vec<String>,
    pub flows: Vec<FlowSpec>,
    pub risk: RiskModel,
    pub costs: SecurityCosts,
    pub weights: Weights,
    pub paths_per_pair: usize,
    pub options: ScenarioOptions,
}

impl Scenario {
    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n].name
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Adjacency over node indices, derived from the edge list.
    pub fn adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Capacity lookup by normalized endpoint pair.
    pub fn capacity_map(&self) -> BTreeMap<(NodeId, NodeId), f64> {
        self.edges.iter().map(|e| (e.key(), e.capacity)).collect()
    }

    /// Nodes eligible to carry firewalls or inspection posts.
    pub fn placement_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&n| {
                self.options.allow_host_defenses || self.nodes[n].kind != NodeKind::Host
            })
            .collect()
    }

    pub fn hosts(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&n| self.nodes[n].kind == NodeKind::Host)
    }
}

/// A single validation failure, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("duplicate node id {0}")]
    DuplicateNode(String),
    #[error("node {0} has non-finite or negative memory")]
    BadMem(String),
    #[error("edge {0}-{1} is a self-loop")]
    SelfLoop(String, String),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(String, String),
    #[error("edge {0}-{1} has non-positive or non-finite capacity")]
    BadCapacity(String, String),
    #[error("duplicate traffic type {0}")]
    DuplicateTrafficType(String),
    #[error("the wildcard type may not be listed as a traffic type")]
    WildcardListed,
    #[error("flow {0}->{1} is degenerate (source equals destination)")]
    DegenerateFlow(String, String),
    #[error("flow {0}->{1} uses the wildcard traffic type")]
    WildcardFlow(String, String),
    #[error("flow {0}->{1} [{2}] has unknown traffic type")]
    UnknownFlowType(String, String, String),
    #[error("flow {0}->{1} [{2}] has non-positive demand")]
    BadDemand(String, String, String),
    #[error("duplicate flow {0}->{1} [{2}]")]
    DuplicateFlow(String, String, String),
    #[error("flow endpoint {0} is neither host nor gateway")]
    BadEndpointKind(String),
    #[error("flow {0}->{1} endpoints are not connected in the physical graph")]
    Unreachable(String, String),
    #[error("risk({0}, {1}) = {2} is below the baseline of 1")]
    RiskBelowBaseline(String, String, f64),
    #[error("risk entry for {0} uses the wildcard traffic type")]
    WildcardRisk(String),
    #[error("cost {0} is negative or non-finite")]
    BadCost(String),
    #[error("penalty scale must be positive and finite")]
    BadPenaltyScale,
    #[error("weight {0} is negative or non-finite")]
    BadWeight(String),
    #[error("paths_per_pair must be at least 1")]
    BadPathsPerPair,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown node id {0}")]
    UnknownNode(String),
    #[error("invalid scenario: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

// ---------------------------------------------------------------------------
// File representation
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    id: String,
    kind: NodeKind,
    mem: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    a: String,
    b: String,
    capacity: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowFile {
    src: String,
    dst: String,
    #[serde(rename = "type")]
    ttype: String,
    demand: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RiskEntryFile {
    node: String,
    #[serde(rename = "type")]
    ttype: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostsFile {
    fw: BTreeMap<String, f64>,
    pi: f64,
    fw_complexity: f64,
    pi_complexity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    penalty_scale: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    nodes: Vec<NodeFile>,
    edges: Vec<EdgeFile>,
    traffic_types: Vec<String>,
    flows: Vec<FlowFile>,
    risk: Vec<RiskEntryFile>,
    costs: CostsFile,
    weights: Weights,
    paths_per_pair: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<ScenarioOptions>,
}

/// Parse scenario text, resolving names to indices and rejecting any
/// instance that fails validation.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let scenario = link(file)?;
    let violations = validate_scenario(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(violations))
    }
}

fn link(file: ScenarioFile) -> Result<Scenario, ScenarioError> {
    let mut index: BTreeMap<&str, NodeId> = BTreeMap::new();
    for (i, n) in file.nodes.iter().enumerate() {
        // Duplicates keep the first index; validation reports them.
        index.entry(n.id.as_str()).or_insert(i);
    }
    let resolve = |name: &str| -> Result<NodeId, ScenarioError> {
        index
            .get(name)
            .copied()
            .ok_or_else(|| ScenarioError::UnknownNode(name.to_string()))
    };

    let nodes = file
        .nodes
        .iter()
        .map(|n| Node {
            name: n.id.clone(),
            kind: n.kind,
            mem: n.mem,
        })
        .collect();
    let mut edges = Vec::with_capacity(file.edges.len());
    for e in &file.edges {
        edges.push(Edge {
            a: resolve(&e.a)?,
            b: resolve(&e.b)?,
            capacity: e.capacity,
        });
    }
    let mut flows = Vec::with_capacity(file.flows.len());
    for f in &file.flows {
        flows.push(FlowSpec {
            src: resolve(&f.src)?,
            dst: resolve(&f.dst)?,
            ttype: f.ttype.clone(),
            demand: f.demand,
        });
    }
    let options = file.options.unwrap_or_default();
    let mut risk_entries = BTreeMap::new();
    for r in &file.risk {
        risk_entries.insert((resolve(&r.node)?, r.ttype.clone()), r.value);
    }

    Ok(Scenario {
        nodes,
        edges,
        traffic_types: file.traffic_types,
        flows,
        risk: RiskModel::new(risk_entries, options.risk_radius),
        costs: SecurityCosts::new(
            file.costs.fw,
            file.costs.pi,
            file.costs.fw_complexity,
            file.costs.pi_complexity,
            file.costs.penalty_scale,
        ),
        weights: file.weights,
        paths_per_pair: file.paths_per_pair,
        options,
    })
}

/// Render a scenario back to its file form.
pub fn serialize_scenario(s: &Scenario) -> String {
    let file = ScenarioFile {
        nodes: s
            .nodes
            .iter()
            .map(|n| NodeFile {
                id: n.name.clone(),
                kind: n.kind,
                mem: n.mem,
            })
            .collect(),
        edges: s
            .edges
            .iter()
            .map(|e| EdgeFile {
                a: s.node_name(e.a).to_string(),
                b: s.node_name(e.b).to_string(),
                capacity: e.capacity,
            })
            .collect(),
        traffic_types: s.traffic_types.clone(),
        flows: s
            .flows
            .iter()
            .map(|f| FlowFile {
                src: s.node_name(f.src).to_string(),
                dst: s.node_name(f.dst).to_string(),
                ttype: f.ttype.clone(),
                demand: f.demand,
            })
            .collect(),
        risk: s
            .risk
            .entries()
            .iter()
            .map(|((n, t), v)| RiskEntryFile {
                node: s.node_name(*n).to_string(),
                ttype: t.clone(),
                value: *v,
            })
            .collect(),
        costs: CostsFile {
            fw: s.costs.fw_cost_map().clone(),
            pi: s.costs.pi_cost,
            fw_complexity: s.costs.fw_complexity,
            pi_complexity: s.costs.pi_complexity,
            penalty_scale: s.costs.penalty_scale,
        },
        weights: s.weights.clone(),
        paths_per_pair: s.paths_per_pair,
        options: Some(s.options.clone()),
    };
    serde_json::to_string_pretty(&file).expect("scenario serialization cannot fail")
}

/// Check every structural invariant; an empty list means the scenario is
/// well-formed. Violations are data, not errors.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen_names: BTreeSet<&str> = BTreeSet::new();
    for n in &s.nodes {
        if !seen_names.insert(&n.name) {
            out.push(Violation::DuplicateNode(n.name.clone()));
        }
        if !n.mem.is_finite() || n.mem < 0.0 {
            out.push(Violation::BadMem(n.name.clone()));
        }
    }

    let mut seen_edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for e in &s.edges {
        let (an, bn) = (s.node_name(e.a), s.node_name(e.b));
        if e.a == e.b {
            out.push(Violation::SelfLoop(an.to_string(), bn.to_string()));
            continue;
        }
        if !seen_edges.insert(e.key()) {
            out.push(Violation::DuplicateEdge(an.to_string(), bn.to_string()));
        }
        if !e.capacity.is_finite() || e.capacity <= 0.0 {
            out.push(Violation::BadCapacity(an.to_string(), bn.to_string()));
        }
    }

    let mut seen_types: BTreeSet<&str> = BTreeSet::new();
    for t in &s.traffic_types {
        if t == WILDCARD {
            out.push(Violation::WildcardListed);
        } else if !seen_types.insert(t) {
            out.push(Violation::DuplicateTrafficType(t.clone()));
        }
    }

    let mut seen_flows: BTreeSet<(NodeId, NodeId, &str)> = BTreeSet::new();
    for f in &s.flows {
        let (sn, dn) = (s.node_name(f.src), s.node_name(f.dst));
        if f.src == f.dst {
            out.push(Violation::DegenerateFlow(sn.to_string(), dn.to_string()));
        }
        if f.ttype == WILDCARD {
            out.push(Violation::WildcardFlow(sn.to_string(), dn.to_string()));
        } else if !s.traffic_types.contains(&f.ttype) {
            out.push(Violation::UnknownFlowType(
                sn.to_string(),
                dn.to_string(),
                f.ttype.clone(),
            ));
        }
        if !f.demand.is_finite() || f.demand <= 0.0 {
            out.push(Violation::BadDemand(
                sn.to_string(),
                dn.to_string(),
                f.ttype.clone(),
            ));
        }
        if !seen_flows.insert((f.src, f.dst, f.ttype.as_str())) {
            out.push(Violation::DuplicateFlow(
                sn.to_string(),
                dn.to_string(),
                f.ttype.clone(),
            ));
        }
        for &ep in &[f.src, f.dst] {
            if s.nodes[ep].kind == NodeKind::Switch {
                out.push(Violation::BadEndpointKind(s.node_name(ep).to_string()));
            }
        }
    }

    // Flow endpoints must sit in one connected component.
    let referenced: BTreeSet<NodeId> = s
        .flows
        .iter()
        .flat_map(|f| [f.src, f.dst])
        .collect();
    if let Some(&start) = referenced.iter().next() {
        let adj = s.adjacency();
        let mut reach = vec![false; s.nodes.len()];
        let mut queue = std::collections::VecDeque::from([start]);
        reach[start] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !reach[v] {
                    reach[v] = true;
                    queue.push_back(v);
                }
            }
        }
        for f in &s.flows {
            if !reach[f.src] || !reach[f.dst] {
                out.push(Violation::Unreachable(
                    s.node_name(f.src).to_string(),
                    s.node_name(f.dst).to_string(),
                ));
            }
        }
    }

    for ((n, t), v) in s.risk.entries() {
        if t == WILDCARD {
            out.push(Violation::WildcardRisk(s.node_name(*n).to_string()));
        }
        if !v.is_finite() || *v < 1.0 {
            out.push(Violation::RiskBelowBaseline(
                s.node_name(*n).to_string(),
                t.clone(),
                *v,
            ));
        }
    }

    for (t, v) in s.costs.fw_cost_map() {
        if !v.is_finite() || *v < 0.0 {
            out.push(Violation::BadCost(format!("fw[{t}]")));
        }
    }
    for (name, v) in [
        ("pi", s.costs.pi_cost),
        ("fw_complexity", s.costs.fw_complexity),
        ("pi_complexity", s.costs.pi_complexity),
    ] {
        if !v.is_finite() || v < 0.0 {
            out.push(Violation::BadCost(name.to_string()));
        }
    }
    if let Some(ps) = s.costs.penalty_scale {
        if !ps.is_finite() || ps <= 0.0 {
            out.push(Violation::BadPenaltyScale);
        }
    }

    for (i, a) in s.weights.alpha.iter().enumerate() {
        if !a.is_finite() || *a < 0.0 {
            out.push(Violation::BadWeight(format!("alpha[{i}]")));
        }
    }
    for (i, b) in s.weights.beta.iter().enumerate() {
        if !b.is_finite() || *b < 0.0 {
            out.push(Violation::BadWeight(format!("beta[{i}]")));
        }
    }
    if s.paths_per_pair == 0 {
        out.push(Violation::BadPathsPerPair);
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology;

    #[test]
    fn toy_scenario_parses() {
        let text = topology::toy_scenario_text(1000.0);
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.nodes.len(), 7);
        assert_eq!(s.edges.len(), 10);
        assert!(validate_scenario(&s).is_empty());
    }

    #[test]
    fn wildcard_flow_rejected() {
        let mut text = topology::toy_scenario_text(1000.0);
        text = text.replace("\"type\": \"web\",", "\"type\": \"*\",");
        match parse_scenario(&text) {
            Err(ScenarioError::Invalid(vs)) => {
                assert!(vs.iter().any(|v| matches!(v, Violation::WildcardFlow(..))));
            }
            other => panic!("expected invalid scenario, got {other:?}"),
        }
    }

    #[test]
    fn low_risk_rejected() {
        let mut s = parse_scenario(&topology::toy_scenario_text(1000.0)).unwrap();
        let h1 = s.node_by_name("H1").unwrap();
        s.risk.set_risk(h1, "web", 0.5);
        let vs = validate_scenario(&s);
        assert!(vs
            .iter()
            .any(|v| matches!(v, Violation::RiskBelowBaseline(n, t, _) if n == "H1" && t == "web")));
    }

    #[test]
    fn degenerate_flow_flagged() {
        let mut s = parse_scenario(&topology::toy_scenario_text(1000.0)).unwrap();
        let h1 = s.node_by_name("H1").unwrap();
        s.flows[0].src = h1;
        s.flows[0].dst = h1;
        let vs = validate_scenario(&s);
        assert!(vs.iter().any(|v| matches!(v, Violation::DegenerateFlow(..))));
    }

    #[test]
    fn disconnected_endpoint_flagged() {
        let mut s = parse_scenario(&topology::toy_scenario_text(1000.0)).unwrap();
        s.nodes.push(Node {
            name: "H9".into(),
            kind: NodeKind::Host,
            mem: 0.0,
        });
        let h9 = s.nodes.len() - 1;
        s.flows.push(FlowSpec {
            src: 0,
            dst: h9,
            ttype: "web".into(),
            demand: 1.0,
        });
        let vs = validate_scenario(&s);
        assert!(vs.iter().any(|v| matches!(v, Violation::Unreachable(..))));
    }

    #[test]
    fn unknown_node_in_edge() {
        let text = topology::toy_scenario_text(1000.0).replace("\"a\": \"G1\"", "\"a\": \"GX\"");
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioError::UnknownNode(n)) if n == "GX"
        ));
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_scenario("{ nodes: []") {
            Err(ScenarioError::Syntax { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_top_level_key_rejected() {
        let text = topology::toy_scenario_text(1000.0).replacen(
            "\"nodes\"",
            "\"bogus\": 1, \"nodes\"",
            1,
        );
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioError::Syntax { .. })
        ));
    }

    #[test]
    fn round_trip_identity() {
        let s = parse_scenario(&topology::toy_scenario_text(1000.0)).unwrap();
        let again = parse_scenario(&serialize_scenario(&s)).unwrap();
        assert_eq!(s, again);
    }
}
