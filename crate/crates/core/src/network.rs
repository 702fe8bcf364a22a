//! Immutable data model of a water distribution network.
//!
//! Elements are plain records. A [`Network`] is assembled from a
//! [`NetworkBuilder`] and cannot be changed afterwards; derive a modified
//! copy with [`Network::to_builder`].
//!
//! Nodes and links share one index space each. Node indices run over
//! junctions, then reservoirs, then tanks; link indices over pipes, then
//! pumps, then valves. Within a class the builder's insertion order is kept.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: String,
    /// m
    pub elevation: f64,
    /// m³/s
    pub base_demand: f64,
    pub demand_pattern: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub id: String,
    /// Fixed total head, m.
    pub head: f64,
    pub head_pattern: Option<String>,
}

/// Cylindrical storage tank. Levels are measured from `elevation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tank {
    pub id: String,
    pub elevation: f64,
    pub diameter: f64,
    pub init_level: f64,
    pub min_level: f64,
    pub max_level: f64,
}

impl Tank {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * 0.25 * self.diameter * self.diameter
    }
}

/// Hazen-Williams pipe. `roughness` is the C coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub length: f64,
    pub diameter: f64,
    pub roughness: f64,
    pub open: bool,
}

impl Pipe {
    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * 0.25 * self.diameter * self.diameter * self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pump {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub curve_id: String,
    /// Relative speed, 1.0 is nominal.
    pub speed: f64,
    pub running: bool,
}

/// Open/closed valve with a minor-loss head term `K·v²/(2g)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valve {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub diameter: f64,
    pub minor_loss_coef: f64,
    pub open: bool,
}

/// Cyclic multiplier series with a fixed step in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub id: String,
    pub multipliers: Vec<f64>,
    pub step: u64,
}

impl Pattern {
    /// Multiplier in effect at time `t`; wraps past the end of the series.
    pub fn multiplier_at(&self, t: u64) -> f64 {
        if self.multipliers.is_empty() {
            return 1.0;
        }
        let step = self.step.max(1);
        let idx = (t / step) % self.multipliers.len() as u64;
        self.multipliers[idx as usize]
    }
}

/// Head curve, points as (flow m³/s, head m) sorted by flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub id: String,
    pub points: Vec<(f64, f64)>,
}

/// Default time settings carried by a network file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeOptions {
    pub duration_s: u64,
    pub hydraulic_step_s: u64,
    pub quality_step_s: u64,
    pub pattern_step_s: u64,
}

impl Default for TimeOptions {
    fn default() -> Self {
        Self {
            duration_s: 0,
            hydraulic_step_s: 3600,
            quality_step_s: 300,
            pattern_step_s: 3600,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Junction,
    Reservoir,
    Tank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Pipe,
    Pump,
    Valve,
}

/// One broken invariant, naming the element it was found on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub element: String,
    pub message: String,
}

impl Violation {
    fn new(element: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            element: element.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network ({} violations): {}", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    Invalid(Vec<Violation>),
}

/// Mutable staging area for a [`Network`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkBuilder {
    pub title: String,
    pub junctions: Vec<Junction>,
    pub reservoirs: Vec<Reservoir>,
    pub tanks: Vec<Tank>,
    pub pipes: Vec<Pipe>,
    pub pumps: Vec<Pump>,
    pub valves: Vec<Valve>,
    pub patterns: Vec<Pattern>,
    pub curves: Vec<Curve>,
    pub times: TimeOptions,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn junction(mut self, id: &str, elevation: f64, base_demand: f64) -> Self {
        self.junctions.push(Junction {
            id: id.to_string(),
            elevation,
            base_demand,
            demand_pattern: None,
        });
        self
    }

    pub fn reservoir(mut self, id: &str, head: f64) -> Self {
        self.reservoirs.push(Reservoir {
            id: id.to_string(),
            head,
            head_pattern: None,
        });
        self
    }

    pub fn pipe(mut self, id: &str, from: &str, to: &str, length: f64, diameter: f64, roughness: f64) -> Self {
        self.pipes.push(Pipe {
            id: id.to_string(),
            from_node: from.to_string(),
            to_node: to.to_string(),
            length,
            diameter,
            roughness,
            open: true,
        });
        self
    }

    /// Validates and freezes the network.
    pub fn build(self) -> Result<Network, NetworkError> {
        let net = self.build_unchecked();
        let violations = validate(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(NetworkError::Invalid(violations))
        }
    }

    /// Freezes the network without validating it. Dangling references are
    /// kept and reported by [`validate`].
    pub fn build_unchecked(self) -> Network {
        let mut node_index = HashMap::new();
        let mut node_ids = Vec::new();
        let mut node_kinds = Vec::new();
        let mut push_node = |id: &str, kind: NodeKind| {
            let idx = node_ids.len();
            node_index.entry(id.to_string()).or_insert(idx);
            node_ids.push(id.to_string());
            node_kinds.push(kind);
        };
        for j in &self.junctions {
            push_node(&j.id, NodeKind::Junction);
        }
        for r in &self.reservoirs {
            push_node(&r.id, NodeKind::Reservoir);
        }
        for t in &self.tanks {
            push_node(&t.id, NodeKind::Tank);
        }

        let mut link_index = HashMap::new();
        let mut link_ids = Vec::new();
        let mut link_kinds = Vec::new();
        let mut link_ends = Vec::new();
        let ends =
            |from: &str, to: &str| -> Option<(usize, usize)> { Some((*node_index.get(from)?, *node_index.get(to)?)) };
        let links = self
            .pipes
            .iter()
            .map(|p| (&p.id, &p.from_node, &p.to_node, LinkKind::Pipe))
            .chain(
                self.pumps
                    .iter()
                    .map(|p| (&p.id, &p.from_node, &p.to_node, LinkKind::Pump)),
            )
            .chain(
                self.valves
                    .iter()
                    .map(|v| (&v.id, &v.from_node, &v.to_node, LinkKind::Valve)),
            );
        for (id, from, to, kind) in links {
            link_index.entry(id.clone()).or_insert(link_ids.len());
            link_ids.push(id.clone());
            link_kinds.push(kind);
            link_ends.push(ends(from, to));
        }

        Network {
            parts: self,
            node_index,
            node_ids,
            node_kinds,
            link_index,
            link_ids,
            link_kinds,
            link_ends,
        }
    }
}

/// Immutable water distribution network. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Network {
    parts: NetworkBuilder,
    node_index: HashMap<String, usize>,
    node_ids: Vec<String>,
    node_kinds: Vec<NodeKind>,
    link_index: HashMap<String, usize>,
    link_ids: Vec<String>,
    link_kinds: Vec<LinkKind>,
    link_ends: Vec<Option<(usize, usize)>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts
    }
}

impl Network {
    pub fn title(&self) -> &str {
        &self.parts.title
    }
    pub fn junctions(&self) -> &[Junction] {
        &self.parts.junctions
    }
    pub fn reservoirs(&self) -> &[Reservoir] {
        &self.parts.reservoirs
    }
    pub fn tanks(&self) -> &[Tank] {
        &self.parts.tanks
    }
    pub fn pipes(&self) -> &[Pipe] {
        &self.parts.pipes
    }
    pub fn pumps(&self) -> &[Pump] {
        &self.parts.pumps
    }
    pub fn valves(&self) -> &[Valve] {
        &self.parts.valves
    }
    pub fn patterns(&self) -> &[Pattern] {
        &self.parts.patterns
    }
    pub fn curves(&self) -> &[Curve] {
        &self.parts.curves
    }
    pub fn times(&self) -> TimeOptions {
        self.parts.times
    }

    /// Copy of the underlying parts, for copy-on-modify edits.
    pub fn to_builder(&self) -> NetworkBuilder {
        self.parts.clone()
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }
    pub fn link_count(&self) -> usize {
        self.link_ids.len()
    }
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }
    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.link_index.get(id).copied()
    }
    pub fn node_id(&self, idx: usize) -> &str {
        &self.node_ids[idx]
    }
    pub fn link_id(&self, idx: usize) -> &str {
        &self.link_ids[idx]
    }
    pub fn node_kind(&self, idx: usize) -> NodeKind {
        self.node_kinds[idx]
    }
    pub fn link_kind(&self, idx: usize) -> LinkKind {
        self.link_kinds[idx]
    }
    /// Resolved (from, to) node indices; `None` for dangling references.
    pub fn link_ends(&self, idx: usize) -> Option<(usize, usize)> {
        self.link_ends[idx]
    }

    pub fn reservoir_offset(&self) -> usize {
        self.parts.junctions.len()
    }
    pub fn tank_offset(&self) -> usize {
        self.parts.junctions.len() + self.parts.reservoirs.len()
    }
    pub fn pump_offset(&self) -> usize {
        self.parts.pipes.len()
    }
    pub fn valve_offset(&self) -> usize {
        self.parts.pipes.len() + self.parts.pumps.len()
    }

    pub fn pattern(&self, id: &str) -> Option<&Pattern> {
        self.parts.patterns.iter().find(|p| p.id == id)
    }
    pub fn curve(&self, id: &str) -> Option<&Curve> {
        self.parts.curves.iter().find(|c| c.id == id)
    }
    pub fn junction(&self, id: &str) -> Option<&Junction> {
        self.parts.junctions.iter().find(|j| j.id == id)
    }
    pub fn pipe(&self, id: &str) -> Option<&Pipe> {
        self.parts.pipes.iter().find(|p| p.id == id)
    }

    /// Elevation of any node; reservoirs report their fixed head.
    pub fn node_elevation(&self, idx: usize) -> f64 {
        let nj = self.parts.junctions.len();
        let nr = self.parts.reservoirs.len();
        match self.node_kinds[idx] {
            NodeKind::Junction => self.parts.junctions[idx].elevation,
            NodeKind::Reservoir => self.parts.reservoirs[idx - nj].head,
            NodeKind::Tank => self.parts.tanks[idx - nj - nr].elevation,
        }
    }

    pub fn total_base_demand(&self) -> f64 {
        self.parts.junctions.iter().map(|j| j.base_demand).sum()
    }

    /// Demand multiplier of junction `j` at time `t` (1.0 without pattern).
    pub fn demand_multiplier(&self, junction: usize, t: u64) -> f64 {
        self.parts.junctions[junction]
            .demand_pattern
            .as_deref()
            .and_then(|id| self.pattern(id))
            .map_or(1.0, |p| p.multiplier_at(t))
    }
}

/// Checks every element invariant plus graph closure and connectivity.
/// Returns an empty list iff the network is well-formed.
pub fn validate(network: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let parts = &network.parts;

    let mut seen_nodes = HashSet::new();
    for id in &network.node_ids {
        if !seen_nodes.insert(id.as_str()) {
            out.push(Violation::new(id, "duplicate node id"));
        }
    }
    let mut seen_links = HashSet::new();
    for id in &network.link_ids {
        if !seen_links.insert(id.as_str()) {
            out.push(Violation::new(id, "duplicate link id"));
        }
    }
    let mut seen = HashSet::new();
    for p in &parts.patterns {
        if !seen.insert(p.id.as_str()) {
            out.push(Violation::new(&p.id, "duplicate pattern id"));
        }
    }
    seen.clear();
    for c in &parts.curves {
        if !seen.insert(c.id.as_str()) {
            out.push(Violation::new(&c.id, "duplicate curve id"));
        }
    }

    let pattern_exists = |id: &Option<String>| id.as_deref().is_none_or(|id| network.pattern(id).is_some());

    for j in &parts.junctions {
        if !j.elevation.is_finite() {
            out.push(Violation::new(&j.id, "elevation is not finite"));
        }
        if !(j.base_demand.is_finite() && j.base_demand >= 0.0) {
            out.push(Violation::new(&j.id, "base demand must be finite and >= 0"));
        }
        if !pattern_exists(&j.demand_pattern) {
            out.push(Violation::new(
                &j.id,
                format!("unknown pattern {}", j.demand_pattern.as_deref().unwrap_or("")),
            ));
        }
    }
    for r in &parts.reservoirs {
        if !r.head.is_finite() {
            out.push(Violation::new(&r.id, "head is not finite"));
        }
        if !pattern_exists(&r.head_pattern) {
            out.push(Violation::new(
                &r.id,
                format!("unknown pattern {}", r.head_pattern.as_deref().unwrap_or("")),
            ));
        }
    }
    for t in &parts.tanks {
        if !(t.diameter.is_finite() && t.diameter > 0.0) {
            out.push(Violation::new(&t.id, "diameter must be > 0"));
        }
        if !t.elevation.is_finite() {
            out.push(Violation::new(&t.id, "elevation is not finite"));
        }
        let ordered = 0.0 <= t.min_level && t.min_level <= t.init_level && t.init_level <= t.max_level;
        if !(ordered && t.max_level.is_finite()) {
            out.push(Violation::new(&t.id, "levels must satisfy 0 <= min <= init <= max"));
        }
    }

    let check_ends = |out: &mut Vec<Violation>, id: &str, from: &str, to: &str| {
        for end in [from, to] {
            if network.node_index(end).is_none() {
                out.push(Violation::new(id, format!("references missing node {end}")));
            }
        }
        if from == to {
            out.push(Violation::new(id, "link connects a node to itself"));
        }
    };
    for p in &parts.pipes {
        check_ends(&mut out, &p.id, &p.from_node, &p.to_node);
        if !(p.length.is_finite() && p.length > 0.0) {
            out.push(Violation::new(&p.id, "length must be > 0"));
        }
        if !(p.diameter.is_finite() && p.diameter > 0.0) {
            out.push(Violation::new(&p.id, "diameter must be > 0"));
        }
        if !(p.roughness.is_finite() && p.roughness > 0.0) {
            out.push(Violation::new(&p.id, "roughness must be > 0"));
        }
    }
    for p in &parts.pumps {
        check_ends(&mut out, &p.id, &p.from_node, &p.to_node);
        if network.curve(&p.curve_id).is_none() {
            out.push(Violation::new(&p.id, format!("unknown curve {}", p.curve_id)));
        }
        if !(p.speed.is_finite() && p.speed >= 0.0) {
            out.push(Violation::new(&p.id, "speed must be >= 0"));
        }
    }
    for v in &parts.valves {
        check_ends(&mut out, &v.id, &v.from_node, &v.to_node);
        if !(v.diameter.is_finite() && v.diameter > 0.0) {
            out.push(Violation::new(&v.id, "diameter must be > 0"));
        }
        if !(v.minor_loss_coef.is_finite() && v.minor_loss_coef >= 0.0) {
            out.push(Violation::new(&v.id, "minor loss coefficient must be >= 0"));
        }
    }
    for p in &parts.patterns {
        if p.multipliers.is_empty() {
            out.push(Violation::new(&p.id, "pattern is empty"));
        }
        if p.multipliers.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            out.push(Violation::new(&p.id, "multipliers must be finite and >= 0"));
        }
        if p.step == 0 {
            out.push(Violation::new(&p.id, "pattern step must be > 0"));
        }
    }
    for c in &parts.curves {
        if c.points.is_empty() {
            out.push(Violation::new(&c.id, "curve has no points"));
        }
        if c.points.iter().any(|(q, h)| !(q.is_finite() && h.is_finite())) {
            out.push(Violation::new(&c.id, "curve points must be finite"));
        }
        for w in c.points.windows(2) {
            if w[1].0 <= w[0].0 {
                out.push(Violation::new(&c.id, "flows must be strictly increasing"));
                break;
            }
            if w[1].1 > w[0].1 {
                out.push(Violation::new(&c.id, "heads must be non-increasing"));
                break;
            }
        }
    }

    let sources: Vec<usize> = (0..network.node_count())
        .filter(|&i| network.node_kinds[i] != NodeKind::Junction)
        .collect();
    if sources.is_empty() {
        out.push(Violation::new("network", "no head source"));
    } else {
        let reached = reachable_from(network, &sources);
        for (j, junction) in parts.junctions.iter().enumerate() {
            if !reached[j] {
                out.push(Violation::new(&junction.id, "not connected to any head source"));
            }
        }
    }
    out
}

fn reachable_from(network: &Network, roots: &[usize]) -> Vec<bool> {
    let n = network.node_count();
    let mut adj = vec![Vec::new(); n];
    for (a, b) in network.link_ends.iter().flatten() {
        adj[*a].push(*b);
        adj[*b].push(*a);
    }
    let mut reached = vec![false; n];
    let mut queue: VecDeque<usize> = roots.iter().copied().collect();
    for &r in roots {
        reached[r] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !reached[v] {
                reached[v] = true;
                queue.push_back(v);
            }
        }
    }
    reached
}

/// Link orientation: `-1` at the from node (outflow), `+1` at the to node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLinkIncidence {
    pub link_nodes: Vec<(usize, usize)>,
    pub node_links: Vec<Vec<(usize, i8)>>,
}

impl NodeLinkIncidence {
    pub fn degree(&self, node: usize) -> usize {
        self.node_links[node].len()
    }
}

pub fn incidence(network: &Network) -> Result<NodeLinkIncidence, NetworkError> {
    let violations = validate(network);
    if !violations.is_empty() {
        return Err(NetworkError::Invalid(violations));
    }
    let link_nodes: Vec<(usize, usize)> = network.link_ends.iter().map(|e| e.expect("validated")).collect();
    let mut node_links = vec![Vec::new(); network.node_count()];
    for (k, &(from, to)) in link_nodes.iter().enumerate() {
        node_links[from].push((k, -1));
        node_links[to].push((k, 1));
    }
    Ok(NodeLinkIncidence { link_nodes, node_links })
}
