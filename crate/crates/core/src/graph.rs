//! Extended spectrum graph.
//!
//! Nodes are candidate prefix residue masses, sorted by mass so that node id
//! order is a topological order. Directed edges join nodes whose mass
//! difference matches one, two or three residues. Conflict edges join nodes
//! that interpret the same peak differently: at most one of them can be a
//! true PRM.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::chem::{node_masses_for_peak, ComboTable, IonType, ParentMass};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

pub type NodeId = usize;
pub type EdgeId = usize;

/// One peak interpretation that produced (part of) a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeSource {
    pub peak: usize,
    pub ion: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub prm: f64,
    /// Empty for the goalposts.
    pub sources: Vec<NodeSource>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeLabel {
    Residue(char),
    /// Unresolved run of `len` residues. `residues` holds the closest
    /// matching multiset, sorted, for display only.
    Combo { len: u8, residues: String },
}

impl EdgeLabel {
    pub fn residue_count(&self) -> usize {
        match self {
            EdgeLabel::Residue(_) => 1,
            EdgeLabel::Combo { len, .. } => *len as usize,
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Residue(c) => write!(f, "{c}"),
            EdgeLabel::Combo { residues, .. } => write!(f, "[{residues}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: EdgeLabel,
    /// Score of `from`, moved onto the edge.
    pub weight: f64,
}

/// Undirected conflict, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConflictEdge {
    pub a: NodeId,
    pub b: NodeId,
}

impl ConflictEdge {
    pub fn new(u: NodeId, v: NodeId) -> Self {
        ConflictEdge { a: u.min(v), b: u.max(v) }
    }
}

#[derive(Debug, Clone)]
pub struct GraphConfig {
    /// Tolerance when matching a mass difference to residues.
    pub edge_tol: f64,
    /// Interpretations closer than this collapse into one node.
    pub merge_tol: f64,
    /// Longest residue run a single edge may stand for (1..=3).
    pub max_edge_residues: usize,
    /// Also mark nodes from different peaks whose masses are complementary.
    pub cross_peak_conflicts: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { edge_tol: 0.5, merge_tol: 0.3, max_edge_residues: 3, cross_peak_conflicts: false }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<DirectedEdge>,
    pub conflicts: Vec<ConflictEdge>,
    pub parent: ParentMass,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    partners: Vec<Vec<NodeId>>,
}

impl SpectrumGraph {
    /// Assemble a graph from explicit parts. Node 0 is the source and the last
    /// node the sink; node masses must be non-decreasing and edges must point
    /// forward.
    pub fn from_parts(
        nodes: Vec<(f64, f64)>,
        edges: Vec<(NodeId, NodeId, EdgeLabel)>,
        conflicts: Vec<(NodeId, NodeId)>,
        parent: ParentMass,
    ) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidGraph("need at least source and sink".into()));
        }
        let nodes: Vec<Node> = nodes
            .into_iter()
            .enumerate()
            .map(|(id, (prm, score))| Node { id, prm, sources: Vec::new(), score })
            .collect();
        Self::assemble(nodes, edges, conflicts.into_iter().map(|(a, b)| ConflictEdge::new(a, b)).collect(), parent)
    }

    fn assemble(
        mut nodes: Vec<Node>,
        edges: Vec<(NodeId, NodeId, EdgeLabel)>,
        conflicts: BTreeSet<ConflictEdge>,
        parent: ParentMass,
    ) -> Result<Self> {
        let n = nodes.len();
        if nodes.windows(2).any(|w| w[1].prm < w[0].prm) {
            return Err(Error::InvalidGraph("node masses must be non-decreasing".into()));
        }
        let sink = n - 1;
        nodes[0].score = 0.0;
        nodes[sink].score = 0.0;
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        let mut directed = Vec::with_capacity(edges.len());
        for (from, to, label) in edges {
            if from >= to || to >= n {
                return Err(Error::InvalidGraph(format!("edge {from}->{to} does not point forward")));
            }
            let id = directed.len();
            out_edges[from].push(id);
            in_edges[to].push(id);
            directed.push(DirectedEdge { from, to, label, weight: nodes[from].score });
        }
        for list in out_edges.iter_mut() {
            list.sort_by_key(|&e| directed[e].to);
        }
        for list in in_edges.iter_mut() {
            list.sort_by_key(|&e| directed[e].from);
        }
        let mut partners = vec![Vec::new(); n];
        for c in &conflicts {
            if c.a == c.b || c.b >= n {
                return Err(Error::InvalidGraph(format!("bad conflict edge {}-{}", c.a, c.b)));
            }
            if c.a == 0 || c.b == sink {
                return Err(Error::InvalidGraph("goalposts cannot be in conflict".into()));
            }
            partners[c.a].push(c.b);
            partners[c.b].push(c.a);
        }
        Ok(SpectrumGraph {
            nodes,
            edges: directed,
            conflicts: conflicts.into_iter().collect(),
            parent,
            out_edges,
            in_edges,
            partners,
        })
    }

    pub fn source(&self) -> NodeId {
        0
    }

    pub fn sink(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn is_goalpost(&self, v: NodeId) -> bool {
        v == self.source() || v == self.sink()
    }

    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v]
    }

    /// Nodes joined to `v` by a conflict edge.
    pub fn conflict_partners(&self, v: NodeId) -> &[NodeId] {
        &self.partners[v]
    }

    pub fn in_conflict(&self, u: NodeId, v: NodeId) -> bool {
        self.partners[u].contains(&v)
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.out_edges[u].iter().copied().find(|&e| self.edges[e].to == v)
    }

    pub fn edge_mass(&self, e: EdgeId) -> f64 {
        let edge = &self.edges[e];
        self.nodes[edge.to].prm - self.nodes[edge.from].prm
    }

    /// Replace node scores (goalposts stay at zero) and move them onto the
    /// outgoing edges.
    pub fn set_scores(&mut self, scores: &[f64]) {
        assert_eq!(scores.len(), self.nodes.len());
        let sink = self.sink();
        for (node, &s) in self.nodes.iter_mut().zip(scores) {
            node.score = if node.id == 0 || node.id == sink { 0.0 } else { s };
        }
        self.refresh_weights();
    }

    fn refresh_weights(&mut self) {
        for edge in self.edges.iter_mut() {
            edge.weight = self.nodes[edge.from].score;
        }
    }

    pub fn view(&self) -> GraphView<'_> {
        GraphView::new(self)
    }

    /// Graphviz rendering: nodes labeled with mass and score, conflicts dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph spectrum {\n  rankdir=LR;\n");
        for n in &self.nodes {
            let name = if n.id == self.source() {
                "s".to_string()
            } else if n.id == self.sink() {
                "t".to_string()
            } else {
                format!("{:.2}", n.prm)
            };
            let _ = writeln!(out, "  n{} [label=\"{}\\n{:.2}\\nscore {:.3}\"];", n.id, name, n.prm, n.score);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, e.label);
        }
        for c in &self.conflicts {
            let _ = writeln!(out, "  n{} -> n{} [dir=none, style=dashed];", c.a, c.b);
        }
        out.push_str("}\n");
        out
    }
}

/// Build the extended spectrum graph of a (rank-normalized) spectrum.
/// All internal node scores start at zero.
pub fn build_graph(spectrum: &Spectrum, ion_types: &[IonType], config: &GraphConfig) -> Result<SpectrumGraph> {
    build_graph_with(spectrum, ion_types, config, &ComboTable::new())
}

pub fn build_graph_with(
    spectrum: &Spectrum,
    ion_types: &[IonType],
    config: &GraphConfig,
    combos: &ComboTable,
) -> Result<SpectrumGraph> {
    let parent = spectrum.parent;
    if parent.residual.is_nan() || parent.residual <= 0.0 {
        return Err(Error::InvalidParentMass(parent.residual));
    }
    let mut interpretations: Vec<(f64, NodeSource)> = Vec::new();
    for (peak, p) in spectrum.peaks.iter().enumerate() {
        for (prm, ion) in node_masses_for_peak(p.mz, &parent, ion_types) {
            interpretations.push((prm, NodeSource { peak, ion }));
        }
    }
    interpretations.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then(a.1.peak.cmp(&b.1.peak)).then(a.1.ion.cmp(&b.1.ion))
    });

    let mut nodes = vec![Node { id: 0, prm: 0.0, sources: Vec::new(), score: 0.0 }];
    let mut start = 0;
    while start < interpretations.len() {
        let first = interpretations[start].0;
        let mut end = start;
        while end < interpretations.len() && interpretations[end].0 - first <= config.merge_tol {
            end += 1;
        }
        let members = &interpretations[start..end];
        let prm = members.iter().map(|m| m.0).sum::<f64>() / members.len() as f64;
        nodes.push(Node { id: nodes.len(), prm, sources: members.iter().map(|m| m.1).collect(), score: 0.0 });
        start = end;
    }
    nodes.push(Node { id: nodes.len(), prm: parent.residual, sources: Vec::new(), score: 0.0 });
    let n = nodes.len();

    let mut by_peak: Vec<Vec<NodeId>> = vec![Vec::new(); spectrum.peaks.len()];
    for node in &nodes {
        for src in &node.sources {
            if by_peak[src.peak].last() != Some(&node.id) {
                by_peak[src.peak].push(node.id);
            }
        }
    }
    let mut conflicts = BTreeSet::new();
    for ids in &by_peak {
        for (i, &u) in ids.iter().enumerate() {
            for &v in &ids[i + 1..] {
                conflicts.insert(ConflictEdge::new(u, v));
            }
        }
    }
    if config.cross_peak_conflicts {
        for u in 1..n - 1 {
            for v in u + 1..n - 1 {
                if (nodes[u].prm + nodes[v].prm - parent.residual).abs() <= config.merge_tol {
                    conflicts.insert(ConflictEdge::new(u, v));
                }
            }
        }
    }

    let max_len = config.max_edge_residues.clamp(1, 3);
    let max_span = combos.of_len(max_len).last().map_or(0.0, |c| c.mass) + config.edge_tol;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let diff = nodes[v].prm - nodes[u].prm;
            if diff > max_span {
                break;
            }
            let label = (1..=max_len).find_map(|len| {
                combos.closest(len, diff, config.edge_tol).map(|c| {
                    if len == 1 {
                        EdgeLabel::Residue(c.residues.chars().next().unwrap())
                    } else {
                        EdgeLabel::Combo { len: len as u8, residues: c.residues.clone() }
                    }
                })
            });
            if let Some(label) = label {
                edges.push((u, v, label));
            }
        }
    }
    SpectrumGraph::assemble(nodes, edges, conflicts, parent)
}

/// Drop internal nodes with negative score together with their incident
/// edges; node ids are compacted.
pub fn remove_negative_nodes(graph: &SpectrumGraph) -> SpectrumGraph {
    let sink = graph.sink();
    let keep: Vec<bool> = graph.nodes.iter().map(|n| n.id == 0 || n.id == sink || n.score >= 0.0).collect();
    let mut remap = vec![usize::MAX; graph.nodes.len()];
    let mut nodes = Vec::new();
    for node in graph.nodes.iter().filter(|n| keep[n.id]) {
        remap[node.id] = nodes.len();
        nodes.push(Node { id: nodes.len(), ..node.clone() });
    }
    let edges = graph
        .edges
        .iter()
        .filter(|e| keep[e.from] && keep[e.to])
        .map(|e| (remap[e.from], remap[e.to], e.label.clone()))
        .collect();
    let conflicts = graph
        .conflicts
        .iter()
        .filter(|c| keep[c.a] && keep[c.b])
        .map(|c| ConflictEdge::new(remap[c.a], remap[c.b]))
        .collect();
    SpectrumGraph::assemble(nodes, edges, conflicts, graph.parent).expect("subgraph of a valid graph is valid")
}

/// A restricted view of a graph: some nodes and edges switched off, an
/// optional alternative start node, and nodes forced onto every path.
#[derive(Debug, Clone)]
pub struct GraphView<'g> {
    graph: &'g SpectrumGraph,
    node_on: Vec<bool>,
    edge_on: Vec<bool>,
    source: NodeId,
    forced: Vec<NodeId>,
}

impl<'g> GraphView<'g> {
    pub fn new(graph: &'g SpectrumGraph) -> Self {
        GraphView {
            graph,
            node_on: vec![true; graph.nodes.len()],
            edge_on: vec![true; graph.edges.len()],
            source: graph.source(),
            forced: Vec::new(),
        }
    }

    pub fn graph(&self) -> &'g SpectrumGraph {
        self.graph
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.graph.sink()
    }

    pub fn forced(&self) -> &[NodeId] {
        &self.forced
    }

    pub fn is_node_active(&self, v: NodeId) -> bool {
        self.node_on[v]
    }

    pub fn is_edge_active(&self, e: EdgeId) -> bool {
        let edge = &self.graph.edges[e];
        self.edge_on[e] && self.node_on[edge.from] && self.node_on[edge.to]
    }

    pub fn active_node_count(&self) -> usize {
        self.node_on.iter().filter(|&&on| on).count()
    }

    /// Start paths at `v` instead of the graph source.
    pub fn set_source(&mut self, v: NodeId) {
        self.source = v;
    }

    pub fn remove_node(&mut self, v: NodeId) {
        self.node_on[v] = false;
    }

    pub fn remove_edge(&mut self, e: EdgeId) {
        self.edge_on[e] = false;
    }

    /// Conflict edges whose endpoints are both active.
    pub fn active_conflicts(&self) -> impl Iterator<Item = (usize, &ConflictEdge)> + '_ {
        self.graph.conflicts.iter().enumerate().filter(|(_, c)| self.node_on[c.a] && self.node_on[c.b])
    }

    /// Require `v` on every path: its conflict partners are removed and so is
    /// every edge that jumps over it in topological order.
    pub fn force(&mut self, v: NodeId) -> Result<()> {
        if !self.node_on[v] {
            return Err(Error::ConflictingRestriction(format!("node {v} is forbidden or inactive")));
        }
        if let Some(&w) = self.forced.iter().find(|&&w| self.graph.in_conflict(v, w)) {
            return Err(Error::ConflictingRestriction(format!("forced nodes {v} and {w} conflict")));
        }
        if self.forced.contains(&v) {
            return Ok(());
        }
        self.forced.push(v);
        for &w in self.graph.conflict_partners(v) {
            self.node_on[w] = false;
        }
        for (e, edge) in self.graph.edges.iter().enumerate() {
            if edge.from < v && edge.to > v {
                self.edge_on[e] = false;
            }
        }
        Ok(())
    }

    pub fn forbid(&mut self, v: NodeId) -> Result<()> {
        if self.forced.contains(&v) {
            return Err(Error::ConflictingRestriction(format!("node {v} is both forced and forbidden")));
        }
        if v == self.source || v == self.sink() {
            return Err(Error::ConflictingRestriction("cannot forbid a path endpoint".into()));
        }
        self.node_on[v] = false;
        Ok(())
    }
}

/// View of `graph` with `forced_in` required on every path and `forbidden`
/// removed.
pub fn restrict<'g>(graph: &'g SpectrumGraph, forced_in: &[NodeId], forbidden: &[NodeId]) -> Result<GraphView<'g>> {
    let mut view = graph.view();
    if let Some(v) = forced_in.iter().find(|v| forbidden.contains(v)) {
        return Err(Error::ConflictingRestriction(format!("node {v} is both forced and forbidden")));
    }
    for &v in forbidden {
        view.forbid(v)?;
    }
    for &v in forced_in {
        view.force(v)?;
    }
    Ok(view)
}
