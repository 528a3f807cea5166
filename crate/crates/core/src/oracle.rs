//! Exhaustive reference solver for the longest antisymmetric path problem.
//!
//! Enumerates every s-t path of a (small) graph view and tags each one as
//! feasible when it contains no conflicting node pair. Used as ground truth
//! for the relaxation-based solvers.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphView, NodeId, SpectrumGraph};

pub const DEFAULT_ENUMERATION_LIMIT: usize = 1_000_000;

/// An s-t path: node sequence, the edges joining them, and the summed edge
/// weight.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymPath {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub score: f64,
}

impl AntisymPath {
    /// Path along `edges`, scored with the graph's edge weights.
    pub fn from_edges(graph: &SpectrumGraph, start: NodeId, edges: Vec<EdgeId>) -> Self {
        let mut nodes = Vec::with_capacity(edges.len() + 1);
        nodes.push(start);
        let mut score = 0.0;
        for &e in &edges {
            let edge = &graph.edges[e];
            debug_assert_eq!(edge.from, *nodes.last().unwrap());
            nodes.push(edge.to);
            score += edge.weight;
        }
        AntisymPath { nodes, edges, score }
    }

    /// Concatenated edge labels, with unresolved runs in brackets.
    pub fn labels(&self, graph: &SpectrumGraph) -> String {
        self.edges.iter().map(|&e| graph.edges[e].label.to_string()).collect()
    }

    /// No two nodes on the path are joined by a conflict edge.
    pub fn is_antisymmetric(&self, graph: &SpectrumGraph) -> bool {
        let mut on_path = vec![false; graph.nodes.len()];
        for &v in &self.nodes {
            on_path[v] = true;
        }
        self.nodes.iter().all(|&v| graph.conflict_partners(v).iter().all(|&w| !on_path[w]))
    }

    /// Conflict pairs violated by this path.
    pub fn violations(&self, graph: &SpectrumGraph) -> Vec<(NodeId, NodeId)> {
        let mut on_path = vec![false; graph.nodes.len()];
        for &v in &self.nodes {
            on_path[v] = true;
        }
        graph.conflicts.iter().filter(|c| on_path[c.a] && on_path[c.b]).map(|c| (c.a, c.b)).collect()
    }
}

/// Score descending, then node sequence ascending.
pub fn rank_order(a: &AntisymPath, b: &AntisymPath) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.nodes.cmp(&b.nodes))
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub paths: Vec<EnumeratedPath>,
    /// Enumeration stopped at the limit; `paths` is partial.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct EnumeratedPath {
    pub path: AntisymPath,
    pub feasible: bool,
}

/// Every source-to-sink path of the view, depth first in node-id order.
pub fn enumerate_paths(view: &GraphView<'_>, limit: usize) -> Enumeration {
    let graph = view.graph();
    let (source, sink) = (view.source(), view.sink());
    let mut paths = Vec::new();
    let mut truncated = false;
    if !view.is_node_active(source) || !view.is_node_active(sink) {
        return Enumeration { paths, truncated };
    }

    // conflict multiplicity of each node with the current partial path
    let mut blocked = vec![0usize; graph.nodes.len()];
    let mut nodes = vec![source];
    let mut edges: Vec<EdgeId> = Vec::new();
    let mut violations = 0usize;
    let mut cursor = vec![0usize];
    let enter = |v: NodeId, blocked: &mut Vec<usize>, violations: &mut usize| {
        *violations += blocked[v];
        for &w in graph.conflict_partners(v) {
            blocked[w] += 1;
        }
    };
    let leave = |v: NodeId, blocked: &mut Vec<usize>, violations: &mut usize| {
        for &w in graph.conflict_partners(v) {
            blocked[w] -= 1;
        }
        *violations -= blocked[v];
    };
    enter(source, &mut blocked, &mut violations);

    while let Some(&v) = nodes.last() {
        if v == sink {
            if paths.len() == limit {
                truncated = true;
                break;
            }
            let path = AntisymPath::from_edges(graph, source, edges.clone());
            paths.push(EnumeratedPath { path, feasible: violations == 0 });
        }
        let depth = nodes.len() - 1;
        let out = graph.out_edges(v);
        let mut next = None;
        while cursor[depth] < out.len() {
            let e = out[cursor[depth]];
            cursor[depth] += 1;
            if v != sink && view.is_edge_active(e) {
                next = Some(e);
                break;
            }
        }
        match next {
            Some(e) => {
                let to = graph.edges[e].to;
                enter(to, &mut blocked, &mut violations);
                nodes.push(to);
                edges.push(e);
                cursor.push(0);
            }
            None => {
                leave(v, &mut blocked, &mut violations);
                nodes.pop();
                edges.pop();
                cursor.pop();
            }
        }
    }
    Enumeration { paths, truncated }
}

/// The `k` best feasible paths, ordered by [`rank_order`], checked against
/// the forced nodes of the view.
pub fn exact_k_best(view: &GraphView<'_>, k: usize) -> Result<Vec<AntisymPath>> {
    exact_k_best_with_limit(view, k, DEFAULT_ENUMERATION_LIMIT)
}

pub fn exact_k_best_with_limit(view: &GraphView<'_>, k: usize, limit: usize) -> Result<Vec<AntisymPath>> {
    let all = enumerate_paths(view, limit);
    if all.truncated {
        return Err(Error::LimitExceeded(limit));
    }
    let mut feasible: Vec<AntisymPath> = all
        .paths
        .into_iter()
        .filter(|p| p.feasible && view.forced().iter().all(|v| p.path.nodes.contains(v)))
        .map(|p| p.path)
        .collect();
    feasible.sort_by(rank_order);
    feasible.truncate(k);
    Ok(feasible)
}
