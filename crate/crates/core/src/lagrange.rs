//! Longest antisymmetric path by Lagrangian relaxation.
//!
//! The conflict constraints (at most one selected out-edge across the two
//! endpoints of each conflict edge `e`) are moved into the objective with
//! multipliers `λ_e >= 0`. For fixed multipliers the problem is a plain
//! longest path in a DAG: every out-edge of `v` loses `Σ_{e∋v} λ_e` and the
//! constant `Σ_e λ_e` is added back. Its value `Z(λ)` bounds the best
//! antisymmetric path from above. Multipliers follow projected subgradient
//! steps with a Polyak-type step size; when the bound fails to meet the
//! incumbent within the iteration budget the solver branches on a
//! conflicting node (forced in / forbidden).

use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphView, NodeId, SpectrumGraph};
use crate::oracle::AntisymPath;

#[derive(Debug, Clone)]
pub struct LagrangeOptions {
    /// Subgradient iterations before branching.
    pub max_iter: usize,
    pub tol: f64,
    /// Stop as soon as the bound drops below this value.
    pub abort_bound: Option<f64>,
    pub gamma0: f64,
    /// Halve γ after this many iterations without bound improvement.
    pub gamma_patience: usize,
    pub max_branch_depth: usize,
    /// Record one [`TraceRow`] per iteration.
    pub trace: bool,
}

impl Default for LagrangeOptions {
    fn default() -> Self {
        LagrangeOptions {
            max_iter: 100,
            tol: 1e-6,
            abort_bound: None,
            gamma0: 2.0,
            gamma_patience: 5,
            max_branch_depth: 64,
            trace: false,
        }
    }
}

/// Multiplier state of one subgradient run. Vectors are indexed by conflict
/// edge id of the underlying graph; conflicts outside the view stay at zero.
#[derive(Debug, Clone)]
pub struct LagrangeState {
    pub lambda: Vec<f64>,
    pub subgradient: Vec<f64>,
    pub theta: f64,
    pub gamma: f64,
    pub iteration: usize,
    pub incumbent: Option<AntisymPath>,
    pub best_bound: f64,
}

impl LagrangeState {
    fn new(conflicts: usize, gamma: f64) -> Self {
        LagrangeState {
            lambda: vec![0.0; conflicts],
            subgradient: vec![0.0; conflicts],
            theta: 0.0,
            gamma,
            iteration: 0,
            incumbent: None,
            best_bound: f64::INFINITY,
        }
    }

    pub fn incumbent_score(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|p| p.score)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub depth: usize,
    pub iteration: usize,
    pub bound: f64,
    /// Best known feasible score, NaN when none.
    pub incumbent: f64,
    pub theta: f64,
    pub violated: usize,
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("depth,t,z_lambda,z_star,theta,violated\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{}\n",
            r.depth, r.iteration, r.bound, r.incumbent, r.theta, r.violated
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub best: Option<AntisymPath>,
    pub bound: f64,
    pub iterations: usize,
    pub branches: usize,
    pub max_branch_depth: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Relaxed edge weights plus the constant term `Σ λ_e`.
#[derive(Debug, Clone)]
pub struct RelaxedWeights {
    pub weights: Vec<f64>,
    pub constant: f64,
}

pub fn relaxed_weights(graph: &SpectrumGraph, lambda: &[f64]) -> RelaxedWeights {
    let mut penalty = vec![0.0; graph.nodes.len()];
    let mut constant = 0.0;
    for (c, &l) in graph.conflicts.iter().zip(lambda) {
        debug_assert!(l >= 0.0);
        penalty[c.a] += l;
        penalty[c.b] += l;
        constant += l;
    }
    let weights = graph.edges.iter().map(|e| e.weight - penalty[e.from]).collect();
    RelaxedWeights { weights, constant }
}

/// Reusable buffers for repeated longest-path passes over one graph.
struct DagWorkspace {
    dist: Vec<f64>,
    pred: Vec<Option<EdgeId>>,
}

impl DagWorkspace {
    fn new(n: usize) -> Self {
        DagWorkspace { dist: vec![f64::NEG_INFINITY; n], pred: vec![None; n] }
    }

    /// Single forward pass in node-id (topological) order. Among equal
    /// predecessors the one with the smaller id wins.
    fn longest(&mut self, view: &GraphView<'_>, weights: &[f64]) -> Option<(Vec<EdgeId>, f64)> {
        let graph = view.graph();
        let (source, sink) = (view.source(), view.sink());
        if !view.is_node_active(source) || !view.is_node_active(sink) {
            return None;
        }
        for v in source..=sink {
            self.dist[v] = f64::NEG_INFINITY;
            self.pred[v] = None;
        }
        self.dist[source] = 0.0;
        for v in source..sink {
            let d = self.dist[v];
            if d == f64::NEG_INFINITY || !view.is_node_active(v) {
                continue;
            }
            for &e in graph.out_edges(v) {
                if !view.is_edge_active(e) {
                    continue;
                }
                let to = graph.edges[e].to;
                let cand = d + weights[e];
                if cand > self.dist[to] {
                    self.dist[to] = cand;
                    self.pred[to] = Some(e);
                }
            }
        }
        if self.dist[sink] == f64::NEG_INFINITY {
            return None;
        }
        let mut edges = Vec::new();
        let mut v = sink;
        while let Some(e) = self.pred[v] {
            edges.push(e);
            v = graph.edges[e].from;
        }
        edges.reverse();
        Some((edges, self.dist[sink]))
    }
}

/// Maximum-weight source-to-sink path of the view under `weights`.
/// The returned path carries the graph's own edge weights as its score; the
/// second value is its weight under `weights`.
pub fn dag_longest_path(view: &GraphView<'_>, weights: &[f64]) -> Result<(AntisymPath, f64)> {
    let graph = view.graph();
    let mut ws = DagWorkspace::new(graph.nodes.len());
    let (edges, value) = ws.longest(view, weights).ok_or(Error::NoFeasiblePath)?;
    Ok((AntisymPath::from_edges(graph, view.source(), edges), value))
}

struct Solver<'a> {
    opts: &'a LagrangeOptions,
    ws: DagWorkspace,
    on_path: Vec<bool>,
    iterations: usize,
    branches: usize,
    max_depth: usize,
    trace: Vec<TraceRow>,
}

struct NodeOutcome {
    best: Option<AntisymPath>,
    bound: f64,
    converged: bool,
}

fn better(candidate: &AntisymPath, current: Option<&AntisymPath>) -> bool {
    match current {
        None => true,
        Some(c) => candidate.score > c.score || (candidate.score == c.score && candidate.nodes < c.nodes),
    }
}

impl<'a> Solver<'a> {
    fn mark(&mut self, path: &AntisymPath, on: bool) {
        for &v in &path.nodes {
            self.on_path[v] = on;
        }
    }

    fn feasible(&mut self, graph: &SpectrumGraph, path: &AntisymPath) -> bool {
        self.mark(path, true);
        let ok = path.nodes.iter().all(|&v| graph.conflict_partners(v).iter().all(|&w| !self.on_path[w]));
        self.mark(path, false);
        ok
    }

    /// Drop conflict partners of path nodes, best-scored first, and re-solve
    /// with the original weights until the path is conflict free.
    fn repair(&mut self, view: &GraphView<'_>, start: &AntisymPath) -> Option<AntisymPath> {
        let graph = view.graph();
        let mut reduced = view.clone();
        let mut current = start.clone();
        let weights: Vec<f64> = graph.edges.iter().map(|e| e.weight).collect();
        loop {
            if self.feasible(graph, &current) {
                return Some(current);
            }
            let mut order = current.nodes.clone();
            order.sort_by(|&a, &b| graph.nodes[b].score.total_cmp(&graph.nodes[a].score).then(a.cmp(&b)));
            for v in order {
                if !reduced.is_node_active(v) {
                    continue;
                }
                for &w in graph.conflict_partners(v) {
                    if !view.forced().contains(&w) && w != reduced.source() {
                        reduced.remove_node(w);
                    }
                }
            }
            let (edges, _) = self.ws.longest(&reduced, &weights)?;
            let next = AntisymPath::from_edges(graph, reduced.source(), edges);
            if next.nodes == current.nodes {
                return None;
            }
            current = next;
        }
    }

    fn solve(&mut self, view: &GraphView<'_>, lower: Option<f64>, depth: usize) -> Result<NodeOutcome> {
        let graph = view.graph();
        let opts = self.opts;
        self.max_depth = self.max_depth.max(depth);
        let active: Vec<usize> = view.active_conflicts().map(|(i, _)| i).collect();
        let mut state = LagrangeState::new(graph.conflicts.len(), opts.gamma0);
        let mut stall = 0;
        let mut repaired = false;
        let mut best_infeasible: Option<AntisymPath> = None;
        let mut converged = false;

        for t in 0..opts.max_iter {
            state.iteration = t;
            self.iterations += 1;
            let relaxed = relaxed_weights(graph, &state.lambda);
            let Some((edges, value)) = self.ws.longest(view, &relaxed.weights) else {
                if t == 0 {
                    // sink unreachable: the view has no path at all
                    return Ok(NodeOutcome { best: None, bound: f64::NEG_INFINITY, converged: true });
                }
                unreachable!("reachability does not depend on the multipliers");
            };
            let path = AntisymPath::from_edges(graph, view.source(), edges);
            let z = value + relaxed.constant;
            let improved = z < state.best_bound;
            if improved {
                state.best_bound = z;
                stall = 0;
            } else {
                stall += 1;
                if stall >= opts.gamma_patience {
                    state.gamma *= 0.5;
                    stall = 0;
                }
            }

            let feasible = self.feasible(graph, &path);
            if feasible {
                if better(&path, state.incumbent.as_ref()) {
                    state.incumbent = Some(path.clone());
                }
            } else {
                if improved || best_infeasible.is_none() {
                    best_infeasible = Some(path.clone());
                }
                if state.incumbent.is_none() && lower.is_none() && !repaired {
                    repaired = true;
                    if let Some(p) = self.repair(view, &path) {
                        state.incumbent = Some(p);
                    }
                }
            }

            let known = match (state.incumbent_score(), lower) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };

            self.mark(&path, true);
            let mut denom = 0.0;
            let mut violated = 0;
            for &c in &active {
                let conflict = &graph.conflicts[c];
                let x = |v: NodeId| (self.on_path[v] && v != view.sink()) as i32 as f64;
                let s = 1.0 - x(conflict.a) - x(conflict.b);
                if s < 0.0 {
                    violated += 1;
                }
                state.subgradient[c] = s;
                denom += s * s;
            }
            self.mark(&path, false);

            let done = known.is_some_and(|k| state.best_bound <= k + opts.tol)
                || opts.abort_bound.is_some_and(|a| state.best_bound < a - opts.tol);
            if done || denom == 0.0 {
                debug_assert!(denom > 0.0 || feasible);
                if opts.trace {
                    self.trace.push(TraceRow {
                        depth,
                        iteration: t,
                        bound: z,
                        incumbent: known.unwrap_or(f64::NAN),
                        theta: 0.0,
                        violated,
                    });
                }
                converged = done;
                break;
            }

            let target = known.unwrap_or_else(|| state.best_bound - state.best_bound.abs().max(1.0));
            state.theta = state.gamma * (z - target) / denom;
            for &c in &active {
                state.lambda[c] = (state.lambda[c] - state.theta * state.subgradient[c]).max(0.0);
            }
            if opts.trace {
                self.trace.push(TraceRow {
                    depth,
                    iteration: t,
                    bound: z,
                    incumbent: known.unwrap_or(f64::NAN),
                    theta: state.theta,
                    violated,
                });
            }
        }

        let mut best = state.incumbent.take();
        let mut bound = state.best_bound;
        if converged {
            return Ok(NodeOutcome { best, bound, converged });
        }
        let Some(infeasible) = best_infeasible else {
            return Ok(NodeOutcome { best, bound, converged: false });
        };
        if depth >= opts.max_branch_depth {
            log::warn!("branch depth limit {} reached; returning incumbent", opts.max_branch_depth);
            return Ok(NodeOutcome { best, bound, converged: false });
        }

        let pivot = infeasible
            .violations(graph)
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .max_by(|&a, &b| graph.nodes[a].score.total_cmp(&graph.nodes[b].score).then(b.cmp(&a)))
            .expect("infeasible path has a violated conflict");
        self.branches += 1;

        let mut with = view.clone();
        with.force(pivot)?;
        let mut without = view.clone();
        without.forbid(pivot)?;

        let mut child_bound = f64::NEG_INFINITY;
        let mut all_converged = true;
        for child in [with, without] {
            let floor = match (best.as_ref().map(|p| p.score), lower) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            let out = self.solve(&child, floor, depth + 1)?;
            child_bound = child_bound.max(out.bound);
            all_converged &= out.converged;
            if let Some(p) = out.best {
                if better(&p, best.as_ref()) {
                    best = Some(p);
                }
            }
        }
        bound = bound.min(child_bound);
        Ok(NodeOutcome { best, bound, converged: all_converged })
    }
}

/// Best antisymmetric source-to-sink path of the view.
///
/// Returns `NoFeasiblePath` when the view admits no antisymmetric path. When
/// `abort_bound` cuts the search short the report may carry no path.
pub fn solve_lagrangian(view: &GraphView<'_>, opts: &LagrangeOptions) -> Result<SolveReport> {
    let graph = view.graph();
    let mut solver = Solver {
        opts,
        ws: DagWorkspace::new(graph.nodes.len()),
        on_path: vec![false; graph.nodes.len()],
        iterations: 0,
        branches: 0,
        max_depth: 0,
        trace: Vec::new(),
    };
    let out = solver.solve(view, None, 0)?;
    let aborted = opts.abort_bound.is_some_and(|a| out.bound < a - opts.tol);
    if out.best.is_none() && !aborted {
        return Err(Error::NoFeasiblePath);
    }
    Ok(SolveReport {
        best: out.best,
        bound: out.bound,
        iterations: solver.iterations,
        branches: solver.branches,
        max_branch_depth: solver.max_depth,
        converged: out.converged,
        trace: solver.trace,
    })
}
