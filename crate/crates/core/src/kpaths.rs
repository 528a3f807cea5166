//! k longest antisymmetric paths by deviation (Yen/Lawler style).
//!
//! Each accepted path is split at every node from its own deviation point
//! onward. The prefix is kept, the edges already taken after that prefix by
//! accepted paths are removed, and the best spur path from the split node is
//! found with the Lagrangian solver on the graph stripped of prefix nodes and
//! of every node conflicting with the prefix. Prefix plus spur becomes a
//! candidate; the best candidate is accepted next.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::graph::{NodeId, SpectrumGraph};
use crate::lagrange::{solve_lagrangian, LagrangeOptions};
use crate::oracle::{rank_order, AntisymPath};

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationCandidate {
    pub path: AntisymPath,
    /// Index on `path` of the node where it leaves its parent.
    pub deviation_index: usize,
    /// Rank (0-based) of the accepted path it was spawned from.
    pub parent_rank: usize,
}

/// Wrapper ordering candidates best first: score descending, then node
/// sequence ascending.
#[derive(Debug, Clone)]
struct Ranked(DeviationCandidate);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        rank_order(&self.0.path, &other.0.path)
    }
}

/// Candidate pool, deduplicated by node sequence against everything it has
/// ever held.
#[derive(Debug, Default)]
pub struct CandidateSet {
    queue: BTreeSet<Ranked>,
    seen: HashSet<Vec<NodeId>>,
}

impl CandidateSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// False when the node sequence was offered before.
    pub fn push(&mut self, candidate: DeviationCandidate) -> bool {
        if !self.seen.insert(candidate.path.nodes.clone()) {
            return false;
        }
        self.queue.insert(Ranked(candidate));
        true
    }

    pub fn pop(&mut self) -> Option<DeviationCandidate> {
        self.queue.pop_first().map(|r| r.0)
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    /// Score of the `n`-th best candidate (1-based).
    pub fn nth_score(&self, n: usize) -> Option<f64> {
        self.queue.iter().nth(n.checked_sub(1)?).map(|r| r.0.path.score)
    }
}

/// Position where `path` leaves the closest of `previous`: one less than the
/// longest common node prefix.
pub fn deviation_node(path: &AntisymPath, previous: &[AntisymPath]) -> usize {
    let lcp = previous
        .iter()
        .map(|q| {
            assert_ne!(q.nodes, path.nodes, "duplicate path");
            path.nodes.iter().zip(&q.nodes).take_while(|(a, b)| a == b).count()
        })
        .max()
        .unwrap_or(1);
    lcp.saturating_sub(1)
}

#[derive(Debug, Clone, Default)]
pub struct KBestStats {
    pub spur_solves: usize,
    pub aborted: usize,
    pub iterations: usize,
}

/// Up to `k` best antisymmetric paths, best first. Fewer are returned when
/// the graph has fewer.
pub fn k_best_antisymmetric(graph: &SpectrumGraph, k: usize, opts: &LagrangeOptions) -> Result<Vec<AntisymPath>> {
    k_best_with_stats(graph, k, opts).map(|(paths, _)| paths)
}

pub fn k_best_with_stats(
    graph: &SpectrumGraph,
    k: usize,
    opts: &LagrangeOptions,
) -> Result<(Vec<AntisymPath>, KBestStats)> {
    let mut stats = KBestStats::default();
    if k == 0 {
        return Ok((Vec::new(), stats));
    }
    let base = LagrangeOptions { abort_bound: None, trace: false, ..opts.clone() };
    let first = match solve_lagrangian(&graph.view(), &base) {
        Ok(report) => {
            stats.iterations += report.iterations;
            report.best.expect("unbounded solve returns a path")
        }
        Err(Error::NoFeasiblePath) => return Ok((Vec::new(), stats)),
        Err(e) => return Err(e),
    };

    let mut accepted: Vec<AntisymPath> = Vec::new();
    let mut deviation: Vec<usize> = Vec::new();
    let mut pool = CandidateSet::new();
    pool.push(DeviationCandidate { path: first, deviation_index: 0, parent_rank: 0 });

    while accepted.len() < k {
        let Some(next) = pool.pop() else { break };
        accepted.push(next.path);
        deviation.push(next.deviation_index);
        if accepted.len() == k {
            break;
        }
        let rank = accepted.len() - 1;
        let path = &accepted[rank];
        let start = deviation[rank];

        for j in start..path.nodes.len() - 1 {
            let prefix = &path.nodes[..=j];
            let spur = path.nodes[j];
            let mut view = graph.view();
            view.set_source(spur);
            for q in &accepted {
                if q.nodes.len() > j + 1 && q.nodes[..=j] == *prefix {
                    view.remove_edge(q.edges[j]);
                }
            }
            for &v in prefix {
                if v != spur {
                    view.remove_node(v);
                }
                for &w in graph.conflict_partners(v) {
                    view.remove_node(w);
                }
            }
            let prefix_score: f64 = path.edges[..j].iter().map(|&e| graph.edges[e].weight).sum();

            // the spur only matters if it can reach the (k - |A|)-th best candidate
            let needed = k - accepted.len();
            let cutoff = pool.nth_score(needed).map(|s| s - prefix_score);
            let spur_opts = LagrangeOptions { abort_bound: cutoff, ..base.clone() };
            stats.spur_solves += 1;
            let report = match solve_lagrangian(&view, &spur_opts) {
                Ok(r) => r,
                Err(Error::NoFeasiblePath) => continue,
                Err(e) => return Err(e),
            };
            stats.iterations += report.iterations;
            if cutoff.is_some_and(|c| report.bound < c - opts.tol) {
                stats.aborted += 1;
                continue;
            }
            let Some(tail) = report.best else { continue };
            let mut edges = path.edges[..j].to_vec();
            edges.extend_from_slice(&tail.edges);
            let full = AntisymPath::from_edges(graph, graph.source(), edges);
            debug_assert!(full.is_antisymmetric(graph));
            pool.push(DeviationCandidate { path: full, deviation_index: j, parent_rank: rank });
        }
    }
    Ok((accepted, stats))
}
