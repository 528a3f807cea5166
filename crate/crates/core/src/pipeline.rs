//! One spectrum in, ranked peptide candidates out.

use crate::chem::{peptide_residual_mass, IonType};
use crate::error::{Error, Result};
use crate::graph::{build_graph, remove_negative_nodes, GraphConfig};
use crate::kpaths::k_best_with_stats;
use crate::lagrange::{solve_lagrangian, LagrangeOptions, TraceRow};
use crate::rescore::{expand_superset, parent_mass_filter, rerank, score_candidates, Candidate, PsmParams, DEFAULT_MAX_EXPANSIONS};
use crate::scoring::{uniform_scores, ScoringModel};
use crate::spectrum::{rank_normalize, Spectrum, DEFAULT_MAX_RANK};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub ions: Vec<IonType>,
    pub graph: GraphConfig,
    /// Paths requested from the k-best search.
    pub k: usize,
    /// Candidates reported after rescoring.
    pub n_out: usize,
    pub solve: LagrangeOptions,
    pub psm: PsmParams,
    pub max_expansions: usize,
    pub max_rank: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ions: IonType::default_pair(),
            graph: GraphConfig::default(),
            k: 50,
            n_out: 10,
            solve: LagrangeOptions::default(),
            psm: PsmParams::default(),
            max_expansions: DEFAULT_MAX_EXPANSIONS,
            max_rank: DEFAULT_MAX_RANK,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum NodeScorer<'a> {
    /// Every node gets the same score.
    Uniform(f64),
    Model(&'a ScoringModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    /// Candidate residual mass minus the spectrum's.
    pub mass_delta: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SequenceResult {
    pub candidates: Vec<RankedCandidate>,
    pub graph_nodes: usize,
    pub paths: usize,
    pub expansions_truncated: bool,
    /// Iterations of the full-graph solve, when tracing.
    pub trace: Vec<TraceRow>,
}

pub fn sequence_spectrum(spectrum: &Spectrum, scorer: NodeScorer<'_>, config: &PipelineConfig) -> Result<SequenceResult> {
    let spectrum = rank_normalize(spectrum, config.max_rank);
    let mut graph = build_graph(&spectrum, &config.ions, &config.graph)?;
    match scorer {
        NodeScorer::Uniform(v) => uniform_scores(&mut graph, v),
        NodeScorer::Model(m) => m.score_graph(&mut graph, &spectrum, &config.ions)?,
    }
    let graph = remove_negative_nodes(&graph);
    let mut result = SequenceResult { graph_nodes: graph.nodes.len(), ..Default::default() };

    if config.solve.trace {
        match solve_lagrangian(&graph.view(), &config.solve) {
            Ok(report) => result.trace = report.trace,
            Err(Error::NoFeasiblePath) => {}
            Err(e) => return Err(e),
        }
    }
    let (paths, _) = k_best_with_stats(&graph, config.k, &config.solve)?;
    result.paths = paths.len();
    let (expanded, truncated) = expand_superset(&graph, &paths, config.max_expansions, config.graph.edge_tol);
    result.expansions_truncated = truncated;
    let mut kept = parent_mass_filter(expanded, &spectrum.parent, config.psm.parent_tol);
    score_candidates(&mut kept, &spectrum, &config.psm);
    result.candidates = rerank(kept, config.n_out)
        .into_iter()
        .map(|candidate| {
            let mass = peptide_residual_mass(&candidate.sequence).expect("expanded from known residues");
            RankedCandidate { mass_delta: mass - spectrum.parent.residual, candidate }
        })
        .collect();
    Ok(result)
}
