//! Small deterministic graphs for tests, benches and the acceptance suite.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chem::{distinct_residues, prefix_masses, IonType, ParentMass};
use crate::graph::{build_graph, EdgeLabel, GraphConfig, SpectrumGraph};
use crate::oracle::enumerate_paths;
use crate::spectrum::{Peak, Spectrum};

/// Paths a small random graph may have before it is rejected, keeping the
/// exhaustive oracle fast.
pub const SMALL_GRAPH_PATH_LIMIT: usize = 20_000;

/// Eight-node graph whose heaviest path visits both ends of a conflict.
///
/// Node scores: `B1`, `B2` = 2 (conflicting), the rest 1. The symmetric path
/// `s B1 m1 B2 m2 t` scores 6, the best antisymmetric ones score 5.
pub fn symmetric_trap() -> SpectrumGraph {
    // ids: 0 s, 1 B1, 2 m3, 3 m1, 4 m4, 5 B2, 6 m2, 7 t
    let scores = [0.0, 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 0.0];
    let nodes = scores.iter().enumerate().map(|(i, &s)| (i as f64 * 100.0, s)).collect();
    let edges = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6), (6, 7)]
        .into_iter()
        .map(|(a, b)| (a, b, EdgeLabel::Residue('G')))
        .collect();
    SpectrumGraph::from_parts(nodes, edges, vec![(1, 5)], ParentMass::from_residual(700.0))
        .expect("fixture is a valid graph")
}

fn random_peptide(rng: &mut ChaCha8Rng, len: usize) -> String {
    let alphabet: Vec<char> = distinct_residues().map(|(c, _)| c).collect();
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

/// Spectrum with a partial b/y ladder of a random peptide plus uniform noise.
fn random_spectrum(rng: &mut ChaCha8Rng, len: RangeInclusive<usize>, noise: RangeInclusive<usize>, keep: f64) -> Spectrum {
    let n = rng.gen_range(len);
    let peptide = random_peptide(rng, n);
    let parent = ParentMass::of_peptide(&peptide).expect("alphabet residues");
    let (b, y) = (IonType::b(), IonType::y());
    let mut peaks = Vec::new();
    let prefixes = prefix_masses(&peptide).expect("alphabet residues");
    for &prm in &prefixes {
        for ion in [&b, &y] {
            if rng.gen_bool(keep) {
                peaks.push(Peak::new(ion.mz_from_prm(prm, &parent), rng.gen_range(50.0..100.0)));
            }
        }
    }
    for _ in 0..rng.gen_range(noise) {
        peaks.push(Peak::new(rng.gen_range(50.0..parent.residual), rng.gen_range(1.0..60.0)));
    }
    Spectrum::new(peptide, peaks, parent, 2)
}

fn randomize_scores(rng: &mut ChaCha8Rng, graph: &mut SpectrumGraph) {
    let scores: Vec<f64> = (0..graph.nodes.len()).map(|_| rng.gen_range(-1.0..=3.0)).collect();
    graph.set_scores(&scores);
}

/// Seeded random spectrum graph (b and y ions, single- and two-residue
/// edges, node scores uniform in [-1, 3]) with a node count in `nodes` and
/// at most [`SMALL_GRAPH_PATH_LIMIT`] source-sink paths.
pub fn random_graph(seed: u64, nodes: RangeInclusive<usize>) -> SpectrumGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = GraphConfig { max_edge_residues: 2, ..GraphConfig::default() };
    let ions = IonType::default_pair();
    loop {
        let spectrum = random_spectrum(&mut rng, 4..=7, 0..=6, 0.7);
        let Ok(mut graph) = build_graph(&spectrum, &ions, &config) else { continue };
        if !nodes.contains(&graph.nodes.len()) {
            continue;
        }
        if enumerate_paths(&graph.view(), SMALL_GRAPH_PATH_LIMIT).truncated {
            continue;
        }
        randomize_scores(&mut rng, &mut graph);
        return graph;
    }
}

/// Seeded desk-scale graph: longer peptide, heavy noise, node count in
/// `nodes`, scores uniform in [-1, 3]. Too large for exhaustive checks.
pub fn random_large_graph(seed: u64, nodes: RangeInclusive<usize>) -> SpectrumGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = GraphConfig { max_edge_residues: 2, ..GraphConfig::default() };
    let ions = IonType::default_pair();
    let lo = *nodes.start() / 2;
    let hi = *nodes.end() / 2;
    loop {
        let spectrum = random_spectrum(&mut rng, 10..=20, lo..=hi, 0.8);
        let Ok(mut graph) = build_graph(&spectrum, &ions, &config) else { continue };
        if !nodes.contains(&graph.nodes.len()) {
            continue;
        }
        randomize_scores(&mut rng, &mut graph);
        return graph;
    }
}
