//! De novo peptide sequencing on extended spectrum graphs.
//!
//! Candidate peptides are the k highest-scoring antisymmetric source-to-sink
//! paths of the spectrum graph, found by Lagrangian relaxation with a
//! deviation-based k-best search on top.

pub mod chem;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod graph;
pub mod kpaths;
pub mod lagrange;
pub mod oracle;
pub mod pipeline;
pub mod rescore;
pub mod scoring;
pub mod spectrum;

pub use chem::{IonType, ParentMass, Terminus};
pub use error::{Error, Result};
pub use kpaths::k_best_antisymmetric;
pub use graph::{build_graph, ConflictEdge, DirectedEdge, EdgeLabel, GraphConfig, GraphView, Node, SpectrumGraph};
pub use lagrange::{dag_longest_path, solve_lagrangian, LagrangeOptions, SolveReport};
pub use oracle::AntisymPath;
pub use spectrum::{parse_mgf, Peak, Spectrum};
pub use pipeline::{sequence_spectrum, NodeScorer, PipelineConfig};
pub use scoring::ScoringModel;
