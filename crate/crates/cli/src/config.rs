use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use denovo_core::chem::parse_ion_types;
use denovo_core::graph::GraphConfig;
use denovo_core::lagrange::LagrangeOptions;
use denovo_core::rescore::{PsmParams, DEFAULT_MAX_EXPANSIONS};
use denovo_core::scoring::{Topology, TrainOptions, DEFAULT_REGIONS};
use denovo_core::spectrum::DEFAULT_MAX_RANK;
use denovo_core::{IonType, PipelineConfig};
use serde::Deserialize;

use crate::CliError;

/// Every tunable in one place. A TOML file may set any subset; command-line
/// flags override it.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ions: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub topology: Option<PathBuf>,
    pub k: usize,
    pub n_out: usize,
    pub edge_tol: f64,
    pub merge_tol: f64,
    pub parent_tol: f64,
    pub witness_tol: f64,
    pub isotope_tol: f64,
    pub max_iter: usize,
    pub max_expansions: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub uniform_score: bool,
    pub trace: bool,
    /// Percent of true positives an ion type needs to enter a network.
    pub threshold: f64,
    pub regions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ions: None,
            model: None,
            topology: None,
            k: 50,
            n_out: 10,
            edge_tol: 0.5,
            merge_tol: 0.3,
            parent_tol: 2.5,
            witness_tol: 0.5,
            isotope_tol: 0.1,
            max_iter: 100,
            max_expansions: DEFAULT_MAX_EXPANSIONS,
            seed: 0,
            threads: None,
            uniform_score: false,
            trace: false,
            threshold: 20.0,
            regions: DEFAULT_REGIONS,
        }
    }
}

/// Flags shared by the commands that run the pipeline.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with defaults for any of these options
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Ion types generating graph nodes, one `name terminus delta charge` per line
    #[arg(long, value_name = "FILE")]
    pub ions: Option<PathBuf>,
    /// Trained scoring model
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Network structure used instead of learning one (training only)
    #[arg(long, value_name = "FILE")]
    pub topology: Option<PathBuf>,
    /// Paths requested from the k-best search
    #[arg(long)]
    pub k: Option<usize>,
    /// Candidates reported per spectrum
    #[arg(long)]
    pub n_out: Option<usize>,
    /// Residue mass tolerance for graph edges (Da)
    #[arg(long, value_name = "DA")]
    pub edge_tol: Option<f64>,
    /// Parent mass tolerance for candidates (Da)
    #[arg(long, value_name = "DA")]
    pub parent_tol: Option<f64>,
    /// Witness peak tolerance (Da)
    #[arg(long, value_name = "DA")]
    pub witness_tol: Option<f64>,
    /// Subgradient iterations before branching
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Score every node 1 instead of using a model
    #[arg(long)]
    pub uniform_score: bool,
    /// Write the solver iteration CSV to stderr
    #[arg(long)]
    pub trace: bool,
    /// Ion-type frequency threshold in percent (training only)
    #[arg(long)]
    pub threshold: Option<f64>,
}

impl RunArgs {
    /// File defaults (if any) overridden by explicit flags, then validated.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = self.$field.clone() { cfg.$field = v; } )* };
        }
        take!(k, n_out, edge_tol, parent_tol, witness_tol, max_iter, seed, threshold);
        if self.ions.is_some() {
            cfg.ions = self.ions.clone();
        }
        if self.model.is_some() {
            cfg.model = self.model.clone();
        }
        if self.topology.is_some() {
            cfg.topology = self.topology.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.uniform_score |= self.uniform_score;
        cfg.trace |= self.trace;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let tolerances = [
            ("edge-tol", self.edge_tol),
            ("merge-tol", self.merge_tol),
            ("parent-tol", self.parent_tol),
            ("witness-tol", self.witness_tol),
            ("isotope-tol", self.isotope_tol),
        ];
        for (name, v) in tolerances {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("k", self.k), ("n-out", self.n_out), ("max-iter", self.max_iter), ("regions", self.regions)] {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be at least 1")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 100.0) {
            return Err(CliError::Config(format!("threshold must be in (0, 100], got {}", self.threshold)));
        }
        Ok(())
    }

    /// Ion types from `--ions`, else `fallback`.
    pub fn ion_types(&self, fallback: &[IonType]) -> Result<Vec<IonType>, CliError> {
        match &self.ions {
            Some(path) => {
                let text = read(path)?;
                let ions = parse_ion_types(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                if ions.is_empty() {
                    return Err(CliError::Config(format!("{}: no ion types", path.display())));
                }
                Ok(ions)
            }
            None => Ok(fallback.to_vec()),
        }
    }

    pub fn graph_config(&self) -> GraphConfig {
        GraphConfig { edge_tol: self.edge_tol, merge_tol: self.merge_tol, ..GraphConfig::default() }
    }

    pub fn pipeline(&self, ions: Vec<IonType>) -> PipelineConfig {
        PipelineConfig {
            ions,
            graph: self.graph_config(),
            k: self.k,
            n_out: self.n_out,
            solve: LagrangeOptions { max_iter: self.max_iter, trace: self.trace, ..LagrangeOptions::default() },
            psm: PsmParams {
                witness_tol: self.witness_tol,
                parent_tol: self.parent_tol,
                isotope_tol: self.isotope_tol,
                ..PsmParams::default()
            },
            max_expansions: self.max_expansions,
            max_rank: DEFAULT_MAX_RANK,
        }
    }

    pub fn train_options(&self, graph_ions: Vec<IonType>) -> Result<TrainOptions, CliError> {
        let topology = match &self.topology {
            Some(path) => Some(Topology::parse(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?),
            None => None,
        };
        Ok(TrainOptions {
            regions: self.regions,
            threshold: self.threshold,
            topology,
            graph_ions,
            graph: self.graph_config(),
            witness_tol: self.witness_tol,
            seed: self.seed,
            ..TrainOptions::default()
        })
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
