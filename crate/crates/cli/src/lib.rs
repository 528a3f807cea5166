//! Command-line front end: sequence, train, evaluate, synth, trace.

pub mod config;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use denovo_core::eval::{best_in_top_k, synth_spectrum, NoiseOpts, PredictionMetrics};
use denovo_core::lagrange::trace_csv;
use denovo_core::pipeline::SequenceResult;
use denovo_core::scoring::train;
use denovo_core::spectrum::write_mgf;
use denovo_core::{parse_mgf, sequence_spectrum, Error, IonType, NodeScorer, ScoringModel, Spectrum};
use rayon::prelude::*;

pub use config::{RunArgs, RunConfig};

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Model(_) => 3,
            CliError::Config(_) => 4,
        }
    }

    fn from_core(context: &str, e: Error) -> Self {
        match e {
            Error::Model(_) => CliError::Model(format!("{context}: {e}")),
            Error::Io(_) | Error::Parse { .. } => CliError::Io(format!("{context}: {e}")),
            _ => CliError::Model(format!("{context}: {e}")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "denovo", version, about = "De novo peptide sequencing from tandem mass spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank candidate peptides for every spectrum of an MGF file
    Sequence {
        mgf: PathBuf,
        /// Write the TSV here instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train a scoring model from annotated spectra
    Train {
        mgf: PathBuf,
        /// TSV of `spectrum_id<TAB>peptide`
        annotations: PathBuf,
        /// Model file to write
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score predictions against annotations at top-1/3/5/10
    Evaluate {
        predictions: PathBuf,
        annotations: PathBuf,
    },
    /// Generate synthetic spectra for the given peptides
    Synth {
        /// Peptides to simulate
        #[arg(required = true)]
        peptides: Vec<String>,
        /// Noise peaks as a fraction of signal peaks
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Add isotope children to signal peaks
        #[arg(long)]
        isotopes: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write a `spectrum_id<TAB>peptide` annotation TSV
        #[arg(long, value_name = "FILE")]
        annotations: Option<PathBuf>,
        /// Ion types to simulate (default b and y)
        #[arg(long, value_name = "FILE")]
        ions: Option<PathBuf>,
    },
    /// Print the solver iteration CSV for every spectrum
    Trace {
        mgf: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

pub const TSV_HEADER: &str = "spectrum_id\trank\tsequence\tpsm_score\tpath_score\tmass_delta";

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Sequence { mgf, out, run } => {
            let tsv = cmd_sequence(&mgf, &run.resolve()?)?;
            emit(out.as_deref(), &tsv, stdout)
        }
        Command::Train { mgf, annotations, out, run } => {
            let summary = cmd_train(&mgf, &annotations, &out, &run.resolve()?)?;
            emit(None, &summary, stdout)
        }
        Command::Evaluate { predictions, annotations } => emit(None, &cmd_evaluate(&predictions, &annotations)?, stdout),
        Command::Synth { peptides, noise, isotopes, seed, annotations, ions } => {
            let ions = RunConfig { ions, ..RunConfig::default() }.ion_types(&IonType::default_pair())?;
            let opts = NoiseOpts { noise_fraction: noise, isotopes, ..NoiseOpts::default() };
            let (mgf, tsv) = cmd_synth(&peptides, &ions, &opts, seed)?;
            if let Some(path) = annotations {
                fs::write(&path, tsv).map_err(|e| CliError::io(&path, e))?;
            }
            emit(None, &mgf, stdout)
        }
        Command::Trace { mgf, run } => {
            let cfg = RunConfig { trace: true, ..run.resolve()? };
            emit(None, &cmd_trace(&mgf, &cfg)?, stdout)
        }
    }
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn load_spectra(path: &Path) -> Result<Vec<Spectrum>, CliError> {
    let text = config::read(path)?;
    parse_mgf(&text).map_err(|e| CliError::io(path, e))
}

/// Scoring model and graph ion types for a run.
fn scorer_setup(cfg: &RunConfig) -> Result<(Option<ScoringModel>, Vec<IonType>), CliError> {
    match (&cfg.model, cfg.uniform_score) {
        (_, true) => Ok((None, cfg.ion_types(&IonType::default_pair())?)),
        (Some(path), false) => {
            let model = ScoringModel::load(path).map_err(|e| match e {
                Error::Io(io) => CliError::io(path, io),
                other => CliError::Model(format!("{}: {other}", path.display())),
            })?;
            let ions = cfg.ion_types(&model.graph_ions)?;
            model.check_ion_types(&ions).map_err(|e| CliError::Model(e.to_string()))?;
            Ok((Some(model), ions))
        }
        (None, false) => Err(CliError::Config("either --model or --uniform-score is required".into())),
    }
}

fn thread_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Run the pipeline on every spectrum, results in input order.
fn run_all(spectra: &[Spectrum], cfg: &RunConfig) -> Result<Vec<Result<SequenceResult, CliError>>, CliError> {
    let (model, ions) = scorer_setup(cfg)?;
    let pipeline = cfg.pipeline(ions);
    let scorer = match &model {
        Some(m) => NodeScorer::Model(m),
        None => NodeScorer::Uniform(1.0),
    };
    let pool = thread_pool(cfg)?;
    Ok(pool.install(|| {
        spectra
            .par_iter()
            .map(|s| sequence_spectrum(s, scorer, &pipeline).map_err(|e| CliError::from_core(&s.id, e)))
            .collect()
    }))
}

fn trace_rows(id: &str, result: &SequenceResult, out: &mut String) {
    for line in trace_csv(&result.trace).lines().skip(1) {
        let _ = writeln!(out, "{id},{line}");
    }
}

const TRACE_HEADER: &str = "spectrum_id,depth,t,z_lambda,z_star,theta,violated\n";

/// Candidate TSV for every spectrum of `mgf`. Spectra that fail are logged
/// and skipped; if all fail the first error is returned.
pub fn cmd_sequence(mgf: &Path, cfg: &RunConfig) -> Result<String, CliError> {
    let spectra = load_spectra(mgf)?;
    let results = run_all(&spectra, cfg)?;
    let mut out = format!("{TSV_HEADER}\n");
    let mut trace = String::from(TRACE_HEADER);
    let mut first_error = None;
    let mut ok = 0;
    for (s, r) in spectra.iter().zip(results) {
        match r {
            Ok(result) => {
                ok += 1;
                for (rank, c) in result.candidates.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                        s.id,
                        rank + 1,
                        c.candidate.sequence,
                        c.candidate.psm_score,
                        c.candidate.path_score,
                        c.mass_delta
                    );
                }
                trace_rows(&s.id, &result, &mut trace);
            }
            Err(e) => {
                log::warn!("{e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if cfg.trace {
        eprint!("{trace}");
    }
    match first_error {
        Some(e) if ok == 0 => Err(e),
        _ => Ok(out),
    }
}

pub fn cmd_trace(mgf: &Path, cfg: &RunConfig) -> Result<String, CliError> {
    let spectra = load_spectra(mgf)?;
    let cfg = RunConfig { k: 1, trace: true, ..cfg.clone() };
    let mut out = String::from(TRACE_HEADER);
    for (s, r) in spectra.iter().zip(run_all(&spectra, &cfg)?) {
        match r {
            Ok(result) => trace_rows(&s.id, &result, &mut out),
            Err(e) => log::warn!("{e}"),
        }
    }
    Ok(out)
}

/// `spectrum_id<TAB>peptide` lines; a header line and `#` comments are
/// skipped.
pub fn parse_annotations(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = config::read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("spectrum_id")) {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next()) {
            (Some(id), Some(peptide)) if !peptide.is_empty() => out.push((id.to_string(), peptide.trim().to_string())),
            _ => return Err(CliError::Io(format!("{}:{}: expected `spectrum_id<TAB>peptide`", path.display(), i + 1))),
        }
    }
    Ok(out)
}

pub fn cmd_train(mgf: &Path, annotations: &Path, out: &Path, cfg: &RunConfig) -> Result<String, CliError> {
    let spectra = load_spectra(mgf)?;
    let labels: HashMap<String, String> = parse_annotations(annotations)?.into_iter().collect();
    let pairs: Vec<(Spectrum, String)> = spectra
        .into_iter()
        .filter_map(|s| {
            let peptide = labels.get(&s.id)?.clone();
            Some((s, peptide))
        })
        .collect();
    if pairs.is_empty() {
        return Err(CliError::Model("no spectrum has an annotation".into()));
    }
    let opts = cfg.train_options(cfg.ion_types(&IonType::default_pair())?)?;
    let model = train(&pairs, &opts).map_err(|e| CliError::from_core("training", e))?;
    model.save(out).map_err(|e| CliError::io(out, e))?;

    let mut summary = format!("trained on {} spectra\n", pairs.len());
    for region in &model.regions {
        let names: Vec<&str> = region.ions.iter().map(|i| i.name.as_str()).collect();
        let edges: Vec<String> = region.network.edges().iter().map(|(p, c)| format!("{p}->{c}")).collect();
        let _ = writeln!(summary, "region {}: ions {} edges {}", region.network.region, names.join(","), edges.join(" "));
    }
    Ok(summary)
}

pub const EVAL_KS: [usize; 4] = [1, 3, 5, 10];

/// Per-spectrum accuracy and recall at each of [`EVAL_KS`], then the means.
pub fn cmd_evaluate(predictions: &Path, annotations: &Path) -> Result<String, CliError> {
    let truth: HashMap<String, String> = parse_annotations(annotations)?.into_iter().collect();
    let text = config::read(predictions)?;
    // predictions per spectrum, in rank order of appearance
    let mut order: Vec<String> = Vec::new();
    let mut preds: HashMap<String, Vec<String>> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with("spectrum_id") {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(CliError::Io(format!("{}:{}: too few columns", predictions.display(), i + 1)));
        }
        let id = fields[0].to_string();
        if !preds.contains_key(&id) {
            order.push(id.clone());
        }
        preds.entry(id).or_default().push(fields[2].to_string());
    }

    let mut out = String::from("spectrum_id");
    for k in EVAL_KS {
        let _ = write!(out, "\taccuracy@{k}\trecall@{k}");
    }
    out.push('\n');
    let mut sums = [PredictionMetrics::default(); EVAL_KS.len()];
    let mut joined = 0;
    for id in &order {
        let Some(peptide) = truth.get(id) else {
            log::warn!("{id}: no annotation; skipped");
            continue;
        };
        joined += 1;
        out.push_str(id);
        for (slot, k) in EVAL_KS.iter().enumerate() {
            let m = best_in_top_k(&preds[id], peptide, *k).map_err(|e| CliError::Io(format!("{id}: {e}")))?;
            sums[slot].accuracy += m.accuracy;
            sums[slot].recall += m.recall;
            let _ = write!(out, "\t{:.4}\t{:.4}", m.accuracy, m.recall);
        }
        out.push('\n');
    }
    out.push_str("mean");
    for s in sums {
        let n = joined.max(1) as f64;
        let _ = write!(out, "\t{:.4}\t{:.4}", s.accuracy / n, s.recall / n);
    }
    out.push('\n');
    Ok(out)
}

/// MGF text and annotation TSV for synthetic spectra of `peptides`.
pub fn cmd_synth(peptides: &[String], ions: &[IonType], opts: &NoiseOpts, seed: u64) -> Result<(String, String), CliError> {
    let mut spectra = Vec::with_capacity(peptides.len());
    let mut tsv = String::from("spectrum_id\tpeptide\n");
    for (i, p) in peptides.iter().enumerate() {
        let mut s = synth_spectrum(p, ions, opts, seed.wrapping_add(i as u64)).map_err(|e| CliError::Config(format!("{p}: {e}")))?;
        s.id = format!("synth_{i}");
        let _ = writeln!(tsv, "{}\t{p}", s.id);
        spectra.push(s);
    }
    Ok((write_mgf(&spectra), tsv))
}
