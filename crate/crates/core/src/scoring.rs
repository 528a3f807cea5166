//! Node scoring: a discrete Bayesian-network log-likelihood ratio over the
//! intensities of witness peaks, plus a rank score for the peak that
//! generated the node.
//!
//! Each mass region (default three equal slices of the residual mass) has
//! its own network and its own selection of ion types. The class variable
//! (true vs false PRM) is variable 0; ion-type variables follow in order of
//! decreasing frequency among true positives.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chem::{prefix_masses, IonType, ParentMass};
use crate::error::{Error, Result};
use crate::graph::{build_graph, GraphConfig, Node, SpectrumGraph};
use crate::spectrum::{rank_normalize, Peak, Spectrum, DEFAULT_MAX_RANK};

pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_REGIONS: usize = 3;
/// Intensity observation values: absent, ranks 1-3, ranks 4-10, weaker.
pub const INTENSITY_BINS: usize = 4;
pub const CLASS_VAR: usize = 0;
pub const CLASS_NAME: &str = "class";
/// Parent masses further than this from the annotated peptide are skipped.
pub const ANNOTATION_MASS_TOL: f64 = 2.5;

pub fn intensity_bin(peak: Option<&Peak>) -> u8 {
    match peak.map(|p| p.rank) {
        None => 0,
        Some(r) if r <= 3 => 1,
        Some(r) if r <= 10 => 2,
        Some(_) => 3,
    }
}

/// Region of a relative position `x / total`; boundaries go to the lower
/// region, `x = total` to the last one.
pub fn region_of(x: f64, total: f64, regions: usize) -> usize {
    let r = (x / total * regions as f64).floor();
    if r <= 0.0 {
        0
    } else {
        (r as usize).min(regions - 1)
    }
}

/// Discretized witness intensities of one node, one entry per ion type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessVector {
    pub region: usize,
    pub bins: Vec<u8>,
}

impl WitnessVector {
    pub fn observe(spectrum: &Spectrum, prm: f64, ions: &[IonType], tol: f64, regions: usize) -> Self {
        let bins = ions
            .iter()
            .map(|ion| intensity_bin(spectrum.find_peak(ion.mz_from_prm(prm, &spectrum.parent), tol)))
            .collect();
        WitnessVector { region: region_of(prm, spectrum.parent.residual, regions), bins }
    }

    fn project(&self, keep: &[usize]) -> WitnessVector {
        WitnessVector { region: self.region, bins: keep.iter().map(|&i| self.bins[i]).collect() }
    }
}

/// A witness vector with its class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeled {
    pub vector: WitnessVector,
    pub truth: bool,
}

/// Discrete network over the class variable and one variable per ion type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesNet {
    pub region: usize,
    pub names: Vec<String>,
    pub cardinality: Vec<usize>,
    /// Parents of each variable, as variable indices.
    pub parents: Vec<Vec<usize>>,
    /// `cpts[v][config][value]`, configs in mixed radix over `parents[v]`.
    pub cpts: Vec<Vec<Vec<f64>>>,
}

impl BayesNet {
    /// Structure only: every ion variable has the class as its sole parent.
    pub fn naive(region: usize, ions: &[IonType]) -> Self {
        let mut names = vec![CLASS_NAME.to_string()];
        names.extend(ions.iter().map(|i| i.name.clone()));
        let n = names.len();
        let mut cardinality = vec![INTENSITY_BINS; n];
        cardinality[CLASS_VAR] = 2;
        let mut parents = vec![vec![CLASS_VAR]; n];
        parents[CLASS_VAR].clear();
        BayesNet { region, names, cardinality, parents, cpts: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Directed edges as `(parent, child)` names.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                out.push((self.names[p].clone(), self.names[child].clone()));
            }
        }
        out
    }

    fn config_index(&self, var: usize, values: &[u8]) -> usize {
        self.parents[var].iter().fold(0, |acc, &p| acc * self.cardinality[p] + values[p] as usize)
    }

    fn configs(&self, var: usize) -> usize {
        self.parents[var].iter().map(|&p| self.cardinality[p]).product()
    }

    /// Probability of a full assignment (class first).
    pub fn joint(&self, values: &[u8]) -> f64 {
        (0..self.len()).map(|v| self.cpts[v][self.config_index(v, values)][values[v] as usize]).product()
    }

    /// `log P(bins | T) / P(bins | F)` by the factorized product. Variables
    /// that neither are nor depend on the class cancel out.
    pub fn llr(&self, bins: &[u8]) -> f64 {
        let mut values = Vec::with_capacity(self.len());
        values.push(1u8);
        values.extend_from_slice(bins);
        let mut sum = 0.0;
        for v in 1..self.len() {
            if !self.parents[v].contains(&CLASS_VAR) {
                continue;
            }
            values[CLASS_VAR] = 1;
            let t = self.cpts[v][self.config_index(v, &values)][values[v] as usize];
            values[CLASS_VAR] = 0;
            let f = self.cpts[v][self.config_index(v, &values)][values[v] as usize];
            sum += (t / f).ln();
        }
        sum
    }

    fn check_acyclic(&self) -> Result<()> {
        // Kahn's algorithm over parent lists
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for (c, ps) in self.parents.iter().enumerate() {
                if ps.contains(&v) {
                    indeg[c] -= 1;
                    if indeg[c] == 0 {
                        stack.push(c);
                    }
                }
            }
        }
        if seen == n {
            Ok(())
        } else {
            Err(Error::Model(format!("network for region {} has a cycle", self.region)))
        }
    }

    /// Structure and CPT consistency.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.cardinality.len() != n || self.parents.len() != n || self.cpts.len() != n {
            return Err(Error::Model("network arrays disagree in length".into()));
        }
        if self.parents.iter().flatten().any(|&p| p >= n) {
            return Err(Error::Model("parent index out of range".into()));
        }
        self.check_acyclic()?;
        for v in 0..n {
            if self.cpts[v].len() != self.configs(v) {
                return Err(Error::Model(format!("CPT of {} misses parent configurations", self.names[v])));
            }
            for row in &self.cpts[v] {
                let sum: f64 = row.iter().sum();
                if row.len() != self.cardinality[v] || (sum - 1.0).abs() > 1e-9 || row.iter().any(|p| p.is_nan() || *p <= 0.0) {
                    return Err(Error::Model(format!("CPT row of {} is not a distribution", self.names[v])));
                }
            }
        }
        Ok(())
    }
}

fn class_values(data: &[Labeled]) -> Vec<Vec<u8>> {
    data.iter()
        .map(|d| {
            let mut v = Vec::with_capacity(d.vector.bins.len() + 1);
            v.push(d.truth as u8);
            v.extend_from_slice(&d.vector.bins);
            v
        })
        .collect()
}

struct LogFactorial(Vec<f64>);

impl LogFactorial {
    fn new(n: usize) -> Self {
        let mut table = vec![0.0; n + 1];
        for i in 1..=n {
            table[i] = table[i - 1] + (i as f64).ln();
        }
        LogFactorial(table)
    }

    fn get(&self, n: usize) -> f64 {
        self.0[n]
    }
}

/// K2 (Bayesian-Dirichlet, uniform prior) local score of `var` under `parents`.
fn k2_local(data: &[Vec<u8>], card: &[usize], var: usize, parents: &[usize], lf: &LogFactorial) -> f64 {
    let r = card[var];
    let q: usize = parents.iter().map(|&p| card[p]).product();
    let mut counts = vec![0usize; q * r];
    for row in data {
        let j = parents.iter().fold(0, |acc, &p| acc * card[p] + row[p] as usize);
        counts[j * r + row[var] as usize] += 1;
    }
    let mut score = 0.0;
    for j in 0..q {
        let cell = &counts[j * r..(j + 1) * r];
        let n_j: usize = cell.iter().sum();
        score += lf.get(r - 1) - lf.get(n_j + r - 1);
        score += cell.iter().map(|&c| lf.get(c)).sum::<f64>();
    }
    score
}

/// Total K2 score of a structure; used to compare structures in tests.
pub fn k2_score(net: &BayesNet, data: &[Labeled]) -> f64 {
    let rows = class_values(data);
    let lf = LogFactorial::new(rows.len() + INTENSITY_BINS);
    (0..net.len()).map(|v| k2_local(&rows, &net.cardinality, v, &net.parents[v], &lf)).sum()
}

#[derive(Debug, Clone)]
pub struct StructureOptions {
    /// Parent limit per ion variable, the class link included.
    pub max_parents: usize,
}

impl Default for StructureOptions {
    fn default() -> Self {
        StructureOptions { max_parents: 2 }
    }
}

/// Greedy K2 hill climbing under the variable order of `net` (class first).
/// Starts from the naive structure and adds, per variable, the predecessor
/// that raises its local score most, until nothing improves or the parent
/// limit is hit.
pub fn learn_structure(mut net: BayesNet, data: &[Labeled], opts: &StructureOptions) -> BayesNet {
    let rows = class_values(data);
    let lf = LogFactorial::new(rows.len() + INTENSITY_BINS);
    for v in 1..net.len() {
        let mut parents = vec![CLASS_VAR];
        let mut current = k2_local(&rows, &net.cardinality, v, &parents, &lf);
        while parents.len() < opts.max_parents {
            let mut best: Option<(usize, f64)> = None;
            for cand in 1..v {
                if parents.contains(&cand) {
                    continue;
                }
                parents.push(cand);
                let s = k2_local(&rows, &net.cardinality, v, &parents, &lf);
                parents.pop();
                if s > current && best.is_none_or(|(_, b)| s > b) {
                    best = Some((cand, s));
                }
            }
            match best {
                Some((cand, s)) => {
                    parents.push(cand);
                    current = s;
                }
                None => break,
            }
        }
        net.parents[v] = parents;
    }
    net
}

/// Maximum-likelihood CPTs with add-one smoothing.
pub fn fit_cpts(mut net: BayesNet, data: &[Labeled]) -> BayesNet {
    let rows = class_values(data);
    net.cpts = (0..net.len())
        .map(|v| {
            let r = net.cardinality[v];
            let mut counts = vec![vec![1.0; r]; net.configs(v)];
            for row in &rows {
                counts[net.config_index(v, row)][row[v] as usize] += 1.0;
            }
            for cell in counts.iter_mut() {
                let total: f64 = cell.iter().sum();
                cell.iter_mut().for_each(|c| *c /= total);
            }
            counts
        })
        .collect();
    net
}

/// User-given structure: `parent child` name pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Topology {
    pub edges: Vec<(String, String)>,
}

impl Topology {
    /// One `parent child` pair per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse { line: i + 1, msg: format!("expected `parent child`, got `{line}`") });
            }
            edges.push((parts[0].to_string(), parts[1].to_string()));
        }
        Ok(Topology { edges })
    }

    /// Replace the structure of `net`. Edges naming variables the network
    /// does not have are an error.
    pub fn apply(&self, mut net: BayesNet) -> Result<BayesNet> {
        let index: HashMap<&str, usize> = net.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        net.parents = vec![Vec::new(); net.len()];
        for (p, c) in &self.edges {
            let (Some(&pi), Some(&ci)) = (index.get(p.as_str()), index.get(c.as_str())) else {
                return Err(Error::Model(format!("topology edge {p} -> {c} names an unselected variable")));
            };
            if ci == CLASS_VAR {
                return Err(Error::Model("the class variable cannot have parents".into()));
            }
            if !net.parents[ci].contains(&pi) {
                net.parents[ci].push(pi);
            }
        }
        net.check_acyclic()?;
        Ok(net)
    }
}

/// Ion types present in at least `threshold` percent of the true-positive
/// vectors, most frequent first. Returns indices into `ions`.
pub fn select_ion_types(tp: &[WitnessVector], ions: &[IonType], threshold: f64) -> Result<Vec<usize>> {
    if !(threshold > 0.0 && threshold <= 100.0) {
        return Err(Error::Model(format!("selection threshold {threshold} outside (0, 100]")));
    }
    if tp.is_empty() {
        return Err(Error::Model("no true-positive training vectors".into()));
    }
    let mut freq: Vec<(usize, usize)> =
        (0..ions.len()).map(|i| (i, tp.iter().filter(|v| v.bins[i] > 0).count())).collect();
    freq.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let min = threshold / 100.0 * tp.len() as f64;
    let chosen: Vec<usize> = freq.into_iter().filter(|&(_, c)| c as f64 >= min).map(|(i, _)| i).collect();
    if chosen.is_empty() {
        return Err(Error::Model(format!("no ion type reaches {threshold}% of true positives")));
    }
    Ok(chosen)
}

/// Intensity-rank statistics of one region: counts of peaks per rank and
/// explaining ion type (last column: unexplained).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub types: Vec<String>,
    /// `counts[rank - 1][type]`, ranks 1..=max_rank + 1.
    pub counts: Vec<Vec<f64>>,
}

impl RankTable {
    fn new(types: Vec<String>, max_rank: u32) -> Self {
        let cols = types.len() + 1;
        RankTable { types, counts: vec![vec![0.0; cols]; max_rank as usize + 1] }
    }

    /// `log P(type | rank) / P(type)` with add-one smoothing.
    pub fn score(&self, ion: &str, rank: u32) -> Result<f64> {
        let t = self
            .types
            .iter()
            .position(|n| n == ion)
            .ok_or_else(|| Error::Model(format!("ion type {ion} has no rank statistics")))?;
        let cols = self.types.len() as f64 + 1.0;
        let row = &self.counts[(rank.max(1) as usize - 1).min(self.counts.len() - 1)];
        let given_rank = (row[t] + 1.0) / (row.iter().sum::<f64>() + cols);
        let marginal_count: f64 = self.counts.iter().map(|r| r[t]).sum();
        let total: f64 = self.counts.iter().flatten().sum();
        let marginal = (marginal_count + 1.0) / (total + cols);
        Ok((given_rank / marginal).ln())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionModel {
    pub ions: Vec<IonType>,
    pub network: BayesNet,
}

/// Trained scorer: per-region networks and rank tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringModel {
    pub version: u32,
    pub regions: Vec<RegionModel>,
    pub rank_tables: Vec<RankTable>,
    /// Ion types whose peaks generate graph nodes.
    pub graph_ions: Vec<IonType>,
    /// Selection threshold (percent) used in training.
    pub threshold: f64,
    pub witness_tol: f64,
    pub max_rank: u32,
}

impl ScoringModel {
    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ScoringModel = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if model.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported model version {}", model.version)));
        }
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() || self.rank_tables.len() != self.regions.len() {
            return Err(Error::Model("region count mismatch".into()));
        }
        for r in &self.regions {
            r.network.validate()?;
            if r.network.len() != r.ions.len() + 1 {
                return Err(Error::Model("network size does not match its ion types".into()));
            }
        }
        Ok(())
    }

    /// Errors when some graph ion type lacks rank statistics, so that such a
    /// node cannot be silently scored zero.
    pub fn check_ion_types(&self, ions: &[IonType]) -> Result<()> {
        for table in &self.rank_tables {
            for ion in ions {
                if !table.types.contains(&ion.name) {
                    return Err(Error::Model(format!("ion type {} has no rank statistics", ion.name)));
                }
            }
        }
        Ok(())
    }

    pub fn llr(&self, node: &Node, spectrum: &Spectrum) -> f64 {
        let r = region_of(node.prm, spectrum.parent.residual, self.regions.len());
        let region = &self.regions[r];
        let v = WitnessVector::observe(spectrum, node.prm, &region.ions, self.witness_tol, self.regions.len());
        region.network.llr(&v.bins)
    }

    /// Rank score summed over the peaks that generated the node, each under
    /// the ion type it was read as.
    pub fn rank_score(&self, node: &Node, spectrum: &Spectrum, ions: &[IonType]) -> Result<f64> {
        let mut sum = 0.0;
        for src in &node.sources {
            let peak = &spectrum.peaks[src.peak];
            let r = region_of(peak.mz, spectrum.parent.total, self.rank_tables.len());
            sum += self.rank_tables[r].score(&ions[src.ion].name, peak.rank)?;
        }
        Ok(sum)
    }

    pub fn node_score(&self, node: &Node, spectrum: &Spectrum, ions: &[IonType]) -> Result<f64> {
        Ok(self.llr(node, spectrum) + self.rank_score(node, spectrum, ions)?)
    }

    /// Score every internal node of `graph` (built from `spectrum` with
    /// `ions`) in place.
    pub fn score_graph(&self, graph: &mut SpectrumGraph, spectrum: &Spectrum, ions: &[IonType]) -> Result<()> {
        self.check_ion_types(ions)?;
        let scores = graph
            .nodes
            .iter()
            .map(|n| if n.sources.is_empty() { Ok(0.0) } else { self.node_score(n, spectrum, ions) })
            .collect::<Result<Vec<f64>>>()?;
        graph.set_scores(&scores);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub regions: usize,
    /// Percent of true positives an ion type must appear in.
    pub threshold: f64,
    pub structure: StructureOptions,
    pub topology: Option<Topology>,
    /// Ion types whose peaks generate nodes.
    pub graph_ions: Vec<IonType>,
    /// Candidate witness types for the networks.
    pub witness_ions: Vec<IonType>,
    pub graph: GraphConfig,
    pub witness_tol: f64,
    /// A node is a true positive when within this of a true PRM.
    pub match_tol: f64,
    pub max_rank: u32,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            regions: DEFAULT_REGIONS,
            threshold: 20.0,
            structure: StructureOptions::default(),
            topology: None,
            graph_ions: IonType::default_pair(),
            witness_ions: IonType::witness_set(),
            graph: GraphConfig::default(),
            witness_tol: 0.5,
            match_tol: 0.5,
            max_rank: DEFAULT_MAX_RANK,
            seed: 0,
        }
    }
}

/// Labeled witness vectors (over `opts.witness_ions`) per region.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub per_region: Vec<Vec<Labeled>>,
    pub skipped: usize,
    /// Spectra with fewer false-positive nodes than true positives.
    pub imbalanced: usize,
}

fn annotated_ok(spectrum: &Spectrum, peptide: &str) -> Result<Option<Vec<f64>>> {
    let parent = ParentMass::of_peptide(peptide)?;
    if (parent.residual - spectrum.parent.residual).abs() > ANNOTATION_MASS_TOL {
        log::warn!("{}: peptide {peptide} disagrees with parent mass; skipped", spectrum.id);
        return Ok(None);
    }
    Ok(Some(prefix_masses(peptide)?))
}

/// True-positive nodes of each annotated spectrum graph and an equal number
/// of uniformly sampled false positives, as labeled witness vectors.
pub fn extract_training_vectors(annotated: &[(Spectrum, String)], opts: &TrainOptions) -> Result<TrainingSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut set = TrainingSet { per_region: vec![Vec::new(); opts.regions], ..Default::default() };
    for (raw, peptide) in annotated {
        let Some(true_prms) = annotated_ok(raw, peptide)? else {
            set.skipped += 1;
            continue;
        };
        let spectrum = rank_normalize(raw, opts.max_rank);
        let graph = build_graph(&spectrum, &opts.graph_ions, &opts.graph)?;
        let internal = &graph.nodes[1..graph.nodes.len() - 1];
        let (tp, fp): (Vec<&Node>, Vec<&Node>) = internal
            .iter()
            .partition(|n| true_prms.iter().any(|&m| (m - n.prm).abs() <= opts.match_tol));
        if fp.len() < tp.len() {
            set.imbalanced += 1;
        }
        let picked = sample(&mut rng, fp.len(), tp.len().min(fp.len()));
        let chosen = tp.iter().map(|n| (*n, true)).chain(picked.iter().map(|i| (fp[i], false)));
        for (node, truth) in chosen {
            let vector = WitnessVector::observe(&spectrum, node.prm, &opts.witness_ions, opts.witness_tol, opts.regions);
            debug_assert!(vector.bins.iter().any(|&b| b > 0) || opts.witness_ions.len() < opts.graph_ions.len());
            set.per_region[vector.region].push(Labeled { vector, truth });
        }
    }
    Ok(set)
}

/// Count peaks by intensity rank and the graph ion type explaining them.
fn rank_tables(annotated: &[(Spectrum, String)], opts: &TrainOptions) -> Result<Vec<RankTable>> {
    let names: Vec<String> = opts.graph_ions.iter().map(|i| i.name.clone()).collect();
    let mut tables = vec![RankTable::new(names.clone(), opts.max_rank); opts.regions];
    for (raw, peptide) in annotated {
        let Some(true_prms) = annotated_ok(raw, peptide)? else { continue };
        let spectrum = rank_normalize(raw, opts.max_rank);
        for peak in &spectrum.peaks {
            let explained = opts.graph_ions.iter().position(|ion| {
                true_prms.iter().any(|&m| (ion.mz_from_prm(m, &spectrum.parent) - peak.mz).abs() <= opts.witness_tol)
            });
            let col = explained.unwrap_or(names.len());
            let r = region_of(peak.mz, spectrum.parent.total, opts.regions);
            let row = (peak.rank.max(1) as usize - 1).min(opts.max_rank as usize);
            tables[r].counts[row][col] += 1.0;
        }
    }
    Ok(tables)
}

/// Train a scoring model from spectra annotated with their peptides.
pub fn train(annotated: &[(Spectrum, String)], opts: &TrainOptions) -> Result<ScoringModel> {
    let set = extract_training_vectors(annotated, opts)?;
    let mut regions = Vec::with_capacity(opts.regions);
    for (r, data) in set.per_region.iter().enumerate() {
        let tp: Vec<WitnessVector> = data.iter().filter(|d| d.truth).map(|d| d.vector.clone()).collect();
        let keep = select_ion_types(&tp, &opts.witness_ions, opts.threshold)
            .map_err(|e| Error::Model(format!("region {r}: {e}")))?;
        let ions: Vec<IonType> = keep.iter().map(|&i| opts.witness_ions[i].clone()).collect();
        let projected: Vec<Labeled> =
            data.iter().map(|d| Labeled { vector: d.vector.project(&keep), truth: d.truth }).collect();
        let net = BayesNet::naive(r, &ions);
        let net = match &opts.topology {
            Some(t) => t.apply(net)?,
            None => learn_structure(net, &projected, &opts.structure),
        };
        let network = fit_cpts(net, &projected);
        regions.push(RegionModel { ions, network });
    }
    let model = ScoringModel {
        version: MODEL_VERSION,
        regions,
        rank_tables: rank_tables(annotated, opts)?,
        graph_ions: opts.graph_ions.clone(),
        threshold: opts.threshold,
        witness_tol: opts.witness_tol,
        max_rank: opts.max_rank,
    };
    model.validate()?;
    Ok(model)
}

/// Every internal node scores `value`.
pub fn uniform_scores(graph: &mut SpectrumGraph, value: f64) {
    let scores = vec![value; graph.nodes.len()];
    graph.set_scores(&scores);
}
