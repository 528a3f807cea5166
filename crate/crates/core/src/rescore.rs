//! Candidate expansion, parent-mass filtering and peptide-spectrum-match
//! rescoring.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::chem::{distinct_residues, peptide_residual_mass, prefix_masses, IonType, ParentMass, ISOTOPE_SPACING};
use crate::graph::{EdgeLabel, SpectrumGraph};
use crate::oracle::AntisymPath;
use crate::spectrum::Spectrum;

pub const DEFAULT_MAX_EXPANSIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub sequence: String,
    pub path_score: f64,
    pub psm_score: f64,
    /// Rank (0-based) of the path it was expanded from.
    pub path_rank: usize,
}

/// Ordered residue strings of length `len` whose mass is within `tol` of
/// `mass`, best fitting first.
pub fn resolve_run(len: usize, mass: f64, tol: f64) -> Vec<String> {
    let alphabet: Vec<(char, f64)> = distinct_residues().collect();
    let mut out: Vec<(f64, String)> = Vec::new();
    let mut stack: Vec<(String, f64)> = vec![(String::new(), 0.0)];
    while let Some((prefix, m)) = stack.pop() {
        if prefix.len() == len {
            if (m - mass).abs() <= tol {
                out.push(((m - mass).abs(), prefix));
            }
            continue;
        }
        for &(c, cm) in &alphabet {
            // every residue weighs at least 57 Da; prune overshooting prefixes
            let remaining = (len - prefix.len() - 1) as f64 * 57.0;
            if m + cm + remaining <= mass + tol {
                let mut next = prefix.clone();
                next.push(c);
                stack.push((next, m + cm));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out.into_iter().map(|(_, s)| s).collect()
}

/// Residue-level candidates of each path, multi-residue edges replaced by
/// every matching residue order. At most `max_expansions` per path; the
/// flag reports whether any path was cut.
pub fn expand_superset(
    graph: &SpectrumGraph,
    paths: &[AntisymPath],
    max_expansions: usize,
    tol: f64,
) -> (Vec<Candidate>, bool) {
    let mut out = Vec::new();
    let mut truncated = false;
    for (rank, path) in paths.iter().enumerate() {
        let options: Vec<Vec<String>> = path
            .edges
            .iter()
            .map(|&e| match &graph.edges[e].label {
                EdgeLabel::Residue(c) => vec![c.to_string()],
                EdgeLabel::Combo { len, .. } => resolve_run(*len as usize, graph.edge_mass(e), tol),
            })
            .collect();
        if options.iter().any(Vec::is_empty) {
            continue;
        }
        let mut partial = vec![String::new()];
        for opts in &options {
            let mut next = Vec::with_capacity(partial.len() * opts.len());
            'fill: for p in &partial {
                for o in opts {
                    if next.len() == max_expansions {
                        truncated = true;
                        break 'fill;
                    }
                    next.push(format!("{p}{o}"));
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|sequence| Candidate {
            sequence,
            path_score: path.score,
            psm_score: 0.0,
            path_rank: rank,
        }));
    }
    (out, truncated)
}

/// Keep candidates whose residual mass is within `tol` of the parent's.
pub fn parent_mass_filter(candidates: Vec<Candidate>, parent: &ParentMass, tol: f64) -> Vec<Candidate> {
    candidates
        .into_iter()
        .filter(|c| peptide_residual_mass(&c.sequence).is_ok_and(|m| (m - parent.residual).abs() <= tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsotopeClass {
    /// Has an isotope child.
    Primary,
    /// Is an isotope child.
    Secondary,
    Lone,
}

/// Isotope role of peak `idx` for an ion of `charge`.
pub fn classify_peak(spectrum: &Spectrum, idx: usize, charge: u32, tol: f64) -> IsotopeClass {
    let mz = spectrum.peaks[idx].mz;
    let step = ISOTOPE_SPACING / charge.max(1) as f64;
    if spectrum.has_peak_near(mz - step, tol) {
        IsotopeClass::Secondary
    } else if spectrum.has_peak_near(mz + step, tol) {
        IsotopeClass::Primary
    } else {
        IsotopeClass::Lone
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsmParams {
    /// Witness types and their base scores.
    pub witnesses: Vec<(IonType, f64)>,
    pub isotope_bonus: f64,
    pub missing_penalty: f64,
    pub secondary_factor: f64,
    /// Witness m/z window; the reward falls linearly to zero at its edge.
    pub witness_tol: f64,
    pub isotope_tol: f64,
    pub parent_tol: f64,
}

impl Default for PsmParams {
    fn default() -> Self {
        let base = |name: &str| match name {
            "b" | "y" => 1.0,
            "b2" | "y2" => 0.5,
            "a" => 0.3,
            _ => 0.2,
        };
        PsmParams {
            witnesses: IonType::witness_set()
                .into_iter()
                .map(|ion| {
                    let score = base(&ion.name);
                    (ion, score)
                })
                .collect(),
            isotope_bonus: 0.2,
            missing_penalty: 0.5,
            secondary_factor: 0.8,
            witness_tol: 0.5,
            isotope_tol: 0.1,
            parent_tol: 2.5,
        }
    }
}

impl PsmParams {
    /// Same constants, restricted to the named witness types.
    pub fn with_types(mut self, names: &[&str]) -> Self {
        self.witnesses.retain(|(ion, _)| names.contains(&ion.name.as_str()));
        self
    }
}

/// Most intense peak within `tol` of `mz` not yet credited, nearer on ties.
fn unclaimed_peak(spectrum: &Spectrum, claimed: &[bool], mz: f64, tol: f64) -> Option<usize> {
    let lo = spectrum.peaks.partition_point(|p| p.mz < mz - tol);
    let mut best: Option<usize> = None;
    for (i, p) in spectrum.peaks.iter().enumerate().skip(lo) {
        if p.mz > mz + tol {
            break;
        }
        if claimed[i] {
            continue;
        }
        let better = best.is_none_or(|b| {
            let q = &spectrum.peaks[b];
            p.intensity > q.intensity || (p.intensity == q.intensity && (p.mz - mz).abs() < (q.mz - mz).abs())
        });
        if better {
            best = Some(i);
        }
    }
    best
}

/// Reward witness peaks found at every cleavage site, penalize missing ones.
///
/// Each spectrum peak is credited to one witness at most, so a peak that
/// happens to sit where two ion types are expected counts once. Witness
/// types claim peaks in order of decreasing base score.
pub fn psm_score(sequence: &str, spectrum: &Spectrum, params: &PsmParams) -> f64 {
    let (Ok(prefixes), Ok(parent)) = (prefix_masses(sequence), ParentMass::of_peptide(sequence)) else {
        return f64::NEG_INFINITY;
    };
    let mut order: Vec<&(IonType, f64)> = params.witnesses.iter().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut claimed = vec![false; spectrum.peaks.len()];
    let mut score = 0.0;
    for (ion, base) in order {
        for &prm in &prefixes {
            let mz = ion.mz_from_prm(prm, &parent);
            match unclaimed_peak(spectrum, &claimed, mz, params.witness_tol) {
                Some(idx) => {
                    claimed[idx] = true;
                    let delta = (spectrum.peaks[idx].mz - mz).abs();
                    let weight = 1.0 - delta / params.witness_tol;
                    let class = classify_peak(spectrum, idx, ion.charge, params.isotope_tol);
                    let factor = if class == IsotopeClass::Secondary { params.secondary_factor } else { 1.0 };
                    score += base * factor * weight;
                    if class == IsotopeClass::Primary {
                        score += base * params.isotope_bonus;
                    }
                }
                None => score -= base * params.missing_penalty,
            }
        }
    }
    score
}

/// Score every candidate against the spectrum.
pub fn score_candidates(candidates: &mut [Candidate], spectrum: &Spectrum, params: &PsmParams) {
    for c in candidates.iter_mut() {
        c.psm_score = psm_score(&c.sequence, spectrum, params);
    }
}

/// Best first by PSM score, then path score, then sequence; one entry per
/// sequence; at most `n_out`.
pub fn rerank(mut candidates: Vec<Candidate>, n_out: usize) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        b.psm_score
            .total_cmp(&a.psm_score)
            .then(b.path_score.total_cmp(&a.path_score))
            .then_with(|| a.sequence.cmp(&b.sequence))
    });
    let mut seen = HashSet::new();
    candidates.retain(|c| seen.insert(c.sequence.clone()));
    candidates.truncate(n_out);
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::residue_mass;
    use crate::eval::{synth_spectrum, NoiseOpts};
    use crate::spectrum::Peak;

    fn cand(seq: &str, psm: f64, path: f64) -> Candidate {
        Candidate { sequence: seq.into(), path_score: path, psm_score: psm, path_rank: 0 }
    }

    fn spectrum(mzs: &[f64]) -> Spectrum {
        let peaks = mzs.iter().map(|&m| Peak::new(m, 10.0)).collect();
        Spectrum::new("s", peaks, ParentMass::from_residual(1000.0), 1)
    }

    #[test]
    fn pair_resolution_matches_brute_force() {
        let gg = 2.0 * residue_mass('G').unwrap();
        let runs = resolve_run(2, gg, 0.5);
        let alphabet: Vec<(char, f64)> = distinct_residues().collect();
        let mut brute = Vec::new();
        for &(a, ma) in &alphabet {
            for &(b, mb) in &alphabet {
                if (ma + mb - gg).abs() <= 0.5 {
                    brute.push(format!("{a}{b}"));
                }
            }
        }
        let (mut x, mut y) = (runs.clone(), brute);
        x.sort();
        y.sort();
        assert_eq!(x, y);
        assert_eq!(runs[0], "GG");
        assert!(runs.iter().all(|r| r.len() == 2));
        // G+A in both orders, nothing else that close
        let ga = residue_mass('G').unwrap() + residue_mass('A').unwrap();
        assert_eq!(resolve_run(2, ga, 0.01), vec!["AG".to_string(), "GA".to_string()]);
    }

    #[test]
    fn triple_resolution_matches_brute_force() {
        let mass = peptide_residual_mass("VEA").unwrap();
        let alphabet: Vec<(char, f64)> = distinct_residues().collect();
        let mut brute = Vec::new();
        for &(a, ma) in &alphabet {
            for &(b, mb) in &alphabet {
                for &(c, mc) in &alphabet {
                    if (ma + mb + mc - mass).abs() <= 0.5 {
                        brute.push(format!("{a}{b}{c}"));
                    }
                }
            }
        }
        let mut ours = resolve_run(3, mass, 0.5);
        ours.sort();
        brute.sort();
        assert_eq!(ours, brute);
    }

    #[test]
    fn expansion_of_plain_and_combo_paths() {
        let prms = [0.0, 99.06841, 228.11100, 299.14811, 568.33];
        let nodes = prms.iter().map(|&m| (m, 1.0)).collect();
        let edges = vec![
            (0, 1, EdgeLabel::Residue('V')),
            (1, 2, EdgeLabel::Residue('E')),
            (2, 3, EdgeLabel::Residue('A')),
            (3, 4, EdgeLabel::Combo { len: 2, residues: "LR".into() }),
        ];
        let g = SpectrumGraph::from_parts(nodes, edges, vec![], ParentMass::from_residual(568.33)).unwrap();
        let path = AntisymPath::from_edges(&g, 0, (0..4).collect());
        let (cands, truncated) = expand_superset(&g, std::slice::from_ref(&path), 100, 0.5);
        assert!(!truncated);
        let seqs: Vec<&str> = cands.iter().map(|c| c.sequence.as_str()).collect();
        assert!(seqs.contains(&"VEALR") && seqs.contains(&"VEARL"));
        assert!(seqs.iter().all(|s| s.starts_with("VEA") && s.len() == 5));

        let (cut, truncated) = expand_superset(&g, std::slice::from_ref(&path), 1, 0.5);
        assert!(truncated);
        assert_eq!(cut.len(), 1);

        let plain = AntisymPath::from_edges(&g, 0, vec![0, 1, 2]);
        assert_eq!(plain.labels(&g), "VEA");
    }

    #[test]
    fn mass_filter() {
        let parent = ParentMass::of_peptide("VEALR").unwrap();
        let kept = parent_mass_filter(vec![cand("VEALR", 0.0, 0.0), cand("VEALK", 0.0, 0.0)], &parent, 2.5);
        // K is 28 Da lighter than R
        assert_eq!(kept.len(), 1);
        let shifted = ParentMass::from_residual(parent.residual + 3.0);
        assert!(parent_mass_filter(vec![cand("VEALR", 0.0, 0.0)], &shifted, 2.5).is_empty());
        assert!(parent_mass_filter(vec![], &parent, 2.5).is_empty());
        for c in parent_mass_filter(vec![cand("VEALR", 0.0, 0.0)], &parent, 2.5) {
            assert!((peptide_residual_mass(&c.sequence).unwrap() - parent.residual).abs() <= 2.5);
        }
    }

    #[test]
    fn isotope_classes() {
        let s = spectrum(&[100.0, 101.0, 300.0]);
        assert_eq!(classify_peak(&s, 0, 1, 0.1), IsotopeClass::Primary);
        assert_eq!(classify_peak(&s, 1, 1, 0.1), IsotopeClass::Secondary);
        assert_eq!(classify_peak(&s, 2, 1, 0.1), IsotopeClass::Lone);
        let s = spectrum(&[100.0, 100.5]);
        assert_eq!(classify_peak(&s, 0, 2, 0.1), IsotopeClass::Primary);
        assert_eq!(classify_peak(&s, 0, 1, 0.1), IsotopeClass::Lone);
    }

    #[test]
    fn perfect_and_empty_spectra() {
        let params = PsmParams::default().with_types(&["b", "y"]);
        let opts = NoiseOpts { isotopes: true, ..Default::default() };
        let s = synth_spectrum("PEPTIDEK", &IonType::default_pair(), &opts, 3).unwrap();
        let score = psm_score("PEPTIDEK", &s, &params);
        assert!((score - 7.0 * (1.2 + 1.2)).abs() < 1e-6, "{score}");
        let empty = spectrum(&[]);
        assert!((psm_score("PEPTIDEK", &empty, &params) + 7.0 * (0.5 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn secondary_witness_at_half_tolerance() {
        let params = PsmParams::default().with_types(&["y"]);
        let parent = ParentMass::of_peptide("GA").unwrap();
        let y_mz = IonType::y().mz_from_prm(residue_mass('G').unwrap(), &parent);
        // the y peak sits 0.25 off, with a stronger isotope parent one Da below
        let peaks = vec![Peak::new(y_mz + 0.25, 10.0), Peak::new(y_mz + 0.25 - ISOTOPE_SPACING, 50.0)];
        let s = Spectrum::new("s", peaks, parent, 1);
        assert!((psm_score("GA", &s, &params) - 0.4).abs() < 1e-9);
    }

    #[test]
    fn a_peak_is_credited_once() {
        let params = PsmParams::default().with_types(&["b"]);
        let parent = ParentMass::of_peptide("GGG").unwrap();
        let b1 = IonType::b().mz_from_prm(residue_mass('G').unwrap(), &parent);
        let s = Spectrum::new("s", vec![Peak::new(b1, 10.0)], parent, 1);
        // site 1 found (+1), site 2 missing (-0.5)
        assert!((psm_score("GGG", &s, &params) - 0.5).abs() < 1e-9);
        let twice = PsmParams { witnesses: vec![(IonType::b(), 1.0), (IonType::b(), 1.0)], ..params };
        // the second copy of the type cannot reuse the peak
        assert!((psm_score("GGG", &s, &twice) - (1.0 - 0.5 - 0.5 - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn rerank_orders_and_dedups() {
        let out = rerank(vec![cand("AA", 1.0, 0.0)], 5);
        assert_eq!(out.len(), 1);
        let out = rerank(
            vec![cand("GG", 2.0, 1.0), cand("AA", 3.0, 0.0), cand("GG", 2.0, 5.0), cand("CC", 2.0, 1.0)],
            10,
        );
        let seqs: Vec<&str> = out.iter().map(|c| c.sequence.as_str()).collect();
        assert_eq!(seqs, vec!["AA", "GG", "CC"]);
        assert_eq!(out[1].path_score, 5.0);
        assert_eq!(rerank(out, 2).len(), 2);
    }
}
