//! Prediction metrics and a synthetic spectrum generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chem::{mass_class, prefix_masses, IonType, ParentMass, ISOTOPE_SPACING};
use crate::error::Result;
use crate::spectrum::{Peak, Spectrum};

/// A predicted residue may start this far from the true one and still count.
pub const START_MASS_TOL: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueMatch {
    pub correct: usize,
    pub predicted: usize,
    pub truth: usize,
}

/// Mass preceding each residue.
fn start_masses(sequence: &str) -> Result<Vec<f64>> {
    let mut starts = vec![0.0];
    starts.extend(prefix_masses(sequence)?);
    Ok(starts)
}

/// Count predicted residues that match a true residue of the same mass class
/// starting within [`START_MASS_TOL`]; greedy left to right, each true
/// residue used once.
pub fn residue_match(pred: &str, truth: &str) -> Result<ResidueMatch> {
    let pred_starts = start_masses(pred)?;
    let true_starts = start_masses(truth)?;
    let true_chars: Vec<char> = truth.chars().collect();
    let mut used = vec![false; true_chars.len()];
    let mut correct = 0;
    for (i, c) in pred.chars().enumerate() {
        let class = mass_class(c);
        let hit = (0..true_chars.len()).find(|&j| {
            !used[j] && mass_class(true_chars[j]) == class && (pred_starts[i] - true_starts[j]).abs() <= START_MASS_TOL
        });
        if let Some(j) = hit {
            used[j] = true;
            correct += 1;
        }
    }
    Ok(ResidueMatch { correct, predicted: pred.chars().count(), truth: true_chars.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PredictionMetrics {
    pub accuracy: f64,
    pub recall: f64,
}

impl From<ResidueMatch> for PredictionMetrics {
    fn from(m: ResidueMatch) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        PredictionMetrics { accuracy: ratio(m.correct, m.predicted), recall: ratio(m.correct, m.truth) }
    }
}

/// Metrics of the highest-recall prediction among the first `k`, ties going
/// to higher accuracy. No predictions gives zeros.
pub fn best_in_top_k(predictions: &[String], truth: &str, k: usize) -> Result<PredictionMetrics> {
    let mut best = PredictionMetrics::default();
    for p in predictions.iter().take(k) {
        let m = PredictionMetrics::from(residue_match(p, truth)?);
        if (m.recall, m.accuracy) > (best.recall, best.accuracy) {
            best = m;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct NoiseOpts {
    /// Noise peaks added, as a fraction of the signal peak count.
    pub noise_fraction: f64,
    /// Add an isotope child (+1/charge) to every signal peak.
    pub isotopes: bool,
    pub signal_intensity: (f64, f64),
    pub noise_intensity: (f64, f64),
    pub precursor_charge: u32,
}

impl Default for NoiseOpts {
    fn default() -> Self {
        NoiseOpts {
            noise_fraction: 0.0,
            isotopes: false,
            signal_intensity: (50.0, 100.0),
            noise_intensity: (1.0, 50.0),
            precursor_charge: 2,
        }
    }
}

/// Spectrum of `peptide` with a peak for every ion type at every cleavage
/// site, plus optional isotope children and uniform noise.
pub fn synth_spectrum(peptide: &str, ions: &[IonType], noise: &NoiseOpts, seed: u64) -> Result<Spectrum> {
    let parent = ParentMass::of_peptide(peptide)?;
    let prefixes = prefix_masses(peptide)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (slo, shi) = noise.signal_intensity;
    let mut peaks = Vec::new();
    for &prm in &prefixes {
        for ion in ions {
            let mz = ion.mz_from_prm(prm, &parent);
            let intensity = rng.gen_range(slo..=shi);
            peaks.push(Peak::new(mz, intensity));
            if noise.isotopes {
                peaks.push(Peak::new(mz + ISOTOPE_SPACING / ion.charge as f64, intensity * 0.5));
            }
        }
    }
    let signal = peaks.len();
    let count = (noise.noise_fraction * signal as f64).round() as usize;
    let (nlo, nhi) = noise.noise_intensity;
    for _ in 0..count {
        let mz = rng.gen_range(50.0..parent.total);
        peaks.push(Peak::new(mz, rng.gen_range(nlo..=nhi)));
    }
    Ok(Spectrum::new(peptide, peaks, parent, noise.precursor_charge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::spectrum::write_mgf;

    #[test]
    fn identical_sequences_all_correct() {
        let m = residue_match("PEPTIDE", "PEPTIDE").unwrap();
        assert_eq!(m, ResidueMatch { correct: 7, predicted: 7, truth: 7 });
    }

    #[test]
    fn merged_mass_classes() {
        assert_eq!(residue_match("VEALR", "VEAIR").unwrap().correct, 5);
        assert_eq!(residue_match("AQ", "AK").unwrap().correct, 2);
    }

    #[test]
    fn shifted_residue_is_wrong() {
        // W inserted up front shifts every later start by 186 Da
        let m = residue_match("WVEALR", "VEALR").unwrap();
        assert_eq!(m.correct, 0);
        // swapped pair: the A starts 57 vs 71 Da, only R lines up
        let m = residue_match("GAR", "AGR").unwrap();
        assert_eq!(m.correct, 1);
        assert!(matches!(residue_match("AB", "AG"), Err(Error::UnknownResidue('B'))));
    }

    #[test]
    fn metrics_and_equal_lengths() {
        let p = PredictionMetrics::from(residue_match("VEALK", "VEALR").unwrap());
        assert_eq!(p.accuracy, p.recall);
        assert!((p.recall - 0.8).abs() < 1e-12);
        let p = PredictionMetrics::from(residue_match("VE", "VEALR").unwrap());
        assert_eq!(p.accuracy, 1.0);
        assert!((p.recall - 0.4).abs() < 1e-12);
    }

    #[test]
    fn best_of_top_k() {
        let preds: Vec<String> = ["GGGG", "VEAKR", "VEALR"].iter().map(|s| s.to_string()).collect();
        assert_eq!(best_in_top_k(&preds, "VEALR", 1).unwrap().recall, 0.0);
        // K outweighs L by 15 Da, so the R after it starts too late as well
        assert!((best_in_top_k(&preds, "VEALR", 2).unwrap().recall - 0.6).abs() < 1e-12);
        assert_eq!(best_in_top_k(&preds, "VEALR", 3).unwrap().recall, 1.0);
        assert_eq!(best_in_top_k(&[], "VEALR", 5).unwrap(), PredictionMetrics::default());
        // equal recall, higher accuracy wins
        let preds: Vec<String> = ["VEALRG", "VEALR"].iter().map(|s| s.to_string()).collect();
        assert_eq!(best_in_top_k(&preds, "VEALR", 2).unwrap().accuracy, 1.0);
    }

    #[test]
    fn clean_ladder_masses() {
        let s = synth_spectrum("VEALR", &IonType::default_pair(), &NoiseOpts::default(), 1).unwrap();
        assert_eq!(s.peaks.len(), 8);
        let expected = [100.076, 175.119, 229.118, 288.203, 300.155, 359.240, 413.239, 488.283];
        for (p, e) in s.peaks.iter().zip(expected) {
            assert!((p.mz - e).abs() < 0.01, "{} vs {e}", p.mz);
        }
        assert!(synth_spectrum("VEALR", &[], &NoiseOpts::default(), 1).unwrap().peaks.is_empty());
        assert!(matches!(synth_spectrum("VEBLR", &[], &NoiseOpts::default(), 1), Err(Error::UnknownResidue('B'))));
    }

    #[test]
    fn noise_isotopes_and_seed() {
        let opts = NoiseOpts { noise_fraction: 0.25, isotopes: true, ..Default::default() };
        let a = synth_spectrum("PEPTIDEK", &IonType::default_pair(), &opts, 9).unwrap();
        assert_eq!(a.peaks.len(), 28 + 7);
        let b = synth_spectrum("PEPTIDEK", &IonType::default_pair(), &opts, 9).unwrap();
        assert_eq!(write_mgf(std::slice::from_ref(&a)), write_mgf(&[b]));
        let c = synth_spectrum("PEPTIDEK", &IonType::default_pair(), &opts, 10).unwrap();
        assert_ne!(write_mgf(&[a]), write_mgf(&[c]));
    }
}
