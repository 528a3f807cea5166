//! Peak lists, MGF input/output and rank-based intensity normalization.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::chem::{ParentMass, PROTON};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_RANK: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub mz: f64,
    pub intensity: f64,
    /// Discrete intensity rank, 1 = most intense. 0 until normalized.
    pub rank: u32,
}

impl Peak {
    pub fn new(mz: f64, intensity: f64) -> Self {
        Peak { mz, intensity, rank: 0 }
    }

    /// Ordering by evidence strength: `Greater` means `self` is more intense.
    fn intensity_cmp(&self, other: &Peak) -> Ordering {
        match (self.rank, other.rank) {
            (a, b) if a > 0 && b > 0 && a != b => b.cmp(&a),
            _ => self.intensity.total_cmp(&other.intensity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub id: String,
    /// Sorted ascending by m/z.
    pub peaks: Vec<Peak>,
    pub parent: ParentMass,
    pub precursor_charge: u32,
}

impl Spectrum {
    pub fn new(id: impl Into<String>, mut peaks: Vec<Peak>, parent: ParentMass, precursor_charge: u32) -> Self {
        peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
        Spectrum { id: id.into(), peaks, parent, precursor_charge }
    }

    /// Precursor m/z under the neutral-mass convention used by [`parse_mgf`].
    pub fn precursor_mz(&self) -> f64 {
        self.parent.total / self.precursor_charge.max(1) as f64 + PROTON
    }

    /// Index of the most intense peak within `±tol` of `mz`.
    pub fn find_peak_index(&self, mz: f64, tol: f64) -> Option<usize> {
        let lo = self.peaks.partition_point(|p| p.mz < mz - tol);
        let mut best: Option<usize> = None;
        for (i, p) in self.peaks.iter().enumerate().skip(lo) {
            if p.mz > mz + tol {
                break;
            }
            best = match best {
                None => Some(i),
                Some(j) => match p.intensity_cmp(&self.peaks[j]) {
                    Ordering::Greater => Some(i),
                    Ordering::Equal if (p.mz - mz).abs() < (self.peaks[j].mz - mz).abs() => Some(i),
                    _ => Some(j),
                },
            };
        }
        best
    }

    pub fn find_peak(&self, mz: f64, tol: f64) -> Option<&Peak> {
        self.find_peak_index(mz, tol).map(|i| &self.peaks[i])
    }

    /// Any peak at all within `±tol` of `mz`.
    pub fn has_peak_near(&self, mz: f64, tol: f64) -> bool {
        let lo = self.peaks.partition_point(|p| p.mz < mz - tol);
        self.peaks.get(lo).is_some_and(|p| p.mz <= mz + tol)
    }
}

/// Assign ranks by descending raw intensity, ties broken by ascending m/z.
/// Peaks past `max_rank` all share rank `max_rank + 1`.
pub fn rank_normalize(spectrum: &Spectrum, max_rank: u32) -> Spectrum {
    assert!(max_rank >= 1, "max_rank must be >= 1");
    let mut out = spectrum.clone();
    let mut order: Vec<usize> = (0..out.peaks.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&out.peaks[a], &out.peaks[b]);
        pb.intensity.total_cmp(&pa.intensity).then(pa.mz.total_cmp(&pb.mz))
    });
    for (pos, idx) in order.into_iter().enumerate() {
        out.peaks[idx].rank = (pos as u32 + 1).min(max_rank + 1);
    }
    out
}

fn parse_charge(value: &str) -> Option<u32> {
    let digits: String = value.split(',').next()?.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.parse().ok().filter(|&z| z > 0)
}

/// Parse MGF text into spectra.
///
/// The parent mass is taken as the neutral peptide mass
/// `charge * (PEPMASS - proton)`; a missing `CHARGE` defaults to 1.
pub fn parse_mgf(text: &str) -> Result<Vec<Spectrum>> {
    struct Block {
        start: usize,
        title: Option<String>,
        pepmass: Option<f64>,
        charge: Option<u32>,
        peaks: Vec<Peak>,
    }

    let mut spectra = Vec::new();
    let mut block: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        if line == "BEGIN IONS" {
            if block.is_some() {
                return Err(err("nested BEGIN IONS".into()));
            }
            block = Some(Block { start: line_no, title: None, pepmass: None, charge: None, peaks: Vec::new() });
            continue;
        }
        let Some(b) = block.as_mut() else {
            // global parameters outside blocks are ignored
            continue;
        };
        if line == "END IONS" {
            let b = block.take().unwrap();
            let pepmass = b.pepmass.ok_or_else(|| Error::Parse {
                line: b.start,
                msg: "block is missing PEPMASS".into(),
            })?;
            let charge = b.charge.unwrap_or(1);
            let total = charge as f64 * (pepmass - PROTON);
            let id = b.title.unwrap_or_else(|| format!("spectrum_{}", spectra.len()));
            spectra.push(Spectrum::new(id, b.peaks, ParentMass::from_total(total), charge));
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let value = value.trim();
            match key.trim().to_ascii_uppercase().as_str() {
                "TITLE" => b.title = Some(value.to_string()),
                "PEPMASS" => {
                    let first = value.split_whitespace().next().unwrap_or("");
                    let m: f64 = first.parse().map_err(|_| err(format!("bad PEPMASS '{value}'")))?;
                    b.pepmass = Some(m);
                }
                "CHARGE" => {
                    b.charge = Some(parse_charge(value).ok_or_else(|| err(format!("bad CHARGE '{value}'")))?);
                }
                _ => {}
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let mz = fields.next().and_then(|f| f.parse::<f64>().ok());
        let intensity = fields.next().and_then(|f| f.parse::<f64>().ok());
        match (mz, intensity) {
            (Some(mz), Some(intensity)) if mz > 0.0 => b.peaks.push(Peak::new(mz, intensity)),
            _ => return Err(err(format!("malformed peak line '{line}'"))),
        }
    }
    if let Some(b) = block {
        return Err(Error::Parse { line: b.start, msg: "unterminated BEGIN IONS block".into() });
    }
    Ok(spectra)
}

/// Serialize spectra as MGF. Peak lines are written as `%.4f %.4f`.
pub fn write_mgf(spectra: &[Spectrum]) -> String {
    let mut out = String::new();
    for s in spectra {
        let _ = writeln!(out, "BEGIN IONS");
        let _ = writeln!(out, "TITLE={}", s.id);
        let _ = writeln!(out, "PEPMASS={:.6}", s.precursor_mz());
        let _ = writeln!(out, "CHARGE={}+", s.precursor_charge.max(1));
        for p in &s.peaks {
            let _ = writeln!(out, "{:.4} {:.4}", p.mz, p.intensity);
        }
        let _ = writeln!(out, "END IONS");
    }
    out
}
