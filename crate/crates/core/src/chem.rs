//! Residue and fragment-ion mass arithmetic.
//!
//! All masses are monoisotopic, in Dalton. A prefix residue mass (PRM) is the
//! summed residue mass of an N-terminal prefix; ion types map a fragment m/z
//! back to the PRM it implies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROTON: f64 = 1.00728;
pub const WATER: f64 = 18.0106;
pub const AMMONIA: f64 = 17.02655;
pub const CARBON_MONOXIDE: f64 = 27.99491;
/// Spacing between the monoisotopic peak and its first isotope.
pub const ISOTOPE_SPACING: f64 = 1.00335;

/// Standard residues with their monoisotopic masses.
pub const RESIDUES: [(char, f64); 20] = [
    ('G', 57.02146),
    ('A', 71.03711),
    ('S', 87.03203),
    ('P', 97.05276),
    ('V', 99.06841),
    ('T', 101.04768),
    ('C', 103.00919),
    ('L', 113.08406),
    ('I', 113.08406),
    ('N', 114.04293),
    ('D', 115.02694),
    ('Q', 128.05858),
    ('K', 128.09496),
    ('E', 129.04259),
    ('M', 131.04049),
    ('H', 137.05891),
    ('F', 147.06841),
    ('R', 156.10111),
    ('Y', 163.06333),
    ('W', 186.07931),
];

/// Residues with pairwise distinct masses. `I` is dropped in favour of `L`,
/// so graph edges and expansions never produce a Leu/Ile duplicate.
pub fn distinct_residues() -> impl Iterator<Item = (char, f64)> {
    RESIDUES.iter().copied().filter(|&(c, _)| c != 'I')
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residue {
    pub symbol: char,
    pub mono_mass: f64,
}

impl Residue {
    pub fn from_symbol(symbol: char) -> Result<Self> {
        Ok(Residue { symbol, mono_mass: residue_mass(symbol)? })
    }
}

pub fn residue_mass(symbol: char) -> Result<f64> {
    RESIDUES
        .iter()
        .find(|&&(c, _)| c == symbol)
        .map(|&(_, m)| m)
        .ok_or(Error::UnknownResidue(symbol))
}

pub fn peptide_residual_mass(sequence: &str) -> Result<f64> {
    sequence.chars().map(residue_mass).sum()
}

/// Prefix residue masses of every cleavage site, i.e. `len - 1` values
/// excluding 0 and the full residual mass.
pub fn prefix_masses(sequence: &str) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(sequence.len().saturating_sub(1));
    let chars: Vec<char> = sequence.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        acc += residue_mass(c)?;
        if i + 1 < chars.len() {
            out.push(acc);
        }
    }
    Ok(out)
}

/// Residues that cannot be told apart by mass at the resolution used for
/// evaluation map to the same class.
pub fn mass_class(symbol: char) -> char {
    match symbol {
        'I' => 'L',
        'Q' => 'K',
        c => c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terminus {
    N,
    C,
}

/// A fragment ion type. `delta` is the offset of a singly charged fragment
/// from its prefix (N) or suffix (C) residue mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonType {
    pub name: String,
    pub terminus: Terminus,
    pub delta: f64,
    pub charge: u32,
}

impl IonType {
    pub fn new(name: impl Into<String>, terminus: Terminus, delta: f64, charge: u32) -> Self {
        IonType { name: name.into(), terminus, delta, charge }
    }

    pub fn b() -> Self {
        Self::new("b", Terminus::N, PROTON, 1)
    }

    pub fn y() -> Self {
        Self::new("y", Terminus::C, WATER + PROTON, 1)
    }

    pub fn a() -> Self {
        Self::new("a", Terminus::N, PROTON - CARBON_MONOXIDE, 1)
    }

    /// Singly charged b and y: the default set used for graph construction.
    pub fn default_pair() -> Vec<IonType> {
        vec![Self::b(), Self::y()]
    }

    /// Broader witness set: b/y, their doubly charged forms, a-ions and
    /// water/ammonia losses.
    pub fn witness_set() -> Vec<IonType> {
        vec![
            Self::b(),
            Self::y(),
            Self::new("b2", Terminus::N, PROTON, 2),
            Self::new("y2", Terminus::C, WATER + PROTON, 2),
            Self::a(),
            Self::new("b-H2O", Terminus::N, PROTON - WATER, 1),
            Self::new("b-NH3", Terminus::N, PROTON - AMMONIA, 1),
            Self::new("y-H2O", Terminus::C, PROTON, 1),
            Self::new("y-NH3", Terminus::C, WATER + PROTON - AMMONIA, 1),
        ]
    }

    /// Singly charged equivalent of an observed m/z.
    fn singly_charged(&self, mz: f64) -> f64 {
        let z = self.charge as f64;
        z * (mz - PROTON) + PROTON
    }

    /// PRM implied by interpreting a peak at `mz` as this ion type.
    pub fn prm_from_mz(&self, mz: f64, parent: &ParentMass) -> f64 {
        let fragment = self.singly_charged(mz) - self.delta;
        match self.terminus {
            Terminus::N => fragment,
            Terminus::C => parent.residual - fragment,
        }
    }

    /// Expected m/z of this ion type for the cleavage at `prm`.
    pub fn mz_from_prm(&self, prm: f64, parent: &ParentMass) -> f64 {
        let fragment = match self.terminus {
            Terminus::N => prm,
            Terminus::C => parent.residual - prm,
        };
        let z = self.charge as f64;
        (fragment + self.delta - PROTON) / z + PROTON
    }
}

impl fmt::Display for IonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.terminus {
            Terminus::N => "N",
            Terminus::C => "C",
        };
        write!(f, "{} {} {} {}", self.name, t, self.delta, self.charge)
    }
}

impl FromStr for IonType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(format!("expected 'name terminus delta charge', got {} fields", fields.len()));
        }
        let terminus = match fields[1] {
            "N" | "n" => Terminus::N,
            "C" | "c" => Terminus::C,
            other => return Err(format!("terminus must be N or C, got '{other}'")),
        };
        let delta: f64 = fields[2].parse().map_err(|_| format!("bad delta '{}'", fields[2]))?;
        if !delta.is_finite() {
            return Err("delta must be finite".into());
        }
        let charge: u32 = fields[3].parse().map_err(|_| format!("bad charge '{}'", fields[3]))?;
        if charge == 0 {
            return Err("charge must be >= 1".into());
        }
        Ok(IonType::new(fields[0], terminus, delta, charge))
    }
}

/// Parse an ion-type file: one `name terminus delta charge` per line,
/// blank lines and `#` comments ignored.
pub fn parse_ion_types(text: &str) -> Result<Vec<IonType>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ion = line.parse().map_err(|msg| Error::Parse { line: i + 1, msg })?;
        out.push(ion);
    }
    Ok(out)
}

pub fn write_ion_types(ions: &[IonType]) -> String {
    ions.iter().map(|ion| format!("{ion}\n")).collect()
}

/// Neutral peptide mass and the residual mass it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParentMass {
    pub total: f64,
    pub residual: f64,
}

impl ParentMass {
    pub fn from_total(total: f64) -> Self {
        Self::with_water(total, WATER)
    }

    pub fn with_water(total: f64, water: f64) -> Self {
        ParentMass { total, residual: total - water }
    }

    pub fn from_residual(residual: f64) -> Self {
        ParentMass { total: residual + WATER, residual }
    }

    pub fn of_peptide(sequence: &str) -> Result<Self> {
        Ok(Self::from_residual(peptide_residual_mass(sequence)?))
    }
}

/// All in-range PRM interpretations of a peak, paired with the index of the
/// ion type that produced them. Interpretations outside `(0, residual)` are
/// dropped.
pub fn node_masses_for_peak(peak_mz: f64, parent: &ParentMass, ion_types: &[IonType]) -> Vec<(f64, usize)> {
    ion_types
        .iter()
        .enumerate()
        .map(|(i, ion)| (ion.prm_from_mz(peak_mz, parent), i))
        .filter(|&(prm, _)| prm > 0.0 && prm < parent.residual)
        .collect()
}

/// A multiset of residues and its summed mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Combo {
    pub residues: String,
    pub mass: f64,
}

/// Precomputed residue multisets of length 1 to 3, sorted by mass per length.
#[derive(Debug, Clone)]
pub struct ComboTable {
    by_len: [Vec<Combo>; 3],
}

impl ComboTable {
    pub fn new() -> Self {
        let alphabet: Vec<(char, f64)> = distinct_residues().collect();
        let mut by_len: [Vec<Combo>; 3] = Default::default();
        let n = alphabet.len();
        for i in 0..n {
            by_len[0].push(Combo { residues: alphabet[i].0.to_string(), mass: alphabet[i].1 });
            for j in i..n {
                let m2 = alphabet[i].1 + alphabet[j].1;
                by_len[1].push(Combo { residues: sorted_str(&[alphabet[i].0, alphabet[j].0]), mass: m2 });
                for k in j..n {
                    by_len[2].push(Combo {
                        residues: sorted_str(&[alphabet[i].0, alphabet[j].0, alphabet[k].0]),
                        mass: m2 + alphabet[k].1,
                    });
                }
            }
        }
        for list in by_len.iter_mut() {
            list.sort_by(|a, b| a.mass.total_cmp(&b.mass).then_with(|| a.residues.cmp(&b.residues)));
        }
        ComboTable { by_len }
    }

    /// Combos of exactly `len` residues (1..=3).
    pub fn of_len(&self, len: usize) -> &[Combo] {
        &self.by_len[len - 1]
    }

    /// Closest combo of length `len` whose mass is within `tol` of `mass`.
    pub fn closest(&self, len: usize, mass: f64, tol: f64) -> Option<&Combo> {
        let list = self.of_len(len);
        let lo = list.partition_point(|c| c.mass < mass - tol);
        list[lo..]
            .iter()
            .take_while(|c| c.mass <= mass + tol)
            .min_by(|a, b| (a.mass - mass).abs().total_cmp(&(b.mass - mass).abs()))
    }
}

impl Default for ComboTable {
    fn default() -> Self {
        Self::new()
    }
}

fn sorted_str(chars: &[char]) -> String {
    let mut v = chars.to_vec();
    v.sort_unstable();
    v.into_iter().collect()
}
