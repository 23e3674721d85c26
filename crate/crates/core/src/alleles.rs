//! STR allele designations, population frequencies and genotype profiles.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An STR allele such as `15` or `15.3`: a whole repeat count and a
/// micro-variant fraction (0-9 bases).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allele {
    pub repeat: i32,
    pub micro: u8,
}

impl Allele {
    pub fn new(repeat: i32, micro: u8) -> Self {
        Allele { repeat, micro }
    }

    /// The allele one repeat unit shorter, which receives back-stutter from
    /// this one.
    pub fn below(self) -> Allele {
        Allele { repeat: self.repeat - 1, micro: self.micro }
    }

    pub fn above(self) -> Allele {
        Allele { repeat: self.repeat + 1, micro: self.micro }
    }
}

impl FromStr for Allele {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::BadAllele(s.to_string());
        let (r, m) = match s.split_once('.') {
            Some((r, m)) => (r, m),
            None => (s, "0"),
        };
        let repeat: i32 = r.parse().map_err(|_| bad())?;
        let micro: u8 = m.parse().map_err(|_| bad())?;
        if micro > 9 || m.len() != 1 {
            return Err(bad());
        }
        Ok(Allele { repeat, micro })
    }
}

impl fmt::Display for Allele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.micro == 0 {
            write!(f, "{}", self.repeat)
        } else {
            write!(f, "{}.{}", self.repeat, self.micro)
        }
    }
}

/// An unordered pair of alleles, stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Genotype(pub Allele, pub Allele);

impl Genotype {
    pub fn new(a: Allele, b: Allele) -> Self {
        if a <= b {
            Genotype(a, b)
        } else {
            Genotype(b, a)
        }
    }

    pub fn is_homozygous(&self) -> bool {
        self.0 == self.1
    }

    pub fn alleles(&self) -> [Allele; 2] {
        [self.0, self.1]
    }

    /// Number of copies of `a` (0, 1 or 2).
    pub fn count(&self, a: Allele) -> u8 {
        (self.0 == a) as u8 + (self.1 == a) as u8
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0, self.1)
    }
}

impl FromStr for Genotype {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(['/', ',']).ok_or_else(|| Error::BadAllele(s.to_string()))?;
        Ok(Genotype::new(a.parse()?, b.parse()?))
    }
}

/// Frequencies for one marker, alleles sorted ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerFrequencies {
    pub name: String,
    pub alleles: Vec<Allele>,
    pub freqs: Vec<f64>,
}

impl MarkerFrequencies {
    pub fn index_of(&self, a: Allele) -> Option<usize> {
        self.alleles.binary_search(&a).ok()
    }

    pub fn freq(&self, a: Allele) -> Result<f64> {
        self.index_of(a)
            .map(|i| self.freqs[i])
            .ok_or_else(|| Error::UnknownAllele { marker: self.name.clone(), allele: a.to_string() })
    }

    /// Frequency, or zero for alleles absent from the table.
    pub fn freq_or_zero(&self, a: Allele) -> f64 {
        self.index_of(a).map_or(0.0, |i| self.freqs[i])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlleleFrequencyTable {
    markers: Vec<MarkerFrequencies>,
}

const SUM_TOLERANCE: f64 = 1e-6;

impl AlleleFrequencyTable {
    /// Build from `(marker, allele, frequency)` rows. Markers keep the order
    /// of first appearance; per-marker sums off by more than 1e-6 are
    /// renormalized with a warning.
    pub fn from_rows(rows: impl IntoIterator<Item = (String, Allele, f64)>) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut by_marker: BTreeMap<String, BTreeMap<Allele, f64>> = BTreeMap::new();
        for (m, a, q) in rows {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::Config(format!("marker {m}: frequency of {a} must be positive, got {q}")));
            }
            let entry = by_marker.entry(m.clone()).or_insert_with(|| {
                order.push(m.clone());
                BTreeMap::new()
            });
            if entry.insert(a, q).is_some() {
                return Err(Error::Config(format!("marker {m}: allele {a} listed twice")));
            }
        }
        let mut markers = Vec::with_capacity(order.len());
        for name in order {
            let map = by_marker.remove(&name).unwrap();
            let (alleles, mut freqs): (Vec<Allele>, Vec<f64>) = map.into_iter().unzip();
            let total: f64 = freqs.iter().sum();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                log::warn!("marker {name}: frequencies sum to {total}; renormalizing");
                freqs.iter_mut().for_each(|q| *q /= total);
            }
            markers.push(MarkerFrequencies { name, alleles, freqs });
        }
        Ok(AlleleFrequencyTable { markers })
    }

    /// CSV with header `marker,allele,frequency`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 3 {
                return Err(Error::Config("frequency rows need marker,allele,frequency".into()));
            }
            let q: f64 = rec[2].parse().map_err(|_| Error::Config(format!("bad frequency `{}`", &rec[2])))?;
            rows.push((rec[0].to_string(), rec[1].parse()?, q));
        }
        Self::from_rows(rows)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["marker", "allele", "frequency"])?;
        for m in &self.markers {
            for (a, q) in m.alleles.iter().zip(&m.freqs) {
                wtr.write_record([m.name.clone(), a.to_string(), q.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn markers(&self) -> &[MarkerFrequencies] {
        &self.markers
    }

    pub fn marker_names(&self) -> Vec<&str> {
        self.markers.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn marker(&self, name: &str) -> Result<&MarkerFrequencies> {
        self.markers.iter().find(|m| m.name == name).ok_or_else(|| Error::UnknownMarker(name.to_string()))
    }

    /// Keep only the named markers, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Self> {
        Ok(AlleleFrequencyTable { markers: names.iter().map(|n| self.marker(n).cloned()).collect::<Result<_>>()? })
    }

    /// Check that every allele of the profiles is in the table.
    pub fn check_profiles<'a>(&self, profiles: impl IntoIterator<Item = &'a GenotypeProfile>) -> Result<()> {
        for p in profiles {
            for (m, g) in p.iter() {
                let mf = self.marker(m)?;
                for a in g.alleles() {
                    mf.freq(a)?;
                }
            }
        }
        Ok(())
    }

    /// Add alleles of the profiles missing from the table with frequency
    /// `eps`, then renormalize the affected markers.
    pub fn extend_with<'a>(&mut self, profiles: impl IntoIterator<Item = &'a GenotypeProfile>, eps: f64) -> Result<()> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("extension frequency must lie in (0,1), got {eps}")));
        }
        for p in profiles {
            for (m, g) in p.iter() {
                let idx = self
                    .markers
                    .iter()
                    .position(|x| x.name == *m)
                    .ok_or_else(|| Error::UnknownMarker(m.clone()))?;
                let mf = &mut self.markers[idx];
                let mut changed = false;
                for a in g.alleles() {
                    if let Err(pos) = mf.alleles.binary_search(&a) {
                        log::warn!("marker {m}: adding allele {a} with frequency {eps}");
                        mf.alleles.insert(pos, a);
                        mf.freqs.insert(pos, eps);
                        changed = true;
                    }
                }
                if changed {
                    let total: f64 = mf.freqs.iter().sum();
                    mf.freqs.iter_mut().for_each(|q| *q /= total);
                }
            }
        }
        Ok(())
    }
}

/// Genotypes of one person, by marker.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenotypeProfile {
    genotypes: BTreeMap<String, Genotype>,
}

impl GenotypeProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, marker: impl Into<String>, g: Genotype) {
        self.genotypes.insert(marker.into(), g);
    }

    pub fn get(&self, marker: &str) -> Option<Genotype> {
        self.genotypes.get(marker).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Genotype)> {
        self.genotypes.iter()
    }

    pub fn len(&self) -> usize {
        self.genotypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genotypes.is_empty()
    }

    /// CSV `marker,allele1,allele2`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut all = read_profiles_csv(r)?;
        match all.len() {
            0 => Ok(GenotypeProfile::new()),
            1 => Ok(all.pop_first().unwrap().1),
            _ => Err(Error::Config("file holds several profiles; use read_profiles_csv".into())),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["marker", "allele1", "allele2"])?;
        for (m, g) in &self.genotypes {
            wtr.write_record([m.clone(), g.0.to_string(), g.1.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Profiles from a CSV with columns `marker,allele1,allele2`, optionally
/// preceded by an `id` column for files holding several people. Without an
/// id column the single profile is keyed by the empty string.
pub fn read_profiles_csv<R: Read>(r: R) -> Result<BTreeMap<String, GenotypeProfile>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let with_id = rdr.headers()?.get(0) == Some("id");
    let mut out: BTreeMap<String, GenotypeProfile> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let off = with_id as usize;
        if rec.len() < 3 + off {
            return Err(Error::Config("genotype rows need marker,allele1,allele2".into()));
        }
        let id = if with_id { rec[0].to_string() } else { String::new() };
        let g = Genotype::new(rec[off + 1].parse()?, rec[off + 2].parse()?);
        out.entry(id).or_default().insert(rec[off].to_string(), g);
    }
    Ok(out)
}

pub fn write_profiles_csv<W: Write>(profiles: &BTreeMap<String, GenotypeProfile>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["id", "marker", "allele1", "allele2"])?;
    for (id, p) in profiles {
        for (m, g) in &p.genotypes {
            wtr.write_record([id.clone(), m.clone(), g.0.to_string(), g.1.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
