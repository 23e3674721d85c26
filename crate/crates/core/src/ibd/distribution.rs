use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;

use super::pattern::IbdPattern;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternEntry {
    pub pattern: IbdPattern,
    pub prob: f64,
    /// Exact probability, when computed by exact enumeration.
    #[serde(skip)]
    pub exact: Option<Dyadic>,
}

/// Sparse distribution over canonical IBD patterns for an ordered list of
/// individuals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IbdPatternDistribution {
    ids: Vec<String>,
    entries: Vec<PatternEntry>,
}

impl IbdPatternDistribution {
    /// Build from (pattern, probability) pairs. Patterns are canonicalized,
    /// duplicates merged, zero entries dropped, and the result sorted by
    /// pattern.
    pub fn from_entries(ids: Vec<String>, entries: Vec<PatternEntry>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyTargets);
        }
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(Error::DuplicateTarget(id.clone()));
            }
        }
        let mut merged: BTreeMap<IbdPattern, (f64, Option<Dyadic>)> = BTreeMap::new();
        let all_exact = entries.iter().all(|e| e.exact.is_some());
        for e in entries {
            if e.pattern.individuals() != ids.len() {
                return Err(Error::InvalidPattern(format!(
                    "pattern {} does not cover {} individuals",
                    e.pattern,
                    ids.len()
                )));
            }
            if e.prob.is_nan() || e.prob < 0.0 {
                return Err(Error::InvalidPattern(format!("negative probability {}", e.prob)));
            }
            let slot = merged.entry(e.pattern).or_insert((0.0, all_exact.then(Dyadic::zero)));
            slot.0 += e.prob;
            if let (Some(acc), Some(x)) = (slot.1.as_mut(), e.exact.as_ref()) {
                *acc += x;
            }
        }
        let entries = merged
            .into_iter()
            .filter(|(_, (p, ex))| match ex {
                Some(d) => !d.is_zero(),
                None => *p > 0.0,
            })
            .map(|(pattern, (prob, exact))| {
                let prob = exact.as_ref().map_or(prob, Dyadic::to_f64);
                PatternEntry { pattern, prob, exact }
            })
            .collect();
        Ok(IbdPatternDistribution { ids, entries })
    }

    /// Float-only constructor from raw label vectors.
    pub fn from_raw(ids: Vec<String>, rows: &[(f64, Vec<u32>)]) -> Result<Self> {
        let entries = rows
            .iter()
            .map(|(p, labels)| {
                Ok(PatternEntry { pattern: IbdPattern::canonicalize(labels)?, prob: *p, exact: None })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(ids, entries)
    }

    /// Exact constructor from raw label vectors with dyadic probabilities.
    pub fn from_exact(ids: Vec<String>, rows: Vec<(Dyadic, Vec<u32>)>) -> Result<Self> {
        let entries = rows
            .into_iter()
            .map(|(p, labels)| {
                Ok(PatternEntry { pattern: IbdPattern::canonicalize(&labels)?, prob: p.to_f64(), exact: Some(p) })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(ids, entries)
    }

    /// All individuals unrelated: a single pattern with distinct labels.
    pub fn unrelated(ids: Vec<String>) -> Result<Self> {
        let n = ids.len();
        Self::from_exact(ids, vec![(Dyadic::one(), IbdPattern::unrelated(n).labels().to_vec())])
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn entries(&self) -> &[PatternEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| e.exact.is_some())
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.prob).sum()
    }

    pub fn exact_total(&self) -> Option<Dyadic> {
        self.entries.iter().try_fold(Dyadic::zero(), |acc, e| e.exact.as_ref().map(|x| &acc + x))
    }

    /// True when the only pattern has all genes distinct.
    pub fn is_unrelated(&self) -> bool {
        self.entries.len() == 1 && self.entries[0].pattern == IbdPattern::unrelated(self.ids.len())
    }

    /// Probability of a pattern given by raw labels (canonicalized first).
    pub fn probability_of(&self, raw: &[u32]) -> Result<f64> {
        let p = IbdPattern::canonicalize(raw)?;
        Ok(self.entries.iter().find(|e| e.pattern == p).map_or(0.0, |e| e.prob))
    }

    /// Restrict to `subset` (in the given order) and aggregate.
    pub fn marginalize(&self, subset: &[String]) -> Result<Self> {
        let missing: Vec<String> = subset.iter().filter(|s| self.position(s).is_none()).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::NotInDistribution(missing));
        }
        if subset.is_empty() {
            return Err(Error::EmptyTargets);
        }
        let cols: Vec<usize> = subset.iter().map(|s| self.position(s).unwrap()).collect();
        let entries = self
            .entries
            .iter()
            .map(|e| PatternEntry { pattern: e.pattern.restrict(&cols), prob: e.prob, exact: e.exact.clone() })
            .collect();
        Self::from_entries(subset.to_vec(), entries)
    }

    /// Append individuals unrelated to everyone already present.
    pub fn with_unrelated(&self, extra: &[String]) -> Result<Self> {
        let mut ids = self.ids.clone();
        ids.extend(extra.iter().cloned());
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut labels = e.pattern.labels().to_vec();
                let base = e.pattern.distinct_labels() as u32;
                labels.extend(base + 1..=base + 2 * extra.len() as u32);
                Ok(PatternEntry {
                    pattern: IbdPattern::canonicalize(&labels)?,
                    prob: e.prob,
                    exact: e.exact.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(ids, entries)
    }

    /// Rename individuals, keeping their order.
    pub fn renamed(&self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.ids.len() {
            return Err(Error::InvalidPattern("rename must keep the number of individuals".into()));
        }
        Self::from_entries(ids, self.entries.clone())
    }

    /// Total variation distance to another distribution over the same ids.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut m: BTreeMap<&IbdPattern, f64> = BTreeMap::new();
        for e in &self.entries {
            *m.entry(&e.pattern).or_default() += e.prob;
        }
        for e in &other.entries {
            *m.entry(&e.pattern).or_default() -= e.prob;
        }
        0.5 * m.values().map(|v| v.abs()).sum::<f64>()
    }

    /// CSV with header `pr,<id>,<id>,...` (each id twice) and one row per
    /// pattern.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["pr".to_string()];
        for id in &self.ids {
            header.push(id.clone());
            header.push(id.clone());
        }
        wtr.write_record(&header)?;
        for e in &self.entries {
            let mut rec = vec![format!("{}", e.prob)];
            rec.extend(e.pattern.labels().iter().map(|l| l.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("utf8")
    }

    /// Inverse of [`write_csv`](Self::write_csv). A header of generic
    /// `label_k` columns yields ids `I1..In`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers()?.clone();
        let cols: Vec<&str> = header.iter().skip(1).collect();
        if header.get(0) != Some("pr") || cols.is_empty() || !cols.len().is_multiple_of(2) {
            return Err(Error::Config("IBD CSV needs header `pr` followed by two columns per individual".into()));
        }
        let ids: Vec<String> = if cols.iter().all(|c| c.starts_with("label_")) {
            (1..=cols.len() / 2).map(|i| format!("I{i}")).collect()
        } else {
            cols.chunks(2).map(|c| c[0].to_string()).collect()
        };
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let p: f64 = rec[0].parse().map_err(|_| Error::Config(format!("bad probability `{}`", &rec[0])))?;
            let labels = rec
                .iter()
                .skip(1)
                .map(|s| s.parse::<u32>().map_err(|_| Error::Config(format!("bad label `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push((p, labels));
        }
        Self::from_raw(ids, &rows)
    }
}

/// Index (0-based, so Δ1 is 0) of the Jacquard class of a two-person
/// canonical pattern.
pub fn jacquard_class(p: &IbdPattern) -> Option<usize> {
    const CLASSES: [[u32; 4]; 9] = [
        [1, 1, 1, 1],
        [1, 1, 2, 2],
        [1, 1, 1, 2],
        [1, 1, 2, 3],
        [1, 2, 1, 1],
        [1, 2, 3, 3],
        [1, 2, 1, 2],
        [1, 2, 1, 3],
        [1, 2, 3, 4],
    ];
    if p.individuals() != 2 {
        return None;
    }
    CLASSES.iter().position(|c| IbdPattern::canonicalize(c).ok().as_ref() == Some(p))
}

/// Exact Δ1..Δ9 of a two-person distribution.
pub fn condensed_coefficients(dist: &IbdPatternDistribution) -> Result<Vec<Dyadic>> {
    if dist.ids().len() != 2 {
        return Err(Error::InvalidPattern("condensed coefficients need exactly two individuals".into()));
    }
    let mut delta = vec![Dyadic::zero(); 9];
    for e in dist.entries() {
        let ex = e
            .exact
            .as_ref()
            .ok_or_else(|| Error::InvalidPattern("exact probabilities required".into()))?;
        let c = jacquard_class(&e.pattern).expect("two-person pattern");
        delta[c] += ex;
    }
    Ok(delta)
}

/// Δ1..Δ9 in floating point; works for Monte-Carlo estimates too.
pub fn condensed_coefficients_f64(dist: &IbdPatternDistribution) -> Result<[f64; 9]> {
    if dist.ids().len() != 2 {
        return Err(Error::InvalidPattern("condensed coefficients need exactly two individuals".into()));
    }
    let mut delta = [0.0; 9];
    for e in dist.entries() {
        delta[jacquard_class(&e.pattern).expect("two-person pattern")] += e.prob;
    }
    Ok(delta)
}
