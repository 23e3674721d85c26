use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A labelling of the `2n` genes of `n` individuals, entries `(2i, 2i+1)`
/// holding the genes of individual `i`. Equal labels mean identity by
/// descent. Always stored in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IbdPattern(Vec<u32>);

impl IbdPattern {
    /// Canonical representative of the class of `raw` under within-pair
    /// swaps and one-to-one relabelling: the lexicographically smallest
    /// member, with labels numbered from 1.
    pub fn canonicalize(raw: &[u32]) -> Result<Self> {
        if !raw.len().is_multiple_of(2) {
            return Err(Error::InvalidPattern(format!("odd length {}", raw.len())));
        }
        if raw.contains(&0) {
            return Err(Error::InvalidPattern("labels must be positive".into()));
        }
        Ok(IbdPattern(canonical_labels(raw)))
    }

    /// The pattern in which all `2n` genes are distinct.
    pub fn unrelated(n: usize) -> Self {
        IbdPattern((1..=2 * n as u32).collect())
    }

    pub fn labels(&self) -> &[u32] {
        &self.0
    }

    pub fn individuals(&self) -> usize {
        self.0.len() / 2
    }

    pub fn pair(&self, i: usize) -> (u32, u32) {
        (self.0[2 * i], self.0[2 * i + 1])
    }

    pub fn distinct_labels(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    /// Does some individual carry two IBD genes?
    pub fn has_inbreeding(&self) -> bool {
        self.0.chunks(2).any(|p| p[0] == p[1])
    }

    /// Restrict to the given individuals (by position) and re-canonicalize.
    pub fn restrict(&self, columns: &[usize]) -> Self {
        let raw: Vec<u32> = columns.iter().flat_map(|&i| [self.0[2 * i], self.0[2 * i + 1]]).collect();
        IbdPattern(canonical_labels(&raw))
    }
}

impl fmt::Display for IbdPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn canonical_labels(raw: &[u32]) -> Vec<u32> {
    let pairs: Vec<(u32, u32)> = raw.chunks(2).map(|p| (p[0], p[1])).collect();
    canonical_pairs(&pairs, 1, |_| None)
        .into_iter()
        .flat_map(|(a, b)| [a, b])
        .collect()
}

/// Lexicographically minimal relabelling of a sequence of unordered pairs.
///
/// Tokens for which `premapped` returns a value keep it; all others get fresh
/// labels starting at `first`, which must exceed every premapped value. Each
/// output pair is sorted. Two fresh tokens first met together in one pair are
/// held as a tie and the lower label goes to whichever reappears first
/// without the other.
pub(crate) fn canonical_pairs(
    pairs: &[(u32, u32)],
    first: u32,
    premapped: impl Fn(u32) -> Option<u32>,
) -> Vec<(u32, u32)> {
    let mut map: HashMap<u32, u32> = HashMap::with_capacity(pairs.len() * 2);
    let mut tie: HashMap<u32, u32> = HashMap::new();
    let mut next = first;
    let lookup = |t: u32, map: &HashMap<u32, u32>| -> Option<u32> {
        map.get(&t).copied().or_else(|| premapped(t))
    };
    for &(x, y) in pairs {
        for (z, other) in [(x, y), (y, x)] {
            if let Some(&p) = tie.get(&z) {
                if p != other {
                    let (lz, lp) = (map[&z], map[&p]);
                    if lz > lp {
                        map.insert(z, lp);
                        map.insert(p, lz);
                    }
                    tie.remove(&z);
                    tie.remove(&p);
                }
            }
        }
        match (lookup(x, &map), lookup(y, &map)) {
            (Some(_), Some(_)) => {}
            (Some(_), None) => {
                map.insert(y, next);
                next += 1;
            }
            (None, Some(_)) => {
                map.insert(x, next);
                next += 1;
            }
            (None, None) if x == y => {
                map.insert(x, next);
                next += 1;
            }
            (None, None) => {
                map.insert(x, next);
                map.insert(y, next + 1);
                tie.insert(x, y);
                tie.insert(y, x);
                next += 2;
            }
        }
    }
    pairs
        .iter()
        .map(|&(x, y)| {
            let (a, b) = (lookup(x, &map).unwrap(), lookup(y, &map).unwrap());
            (a.min(b), a.max(b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canon(v: &[u32]) -> Vec<u32> {
        IbdPattern::canonicalize(v).unwrap().labels().to_vec()
    }

    /// Orbit minimum by trying every combination of within-pair swaps and
    /// relabelling by first appearance.
    fn brute_force_min(raw: &[u32]) -> Vec<u32> {
        let n = raw.len() / 2;
        let mut best: Option<Vec<u32>> = None;
        for mask in 0..(1u32 << n) {
            let mut v = raw.to_vec();
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    v.swap(2 * i, 2 * i + 1);
                }
            }
            let mut map = HashMap::new();
            let mut next = 1;
            let relabelled: Vec<u32> = v
                .iter()
                .map(|l| {
                    *map.entry(*l).or_insert_with(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect();
            // within the orbit every pair may also be listed sorted; the
            // minimum over swaps of the first-appearance relabelling is
            // always pair-sorted, so compare as-is
            if best.as_ref().is_none_or(|b| relabelled < *b) {
                best = Some(relabelled);
            }
        }
        best.unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(canon(&[2, 4, 1, 3, 2, 1]), vec![1, 2, 3, 4, 1, 3]);
        assert_eq!(canon(&[2, 1, 4, 3, 1, 3]), vec![1, 2, 3, 4, 1, 3]);
        assert_eq!(canon(&[1, 1, 1, 1]), vec![1, 1, 1, 1]);
        assert_eq!(canon(&[7, 7, 3, 7]), vec![1, 1, 1, 2]);
        assert_eq!(canon(&[5, 9, 9, 9]), vec![1, 2, 1, 1]);
    }

    #[test]
    fn rejects_odd_and_zero() {
        assert!(IbdPattern::canonicalize(&[1, 2, 3]).is_err());
        assert!(IbdPattern::canonicalize(&[0, 1]).is_err());
    }

    #[test]
    fn premapped_tokens_sort_first() {
        // fixed alleles 0..10, draws from 10 up
        let out = canonical_pairs(&[(2, 50), (40, 3)], 10, |t| (t < 10).then_some(t));
        assert_eq!(out, vec![(2, 10), (3, 11)]);
    }

    proptest! {
        #[test]
        fn matches_orbit_minimum(raw in prop::collection::vec(1u32..7, 2..=12usize)
            .prop_filter("even", |v| v.len() % 2 == 0)) {
            let c = canon(&raw);
            prop_assert_eq!(&c, &brute_force_min(&raw));
            prop_assert_eq!(canon(&c), c);
        }

        #[test]
        fn invariant_under_swaps_and_relabelling(
            raw in prop::collection::vec(1u32..6, 8),
            swaps in prop::collection::vec(any::<bool>(), 4),
            shift in 1u32..50,
        ) {
            let mut v: Vec<u32> = raw.iter().map(|l| (l * 7 + shift) % 97 + 1).collect();
            for (i, s) in swaps.iter().enumerate() {
                if *s { v.swap(2 * i, 2 * i + 1); }
            }
            prop_assert_eq!(canon(&v), canon(&raw));
        }
    }
}
