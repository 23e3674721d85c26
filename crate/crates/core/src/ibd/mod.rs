//! Identity-by-descent pattern distributions for sets of pedigree members.

mod distribution;
mod pattern;
mod states;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use distribution::{
    condensed_coefficients, condensed_coefficients_f64, jacquard_class, IbdPatternDistribution, PatternEntry,
};
pub use pattern::IbdPattern;
pub(crate) use pattern::{canonical_labels, canonical_pairs};
pub use states::{count_states, count_states_with_cap, DEFAULT_STATE_ENUMERATION_CAP};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::pedigree::Pedigree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IbdMode {
    /// Active-set elimination with coalescing of equivalent states.
    Exact,
    /// Enumeration of every meiosis vector. Slow; used as a reference.
    ExactNaive,
    /// Gene dropping.
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IbdOptions {
    pub mode: IbdMode,
    pub mc_samples: u64,
    pub seed: u64,
    /// Maximum number of meioses for [`IbdMode::ExactNaive`].
    pub meiosis_cap: usize,
    /// Maximum number of coalesced states for [`IbdMode::Exact`].
    pub state_limit: usize,
}

impl Default for IbdOptions {
    fn default() -> Self {
        IbdOptions { mode: IbdMode::Exact, mc_samples: 100_000, seed: 1, meiosis_cap: 24, state_limit: 1_000_000 }
    }
}

/// Joint IBD pattern distribution of `targets` (in the given order).
pub fn pattern_distribution(ped: &Pedigree, targets: &[String], opts: &IbdOptions) -> Result<IbdPatternDistribution> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    let mut idx = Vec::with_capacity(targets.len());
    for t in targets {
        let i = ped.index_of(t)?;
        if idx.contains(&i) {
            return Err(Error::DuplicateTarget(t.clone()));
        }
        idx.push(i);
    }
    match opts.mode {
        IbdMode::Exact => active_set(ped, targets, &idx, opts.state_limit),
        IbdMode::ExactNaive => naive(ped, targets, &idx, opts.meiosis_cap),
        IbdMode::MonteCarlo => monte_carlo(ped, targets, &idx, opts.mc_samples, opts.seed),
    }
}

/// Order in which to bring members of `keep` into the active set: children
/// as soon as both parents are present, founders only when nothing else is
/// ready, picking the one that completes a child's parent set if possible.
fn elimination_order(ped: &Pedigree, keep: &[bool]) -> Vec<usize> {
    let n = ped.len();
    let rank: Vec<usize> = {
        let mut r = vec![0; n];
        for (k, &i) in ped.topological_order().iter().enumerate() {
            r[i] = k;
        }
        r
    };
    let mut done = vec![false; n];
    let mut order = Vec::new();
    let total = keep.iter().filter(|&&k| k).count();
    while order.len() < total {
        let ready_child = (0..n)
            .filter(|&i| keep[i] && !done[i])
            .filter(|&i| matches!(ped.parents(i), Some((f, m)) if done[f] && done[m]))
            .min_by_key(|&i| rank[i]);
        let next = ready_child.unwrap_or_else(|| {
            let pending_founders = (0..n).filter(|&i| keep[i] && !done[i] && ped.is_founder(i));
            // prefer a founder whose mate is already present
            let completing = pending_founders.clone().find(|&i| {
                ped.children(i).iter().any(|&c| {
                    keep[c]
                        && match ped.parents(c) {
                            Some((f, m)) => (f == i && done[m]) || (m == i && done[f]),
                            None => false,
                        }
                })
            });
            completing.unwrap_or_else(|| {
                // otherwise the founder feeding the earliest blocked child
                let mut best: Option<(usize, usize)> = None;
                for c in (0..n).filter(|&c| keep[c] && !done[c]) {
                    if let Some((f, m)) = ped.parents(c) {
                        for p in [f, m] {
                            if !done[p] && ped.is_founder(p) && best.is_none_or(|(r, _)| rank[c] < r) {
                                best = Some((rank[c], p));
                            }
                        }
                    }
                }
                best.map(|(_, p)| p).or_else(|| pending_founders.min_by_key(|&i| rank[i])).expect("progress")
            })
        });
        done[next] = true;
        order.push(next);
    }
    order
}

fn active_set(ped: &Pedigree, ids: &[String], targets: &[usize], limit: usize) -> Result<IbdPatternDistribution> {
    let keep = ped.ancestral_closure(targets);
    let order = elimination_order(ped, &keep);
    let is_target: Vec<bool> = (0..ped.len()).map(|i| targets.contains(&i)).collect();
    let mut pending_children: Vec<usize> =
        (0..ped.len()).map(|i| ped.children(i).iter().filter(|&&c| keep[c]).count()).collect();

    // active individuals; each state holds two labels per active individual
    let mut active: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u32>, BigUint> = HashMap::new();
    states.insert(Vec::new(), BigUint::one());
    let mut meioses: u32 = 0;

    for &x in &order {
        let mut next: HashMap<Vec<u32>, BigUint> = HashMap::with_capacity(states.len() * 4);
        match ped.parents(x) {
            None => {
                for (s, c) in states {
                    let mut s2 = s;
                    let fresh = s2.iter().copied().max().unwrap_or(0);
                    s2.extend([fresh + 1, fresh + 2]);
                    *next.entry(s2).or_default() += c;
                }
            }
            Some((f, m)) => {
                meioses += 2;
                let pf = active.iter().position(|&a| a == f).expect("father active");
                let pm = active.iter().position(|&a| a == m).expect("mother active");
                for (s, c) in states {
                    for gf in 0..2 {
                        for gm in 0..2 {
                            let mut s2 = s.clone();
                            s2.extend([s[2 * pf + gf], s[2 * pm + gm]]);
                            *next.entry(s2).or_default() += &c;
                        }
                    }
                }
            }
        }
        active.push(x);
        if let Some((f, m)) = ped.parents(x) {
            pending_children[f] -= 1;
            pending_children[m] -= 1;
        }

        // retire members with no influence left
        let retired: Vec<usize> = active
            .iter()
            .enumerate()
            .filter(|&(_, &a)| !is_target[a] && pending_children[a] == 0)
            .map(|(k, _)| k)
            .collect();
        let keep_cols: Vec<usize> = (0..active.len()).filter(|k| !retired.contains(k)).collect();
        active = keep_cols.iter().map(|&k| active[k]).collect();

        states = HashMap::with_capacity(next.len());
        for (s, c) in next {
            let raw: Vec<u32> = keep_cols.iter().flat_map(|&k| [s[2 * k], s[2 * k + 1]]).collect();
            let key = if raw.is_empty() { raw } else { canonical_labels(&raw) };
            *states.entry(key).or_default() += c;
        }
        if states.len() > limit {
            return Err(Error::StateLimit { states: states.len(), limit });
        }
    }

    // reorder the surviving columns into target order
    let cols: Vec<usize> = targets.iter().map(|t| active.iter().position(|a| a == t).expect("target active")).collect();
    let rows = states
        .into_iter()
        .map(|(s, c)| {
            let raw: Vec<u32> = cols.iter().flat_map(|&k| [s[2 * k], s[2 * k + 1]]).collect();
            (Dyadic::new(c, meioses), raw)
        })
        .collect();
    IbdPatternDistribution::from_exact(ids.to_vec(), rows)
}

/// Gene labels of every member of `keep` for one meiosis vector; founders
/// get `2i+1, 2i+2`.
fn drop_genes(ped: &Pedigree, keep: &[bool], mut meiosis: impl FnMut() -> usize) -> Vec<[u32; 2]> {
    let mut genes = vec![[0u32; 2]; ped.len()];
    for &i in ped.topological_order() {
        if !keep[i] {
            continue;
        }
        genes[i] = match ped.parents(i) {
            None => [2 * i as u32 + 1, 2 * i as u32 + 2],
            Some((f, m)) => [genes[f][meiosis()], genes[m][meiosis()]],
        };
    }
    genes
}

fn naive(ped: &Pedigree, ids: &[String], targets: &[usize], cap: usize) -> Result<IbdPatternDistribution> {
    let keep = ped.ancestral_closure(targets);
    let meioses = 2 * (0..ped.len()).filter(|&i| keep[i] && !ped.is_founder(i)).count();
    if meioses > cap || meioses >= 64 {
        return Err(Error::MeiosisCap { meioses, cap });
    }
    let mut counts: BTreeMap<IbdPattern, u64> = BTreeMap::new();
    for v in 0u64..(1u64 << meioses) {
        let mut bit = 0;
        let genes = drop_genes(ped, &keep, || {
            let b = (v >> bit & 1) as usize;
            bit += 1;
            b
        });
        let raw: Vec<u32> = targets.iter().flat_map(|&t| genes[t]).collect();
        *counts.entry(IbdPattern::canonicalize(&raw)?).or_default() += 1;
    }
    let rows = counts
        .into_iter()
        .map(|(p, c)| (Dyadic::new(c, meioses as u32), p.labels().to_vec()))
        .collect();
    IbdPatternDistribution::from_exact(ids.to_vec(), rows)
}

fn monte_carlo(
    ped: &Pedigree,
    ids: &[String],
    targets: &[usize],
    samples: u64,
    seed: u64,
) -> Result<IbdPatternDistribution> {
    if samples == 0 {
        return Err(Error::Config("monte-carlo mode needs at least one sample".into()));
    }
    let keep = ped.ancestral_closure(targets);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for _ in 0..samples {
        let genes = drop_genes(ped, &keep, || rng.random_range(0..2usize));
        let raw: Vec<u32> = targets.iter().flat_map(|&t| genes[t]).collect();
        *counts.entry(canonical_labels(&raw)).or_default() += 1;
    }
    let rows: Vec<(f64, Vec<u32>)> = counts.into_iter().map(|(p, c)| (c as f64 / samples as f64, p)).collect();
    IbdPatternDistribution::from_raw(ids.to_vec(), &rows)
}
