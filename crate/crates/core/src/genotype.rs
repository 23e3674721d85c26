//! Joint genotype distributions of relatives, conditioning on typed
//! relatives, and simulation.

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alleles::{Allele, AlleleFrequencyTable, Genotype, GenotypeProfile, MarkerFrequencies};
use crate::error::{Error, Result};
use crate::ibd::{canonical_pairs, IbdPatternDistribution};

fn positions(dist: &IbdPatternDistribution, ids: impl IntoIterator<Item = impl AsRef<str>>) -> Result<Vec<usize>> {
    let mut missing = Vec::new();
    let mut out = Vec::new();
    for id in ids {
        match dist.position(id.as_ref()) {
            Some(p) => out.push(p),
            None => missing.push(id.as_ref().to_string()),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(Error::NotInDistribution(missing))
    }
}

/// Probability that the listed individuals have the given (unordered)
/// genotypes at one marker. Individuals of `dist` not listed are
/// marginalized out.
pub fn joint_genotype_probability(
    dist: &IbdPatternDistribution,
    freqs: &MarkerFrequencies,
    genotypes: &BTreeMap<String, Genotype>,
) -> Result<f64> {
    let cols = positions(dist, genotypes.keys())?;
    let mut qs: Vec<[(Allele, f64); 2]> = Vec::with_capacity(cols.len());
    for g in genotypes.values() {
        qs.push([(g.0, freqs.freq(g.0)?), (g.1, freqs.freq(g.1)?)]);
    }
    // ordered versions of each genotype: one for homozygotes, two otherwise
    let versions: Vec<Vec<[(Allele, f64); 2]>> = qs
        .iter()
        .map(|&[x, y]| if x.0 == y.0 { vec![[x, y]] } else { vec![[x, y], [y, x]] })
        .collect();
    let mut total = 0.0;
    let mut assign: HashMap<u32, Allele> = HashMap::new();
    for e in dist.entries() {
        let mut sum = 0.0;
        let mut choice = vec![0usize; cols.len()];
        'outer: loop {
            assign.clear();
            let mut prod = 1.0;
            let mut ok = true;
            for (k, &c) in cols.iter().enumerate() {
                let (l0, l1) = e.pattern.pair(c);
                for (l, (a, q)) in [(l0, versions[k][choice[k]][0]), (l1, versions[k][choice[k]][1])] {
                    match assign.get(&l) {
                        Some(&b) if b != a => ok = false,
                        Some(_) => {}
                        None => {
                            assign.insert(l, a);
                            prod *= q;
                        }
                    }
                }
            }
            if ok {
                sum += prod;
            }
            for k in 0..cols.len() {
                choice[k] += 1;
                if choice[k] < versions[k].len() {
                    continue 'outer;
                }
                choice[k] = 0;
            }
            break;
        }
        total += e.prob * sum;
    }
    Ok(total)
}

/// Where a contributor gene comes from under one row of a conditioned table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Gene {
    /// Determined by the typed genotypes.
    Fixed(Allele),
    /// The `j`th independent draw from the gene pool; repeated indices
    /// within a row denote the same gene.
    Draw(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionedRow {
    /// Prior pattern probability times permutation share times the
    /// probability of the typed alleles.
    pub raw_weight: f64,
    /// Normalized to sum to one over the table.
    pub weight: f64,
    pub genes: Vec<[Gene; 2]>,
    pub ndraws: usize,
}

/// Contributor genotype distribution given the typed relatives, at one
/// marker.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionedPatternTable {
    pub marker: String,
    pub contributors: Vec<String>,
    pub rows: Vec<ConditionedRow>,
    /// Probability of the typed (unordered) genotypes.
    pub p_typed: f64,
    pub ndraws: usize,
}

impl ConditionedPatternTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Conditional probability of contributor genotypes implied by the
    /// table, summing over rows and gene-pool draws.
    pub fn genotype_probability(&self, freqs: &MarkerFrequencies, genotypes: &[Genotype]) -> f64 {
        assert_eq!(genotypes.len(), self.contributors.len());
        let mut total = 0.0;
        for row in &self.rows {
            let versions: Vec<Vec<[Allele; 2]>> = genotypes
                .iter()
                .map(|g| if g.is_homozygous() { vec![[g.0, g.1]] } else { vec![[g.0, g.1], [g.1, g.0]] })
                .collect();
            let n: usize = versions.iter().map(Vec::len).product();
            for mut code in 0..n {
                let mut draws: HashMap<usize, Allele> = HashMap::new();
                let mut prod = 1.0;
                for (k, v) in versions.iter().enumerate() {
                    let o = v[code % v.len()];
                    code /= v.len();
                    for (gene, a) in row.genes[k].iter().zip(o) {
                        match *gene {
                            Gene::Fixed(b) if b != a => prod = 0.0,
                            Gene::Fixed(_) => {}
                            Gene::Draw(j) => match draws.get(&j) {
                                Some(&b) if b != a => prod = 0.0,
                                Some(_) => {}
                                None => {
                                    draws.insert(j, a);
                                    prod *= freqs.freq_or_zero(a);
                                }
                            },
                        }
                    }
                }
                total += row.weight * prod;
            }
        }
        total
    }
}

/// Expand every pattern over the within-pair orders of the typed
/// individuals, keep the orders that can produce the typed genotypes, and
/// describe each contributor gene as fixed or drawn. Rows that describe the
/// same contributor configuration are merged. A contributor that is also
/// typed ends up with fixed genes.
pub fn condition_on_typed(
    dist: &IbdPatternDistribution,
    freqs: &MarkerFrequencies,
    contributors: &[String],
    typed: &BTreeMap<String, Genotype>,
) -> Result<ConditionedPatternTable> {
    let ccols = positions(dist, contributors)?;
    let tcols = positions(dist, typed.keys())?;
    let mut tq: Vec<[(u32, f64); 2]> = Vec::with_capacity(typed.len());
    for g in typed.values() {
        let slot = |a: Allele| -> Result<(u32, f64)> {
            let i = freqs
                .index_of(a)
                .ok_or_else(|| Error::UnknownAllele { marker: freqs.name.clone(), allele: a.to_string() })?;
            Ok((i as u32 + 1, freqs.freqs[i]))
        };
        tq.push([slot(g.0)?, slot(g.1)?]);
    }
    let k = tcols.len();
    let share = 0.5f64.powi(k as i32);
    let nalleles = freqs.alleles.len() as u32;
    // pattern labels are offset above the allele tokens
    let offset = nalleles + 1;

    let mut merged: BTreeMap<Vec<(u32, u32)>, f64> = BTreeMap::new();
    let mut map: HashMap<u32, u32> = HashMap::new();
    let mut contributor_pairs: Vec<(u32, u32)> = Vec::with_capacity(ccols.len());
    for e in dist.entries() {
        for mask in 0u32..(1 << k) {
            map.clear();
            let mut w = e.prob * share;
            let mut ok = true;
            for (t, &c) in tcols.iter().enumerate() {
                let (l0, l1) = e.pattern.pair(c);
                let [x, y] = if mask >> t & 1 == 0 { tq[t] } else { [tq[t][1], tq[t][0]] };
                for (l, (tok, q)) in [(l0, x), (l1, y)] {
                    match map.get(&l) {
                        Some(&b) if b != tok => ok = false,
                        Some(_) => {}
                        None => {
                            map.insert(l, tok);
                            w *= q;
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok || w == 0.0 {
                continue;
            }
            contributor_pairs.clear();
            for &c in &ccols {
                let (l0, l1) = e.pattern.pair(c);
                let tok = |l: u32| map.get(&l).copied().unwrap_or(offset + l);
                contributor_pairs.push((tok(l0), tok(l1)));
            }
            let key = canonical_pairs(&contributor_pairs, offset, |t| (t < offset).then_some(t));
            *merged.entry(key).or_default() += w;
        }
    }
    let total: f64 = merged.values().sum();
    if merged.is_empty() || total <= 0.0 {
        return Err(Error::ImpossibleEvidence(freqs.name.clone()));
    }
    let nhet = typed.values().filter(|g| !g.is_homozygous()).count();
    let p_typed = total * 2f64.powi(nhet as i32);
    let rows: Vec<ConditionedRow> = merged
        .into_iter()
        .map(|(key, raw)| {
            let gene = |t: u32| {
                if t < offset {
                    Gene::Fixed(freqs.alleles[t as usize - 1])
                } else {
                    Gene::Draw((t - offset) as usize)
                }
            };
            let genes: Vec<[Gene; 2]> = key.iter().map(|&(a, b)| [gene(a), gene(b)]).collect();
            let ndraws = key.iter().flat_map(|&(a, b)| [a, b]).filter(|&t| t >= offset).map(|t| t - offset + 1).max();
            ConditionedRow { raw_weight: raw, weight: raw / total, genes, ndraws: ndraws.unwrap_or(0) as usize }
        })
        .collect();
    let ndraws = rows.iter().map(|r| r.ndraws).max().unwrap_or(0);
    Ok(ConditionedPatternTable { marker: freqs.name.clone(), contributors: contributors.to_vec(), rows, p_typed, ndraws })
}

fn draw_allele<R: Rng>(freqs: &MarkerFrequencies, rng: &mut R) -> Allele {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, q) in freqs.alleles.iter().zip(&freqs.freqs) {
        acc += q;
        if u < acc {
            return *a;
        }
    }
    *freqs.alleles.last().expect("non-empty marker")
}

/// Simulated profiles of everyone in `dist`, plus the index of the pattern
/// drawn at each marker.
pub fn simulate_profiles_with_patterns<R: Rng>(
    dist: &IbdPatternDistribution,
    freqs: &AlleleFrequencyTable,
    rng: &mut R,
) -> Result<(BTreeMap<String, GenotypeProfile>, Vec<usize>)> {
    let probs: Vec<f64> = dist.entries().iter().map(|e| e.prob).collect();
    let pick = WeightedIndex::new(&probs).map_err(|e| Error::InvalidPattern(e.to_string()))?;
    let mut out: BTreeMap<String, GenotypeProfile> =
        dist.ids().iter().map(|id| (id.clone(), GenotypeProfile::new())).collect();
    let mut picked = Vec::with_capacity(freqs.markers().len());
    for m in freqs.markers() {
        let idx = pick.sample(rng);
        picked.push(idx);
        let pattern = &dist.entries()[idx].pattern;
        let labels: Vec<Allele> = (0..pattern.distinct_labels()).map(|_| draw_allele(m, rng)).collect();
        for (i, id) in dist.ids().iter().enumerate() {
            let (l0, l1) = pattern.pair(i);
            out.get_mut(id)
                .unwrap()
                .insert(m.name.clone(), Genotype::new(labels[l0 as usize - 1], labels[l1 as usize - 1]));
        }
    }
    Ok((out, picked))
}

pub fn simulate_profiles<R: Rng>(
    dist: &IbdPatternDistribution,
    freqs: &AlleleFrequencyTable,
    rng: &mut R,
) -> Result<BTreeMap<String, GenotypeProfile>> {
    Ok(simulate_profiles_with_patterns(dist, freqs, rng)?.0)
}

/// Seeded convenience wrapper around [`simulate_profiles`].
pub fn simulate_profiles_seeded(
    dist: &IbdPatternDistribution,
    freqs: &AlleleFrequencyTable,
    seed: u64,
) -> Result<BTreeMap<String, GenotypeProfile>> {
    simulate_profiles(dist, freqs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Contributor genotypes drawn from a conditioned table.
pub fn simulate_conditioned<R: Rng>(
    table: &ConditionedPatternTable,
    freqs: &MarkerFrequencies,
    rng: &mut R,
) -> Result<BTreeMap<String, Genotype>> {
    if table.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let weights: Vec<f64> = table.rows.iter().map(|r| r.weight).collect();
    let row = &table.rows[WeightedIndex::new(&weights).map_err(|_| Error::EmptyTable)?.sample(rng)];
    let draws: Vec<Allele> = (0..row.ndraws).map(|_| draw_allele(freqs, rng)).collect();
    let allele = |g: Gene| match g {
        Gene::Fixed(a) => a,
        Gene::Draw(j) => draws[j],
    };
    Ok(table
        .contributors
        .iter()
        .zip(&row.genes)
        .map(|(id, [g0, g1])| (id.clone(), Genotype::new(allele(*g0), allele(*g1))))
        .collect())
}
