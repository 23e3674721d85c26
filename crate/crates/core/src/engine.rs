//! Exact mixture likelihood: sum over contributor genotypes of the genotype
//! prior times the peak-height likelihood.
//!
//! Each marker is evaluated by sweeping the allele grid once per row of the
//! conditioned pattern table. Gene-pool draws that enter the peak model with
//! identical weights are interchangeable, so the sweep state records only how
//! many draws of each such class have been placed so far, together with how
//! many were placed at the previous allele (the stutter source of the
//! current one).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::alleles::{Allele, AlleleFrequencyTable, Genotype, GenotypeProfile, MarkerFrequencies};
use crate::error::{Error, Result};
use crate::genotype::{condition_on_typed, joint_genotype_probability, ConditionedPatternTable, Gene};
use crate::ibd::IbdPatternDistribution;
use crate::numeric::{log_sum_exp_weighted, neumaier_sum, rising};
use crate::peakmodel::{allele_log_factor, marker_loglik, EpgData, MarkerEpg, MixtureModelParams};

/// Prior for gene-pool draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GenePrior {
    /// Independent draws from the allele frequencies.
    Independent,
    /// Pólya urn with coancestry `theta`, seeded with the typed alleles.
    Polya { theta: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EngineOptions {
    pub prior: GenePrior,
    /// Largest number of gene-pool draws per row.
    pub max_draws: usize,
    /// Largest number of genotype combinations for the brute-force oracle.
    pub brute_force_cap: u128,
    /// Evaluate markers in parallel when the `parallel` feature is on.
    pub parallel: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { prior: GenePrior::Independent, max_draws: 20, brute_force_cap: 1_000_000, parallel: true }
    }
}

/// Who contributed, how everyone involved is related, and who is typed.
#[derive(Clone, Debug)]
pub struct MixtureModel {
    /// Contributors, in the order of the mixture proportions.
    pub contributors: Vec<String>,
    /// Relationship among contributors and typed individuals.
    pub dist: IbdPatternDistribution,
    /// Typed individuals, contributors (known) or not.
    pub typed: BTreeMap<String, GenotypeProfile>,
}

impl MixtureModel {
    pub fn new(
        contributors: Vec<String>,
        dist: IbdPatternDistribution,
        typed: BTreeMap<String, GenotypeProfile>,
    ) -> Result<Self> {
        if contributors.is_empty() {
            return Err(Error::InvalidHypothesis("no contributors".into()));
        }
        for (i, c) in contributors.iter().enumerate() {
            if contributors[..i].contains(c) {
                return Err(Error::InvalidHypothesis(format!("contributor `{c}` listed twice")));
            }
        }
        let missing: Vec<String> =
            contributors.iter().chain(typed.keys()).filter(|id| dist.position(id).is_none()).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::NotInDistribution(missing));
        }
        Ok(MixtureModel { contributors, dist, typed })
    }

    /// All contributors and typed individuals mutually unrelated.
    pub fn unrelated(contributors: Vec<String>, typed: BTreeMap<String, GenotypeProfile>) -> Result<Self> {
        let mut ids = contributors.clone();
        ids.extend(typed.keys().filter(|k| !contributors.contains(k)).cloned());
        let dist = IbdPatternDistribution::unrelated(ids)?;
        Self::new(contributors, dist, typed)
    }

    /// Typed genotypes at one marker; people not typed there are left out.
    pub fn typed_at(&self, marker: &str) -> BTreeMap<String, Genotype> {
        self.typed.iter().filter_map(|(id, p)| p.get(marker).map(|g| (id.clone(), g))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkerLikelihood {
    pub marker: String,
    /// Natural log of p(peaks | typed genotypes).
    #[serde(serialize_with = "crate::numeric::ser_float")]
    pub log_lik: f64,
    /// Probability of the typed genotypes.
    pub p_typed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LikelihoodReport {
    /// Natural log-likelihood summed over markers.
    #[serde(serialize_with = "crate::numeric::ser_float")]
    pub total: f64,
    pub markers: Vec<MarkerLikelihood>,
    /// First marker (in evaluation order) with zero likelihood.
    pub first_impossible: Option<String>,
}

impl LikelihoodReport {
    fn from_markers(markers: Vec<MarkerLikelihood>) -> Result<Self> {
        if let Some(m) = markers.iter().find(|m| m.log_lik.is_nan()) {
            return Err(Error::NonFinite(format!("marker {}", m.marker)));
        }
        let total = neumaier_sum(markers.iter().map(|m| m.log_lik));
        let first_impossible = markers.iter().find(|m| m.log_lik == f64::NEG_INFINITY).map(|m| m.marker.clone());
        Ok(LikelihoodReport { total, markers, first_impossible })
    }

    pub fn marker(&self, name: &str) -> Option<&MarkerLikelihood> {
        self.markers.iter().find(|m| m.marker == name)
    }
}

/// Markers analysed: every marker present in some EPG, sorted by name.
fn marker_names(epgs: &[EpgData]) -> Vec<String> {
    let set: BTreeSet<String> = epgs.iter().flat_map(|e| e.markers().iter().map(|m| m.name.clone())).collect();
    set.into_iter().collect()
}

/// Grid order for the sweep: within each micro-variant family, descending
/// repeat number, so a stutter source immediately precedes its target.
fn sweep_key(a: &Allele) -> (u8, std::cmp::Reverse<i32>) {
    (a.micro, std::cmp::Reverse(a.repeat))
}

struct PreparedRow {
    weight: f64,
    /// Fixed genes per contributor per grid step.
    fixed: Vec<Vec<u8>>,
    /// Genes per contributor for each draw.
    draws: Vec<Vec<u8>>,
}

struct PreparedMarker {
    name: String,
    /// Prior weight per step: `q_a`, or the urn mass `alpha_a + seed_a`.
    prior: Vec<f64>,
    prior_total: f64,
    /// Peak heights per EPG per step; `None` when the EPG lacks the marker.
    heights: Vec<Option<Vec<f64>>>,
    /// Does the previous step hold the stutter source of this one?
    source: Vec<bool>,
    rows: Vec<PreparedRow>,
    p_typed: f64,
    impossible: bool,
}

/// Parameter-independent part of the likelihood, reusable across
/// parameter values.
pub struct PreparedLikelihood {
    markers: Vec<PreparedMarker>,
    ncontrib: usize,
    nepg: usize,
    polya: bool,
    max_draws: usize,
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    parallel: bool,
}

fn urn_alpha(theta: f64) -> Result<Option<f64>> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::BadTheta(theta));
    }
    Ok((theta > 0.0).then(|| (1.0 - theta) / theta))
}

fn prepare_marker(
    model: &MixtureModel,
    epgs: &[EpgData],
    mf: &MarkerFrequencies,
    alpha: Option<f64>,
) -> Result<PreparedMarker> {
    let typed = model.typed_at(&mf.name);
    let epg_markers: Vec<Option<&MarkerEpg>> = epgs.iter().map(|e| e.marker(&mf.name)).collect();
    let table = match condition_on_typed(&model.dist, mf, &model.contributors, &typed) {
        Ok(t) => t,
        Err(Error::ImpossibleEvidence(_)) => {
            return Ok(PreparedMarker {
                name: mf.name.clone(),
                prior: vec![],
                prior_total: 0.0,
                heights: vec![],
                source: vec![],
                rows: vec![],
                p_typed: 0.0,
                impossible: true,
            })
        }
        Err(e) => return Err(e),
    };

    let mut set: BTreeSet<Allele> = mf.alleles.iter().copied().collect();
    for m in epg_markers.iter().flatten() {
        set.extend(m.peaks.iter().map(|(a, _)| *a));
    }
    for row in &table.rows {
        for g in row.genes.iter().flatten() {
            if let Gene::Fixed(a) = g {
                set.insert(*a);
            }
        }
    }
    let below: Vec<Allele> = set.iter().map(|a| a.below()).collect();
    set.extend(below);
    let mut grid: Vec<Allele> = set.into_iter().collect();
    grid.sort_by_key(sweep_key);
    let step: BTreeMap<Allele, usize> = grid.iter().enumerate().map(|(k, a)| (*a, k)).collect();

    let (prior, prior_total) = match alpha {
        None => (grid.iter().map(|a| mf.freq_or_zero(*a)).collect::<Vec<_>>(), 1.0),
        Some(alpha) => {
            let mut seed: BTreeMap<Allele, f64> = BTreeMap::new();
            for g in typed.values() {
                for a in g.alleles() {
                    *seed.entry(a).or_default() += 1.0;
                }
            }
            let p: Vec<f64> =
                grid.iter().map(|a| alpha * mf.freq_or_zero(*a) + seed.get(a).copied().unwrap_or(0.0)).collect();
            let total = neumaier_sum(p.iter().copied());
            (p, total)
        }
    };
    let heights = epg_markers.iter().map(|m| m.map(|m| grid.iter().map(|a| m.height(*a)).collect())).collect();
    let source = (0..grid.len()).map(|k| k > 0 && grid[k - 1] == grid[k].above()).collect();
    let rows = table_rows(&table, &step, grid.len());
    Ok(PreparedMarker {
        name: mf.name.clone(),
        prior,
        prior_total,
        heights,
        source,
        rows,
        p_typed: table.p_typed,
        impossible: false,
    })
}

fn table_rows(table: &ConditionedPatternTable, step: &BTreeMap<Allele, usize>, nsteps: usize) -> Vec<PreparedRow> {
    let nc = table.contributors.len();
    table
        .rows
        .iter()
        .map(|r| {
            let mut fixed = vec![vec![0u8; nsteps]; nc];
            let mut draws = vec![vec![0u8; nc]; r.ndraws];
            for (i, genes) in r.genes.iter().enumerate() {
                for g in genes {
                    match *g {
                        Gene::Fixed(a) => fixed[i][step[&a]] += 1,
                        Gene::Draw(j) => draws[j][i] += 1,
                    }
                }
            }
            PreparedRow { weight: r.weight, fixed, draws }
        })
        .collect()
}

impl PreparedLikelihood {
    pub fn new(
        model: &MixtureModel,
        epgs: &[EpgData],
        freqs: &AlleleFrequencyTable,
        opts: &EngineOptions,
    ) -> Result<Self> {
        if epgs.is_empty() {
            return Err(Error::Config("no EPG data".into()));
        }
        let alpha = match opts.prior {
            GenePrior::Independent => None,
            GenePrior::Polya { theta } => urn_alpha(theta)?,
        };
        if alpha.is_some() && model.dist.len() != 1 {
            return Err(Error::UnsupportedCombination);
        }
        let markers = marker_names(epgs)
            .iter()
            .map(|name| prepare_marker(model, epgs, freqs.marker(name)?, alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedLikelihood {
            markers,
            ncontrib: model.contributors.len(),
            nepg: epgs.len(),
            polya: alpha.is_some(),
            max_draws: opts.max_draws,
            parallel: opts.parallel,
        })
    }

    pub fn marker_names(&self) -> Vec<&str> {
        self.markers.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn contributors(&self) -> usize {
        self.ncontrib
    }

    /// Log-likelihood at one parameter set per EPG.
    pub fn evaluate(&self, params: &[MixtureModelParams]) -> Result<LikelihoodReport> {
        if params.len() != self.nepg {
            return Err(Error::InvalidParams(format!("{} parameter sets for {} EPGs", params.len(), self.nepg)));
        }
        for p in params {
            p.validate()?;
            if p.phi.len() != self.ncontrib {
                return Err(Error::InvalidParams(format!(
                    "{} mixture proportions for {} contributors",
                    p.phi.len(),
                    self.ncontrib
                )));
            }
        }
        let eval = |m: &PreparedMarker| -> Result<MarkerLikelihood> {
            let log_lik = if m.impossible { f64::NEG_INFINITY } else { self.marker_loglik(m, params)? };
            Ok(MarkerLikelihood { marker: m.name.clone(), log_lik, p_typed: m.p_typed })
        };
        #[cfg(feature = "parallel")]
        let markers: Vec<MarkerLikelihood> = if self.parallel {
            use rayon::prelude::*;
            self.markers.par_iter().map(eval).collect::<Result<_>>()?
        } else {
            self.markers.iter().map(eval).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let markers: Vec<MarkerLikelihood> = self.markers.iter().map(eval).collect::<Result<_>>()?;
        LikelihoodReport::from_markers(markers)
    }

    fn marker_loglik(&self, m: &PreparedMarker, params: &[MixtureModelParams]) -> Result<f64> {
        let mut terms = Vec::with_capacity(m.rows.len());
        for row in &m.rows {
            terms.push((row.weight, self.row_loglik(m, row, params)?));
        }
        Ok(log_sum_exp_weighted(&terms))
    }

    fn row_loglik(&self, m: &PreparedMarker, row: &PreparedRow, params: &[MixtureModelParams]) -> Result<f64> {
        let ne = params.len();
        let nsteps = m.prior.len();

        // fixed dose per EPG per step
        let fixed: Vec<Vec<f64>> = params
            .iter()
            .map(|p| {
                (0..nsteps)
                    .map(|k| row.fixed.iter().zip(&p.phi).map(|(f, phi)| phi * f[k] as f64).sum())
                    .collect()
            })
            .collect();

        // group draws into classes of identical weight vectors
        let mut classes: Vec<(Vec<f64>, usize)> = Vec::new();
        for d in &row.draws {
            let w: Vec<f64> =
                params.iter().map(|p| d.iter().zip(&p.phi).map(|(c, phi)| phi * *c as f64).sum()).collect();
            if w.iter().all(|x| *x == 0.0) {
                continue;
            }
            match classes.iter_mut().find(|(v, _)| v.iter().zip(&w).all(|(a, b)| a.to_bits() == b.to_bits())) {
                Some((_, n)) => *n += 1,
                None => classes.push((w, 1)),
            }
        }
        let ndraws: usize = classes.iter().map(|c| c.1).sum();
        if ndraws > self.max_draws || classes.iter().any(|c| c.1 > 15) {
            return Err(Error::StateSpace { draws: ndraws, limit_log2: self.max_draws as u32 });
        }
        let sizes: Vec<usize> = classes.iter().map(|c| c.1).collect();
        let mut stride = vec![1usize; sizes.len()];
        for c in 1..sizes.len() {
            stride[c] = stride[c - 1] * (sizes[c - 1] + 1);
        }
        let big_m: usize = sizes.iter().map(|s| s + 1).product();
        let digits: Vec<Vec<usize>> =
            (0..big_m).map(|x| sizes.iter().zip(&stride).map(|(s, st)| x / st % (s + 1)).collect()).collect();
        let nsum: Vec<usize> = digits.iter().map(|d| d.iter().sum()).collect();
        // draw dose per EPG for each count vector
        let ddose: Vec<Vec<f64>> = digits
            .iter()
            .map(|d| (0..ne).map(|e| d.iter().zip(&classes).map(|(n, c)| *n as f64 * c.0[e]).sum()).collect())
            .collect();

        let last_drawable = (0..nsteps).rev().find(|&k| m.prior[k] > 0.0);
        if ndraws > 0 && last_drawable.is_none() {
            return Ok(f64::NEG_INFINITY);
        }
        let full = big_m - 1;
        const ZERO: [usize; 1] = [0];
        let mut cur = vec![0.0f64; big_m * big_m];
        cur[0] = 1.0;
        let mut scale = 0.0f64;
        let mut pw = vec![0.0f64; ndraws + 1];
        let mut need = vec![false; big_m * big_m];
        let mut lval = vec![0.0f64; big_m * big_m];
        let mut next = vec![0.0f64; big_m * big_m];
        // count vectors that fit in what is left, and the ways to pick them
        let fits: Vec<Vec<usize>> = (0..big_m)
            .map(|a| (0..big_m).filter(|&n| (0..sizes.len()).all(|c| digits[n][c] + digits[a][c] <= sizes[c])).collect())
            .collect();
        let mut ways = vec![0.0f64; big_m * big_m];
        for a in 0..big_m {
            for &n in &fits[a] {
                ways[a * big_m + n] =
                    (0..sizes.len()).map(|c| BINOM[sizes[c] - digits[a][c]][digits[n][c]]).product();
            }
        }
        let rest: Vec<[usize; 1]> = (0..big_m).map(|a| [full - a]).collect();
        let choices = |a: usize, forced: bool, zero_prior: bool| -> &[usize] {
            if forced {
                &rest[a]
            } else if zero_prior {
                &ZERO
            } else {
                &fits[a]
            }
        };

        for k in 0..nsteps {
            let forced = Some(k) == last_drawable;
            let zero_prior = m.prior[k] <= 0.0;
            for (t, slot) in pw.iter_mut().enumerate() {
                *slot = if self.polya { rising(m.prior[k], t as u32) } else { m.prior[k].powi(t as i32) };
            }
            // mark the (count vector, previous count vector) pairs that occur
            let src = m.source[k];
            need.iter_mut().for_each(|x| *x = false);
            for a in 0..big_m {
                for p in 0..big_m {
                    if cur[a * big_m + p] == 0.0 {
                        continue;
                    }
                    let lp = if src { p } else { 0 };
                    for &n in choices(a, forced, zero_prior) {
                        need[n * big_m + lp] = true;
                    }
                }
            }
            let mut shift = f64::NEG_INFINITY;
            for (idx, _) in need.iter().enumerate().filter(|(_, x)| **x) {
                let (n, p) = (idx / big_m, idx % big_m);
                let mut l = 0.0;
                for (e, par) in params.iter().enumerate() {
                    let Some(z) = m.heights[e].as_ref() else { continue };
                    let mut dose = (1.0 - par.xi) * (fixed[e][k] + ddose[n][e]);
                    if src {
                        dose += par.xi * (fixed[e][k - 1] + ddose[p][e]);
                    }
                    l += allele_log_factor(z[k], par.rho * dose, par.eta, par.threshold);
                }
                lval[idx] = l;
                shift = shift.max(l);
            }
            if shift == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
            for (idx, l) in lval.iter_mut().enumerate() {
                if need[idx] {
                    *l = (*l - shift).exp();
                }
            }
            scale += shift;

            next.iter_mut().for_each(|x| *x = 0.0);
            for a in 0..big_m {
                for p in 0..big_m {
                    let v = cur[a * big_m + p];
                    if v == 0.0 {
                        continue;
                    }
                    let lp = if src { p } else { 0 };
                    for &n in choices(a, forced, zero_prior) {
                        let f = pw[nsum[n]] * lval[n * big_m + lp] * ways[a * big_m + n];
                        next[(a + n) * big_m + n] += v * f;
                    }
                }
            }
            let mx = next.iter().copied().fold(0.0f64, f64::max);
            if mx == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            next.iter_mut().for_each(|x| *x /= mx);
            scale += mx.ln();
            std::mem::swap(&mut cur, &mut next);
        }

        let total = neumaier_sum((0..big_m).map(|p| cur[full * big_m + p]));
        if total == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let mut ll = total.ln() + scale;
        if self.polya {
            ll -= rising(m.prior_total, ndraws as u32).ln();
        }
        Ok(ll)
    }
}

const BINOM: [[f64; 16]; 16] = binomials();

const fn binomials() -> [[f64; 16]; 16] {
    let mut t = [[0.0; 16]; 16];
    let mut n = 0;
    while n < 16 {
        t[n][0] = 1.0;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0.0 };
            k += 1;
        }
        n += 1;
    }
    t
}

/// Log-likelihood of the peaks given the typed genotypes, one parameter
/// set per EPG.
pub fn likelihood(
    model: &MixtureModel,
    epgs: &[EpgData],
    freqs: &AlleleFrequencyTable,
    params: &[MixtureModelParams],
    opts: &EngineOptions,
) -> Result<LikelihoodReport> {
    PreparedLikelihood::new(model, epgs, freqs, opts)?.evaluate(params)
}

/// Direct enumeration over the genotypes of all untyped contributors.
pub fn brute_force_likelihood(
    model: &MixtureModel,
    epgs: &[EpgData],
    freqs: &AlleleFrequencyTable,
    params: &[MixtureModelParams],
    opts: &EngineOptions,
) -> Result<LikelihoodReport> {
    if params.len() != epgs.len() {
        return Err(Error::InvalidParams(format!("{} parameter sets for {} EPGs", params.len(), epgs.len())));
    }
    for p in params {
        p.validate()?;
        if p.phi.len() != model.contributors.len() {
            return Err(Error::InvalidParams("mixture proportions do not match contributors".into()));
        }
    }
    let alpha = match opts.prior {
        GenePrior::Independent => None,
        GenePrior::Polya { theta } => urn_alpha(theta)?,
    };
    if alpha.is_some() && model.dist.len() != 1 {
        return Err(Error::UnsupportedCombination);
    }
    let mut out = Vec::new();
    for name in marker_names(epgs) {
        let mf = freqs.marker(&name)?;
        let typed = model.typed_at(&name);
        let untyped: Vec<usize> =
            (0..model.contributors.len()).filter(|&i| !typed.contains_key(&model.contributors[i])).collect();
        let cands: Vec<Genotype> = {
            let al: Vec<Allele> = mf.alleles.iter().zip(&mf.freqs).filter(|(_, q)| **q > 0.0).map(|(a, _)| *a).collect();
            let mut v = Vec::new();
            for i in 0..al.len() {
                for j in i..al.len() {
                    v.push(Genotype::new(al[i], al[j]));
                }
            }
            v
        };
        let terms = (cands.len() as u128).checked_pow(untyped.len() as u32).unwrap_or(u128::MAX);
        if terms > opts.brute_force_cap {
            return Err(Error::BruteForceCap { terms, cap: opts.brute_force_cap });
        }
        let p_typed = if typed.is_empty() { 1.0 } else { joint_genotype_probability(&model.dist, mf, &typed)? };
        if p_typed == 0.0 {
            out.push(MarkerLikelihood { marker: name, log_lik: f64::NEG_INFINITY, p_typed });
            continue;
        }
        let mut acc: Vec<(f64, f64)> = Vec::new();
        let mut code = vec![0usize; untyped.len()];
        loop {
            let mut gts: Vec<Genotype> = Vec::with_capacity(model.contributors.len());
            let mut all = typed.clone();
            let mut u = 0;
            for (i, id) in model.contributors.iter().enumerate() {
                let g = match typed.get(id) {
                    Some(g) => *g,
                    None => {
                        debug_assert_eq!(untyped[u], i);
                        u += 1;
                        cands[code[u - 1]]
                    }
                };
                all.insert(id.clone(), g);
                gts.push(g);
            }
            let prior = match alpha {
                None => joint_genotype_probability(&model.dist, mf, &all)? / p_typed,
                Some(alpha) => urn_prior(mf, alpha, &typed, untyped.iter().map(|&i| gts[i])),
            };
            if prior > 0.0 {
                let mut l = 0.0;
                for (e, par) in epgs.iter().zip(params) {
                    if let Some(me) = e.marker(&name) {
                        l += marker_loglik(me, &gts, par)?;
                    }
                }
                acc.push((prior, l));
            }
            let mut k = 0;
            while k < code.len() {
                code[k] += 1;
                if code[k] < cands.len() {
                    break;
                }
                code[k] = 0;
                k += 1;
            }
            if k == code.len() {
                break;
            }
        }
        out.push(MarkerLikelihood { marker: name, log_lik: log_sum_exp_weighted(&acc), p_typed });
    }
    LikelihoodReport::from_markers(out)
}

/// Sequential Dirichlet-multinomial probability of unordered genotypes,
/// with the urn seeded by the typed alleles.
fn urn_prior(
    mf: &MarkerFrequencies,
    alpha: f64,
    typed: &BTreeMap<String, Genotype>,
    genotypes: impl Iterator<Item = Genotype>,
) -> f64 {
    let mut mass: BTreeMap<Allele, f64> = mf.alleles.iter().zip(&mf.freqs).map(|(a, q)| (*a, alpha * q)).collect();
    for g in typed.values() {
        for a in g.alleles() {
            *mass.entry(a).or_default() += 1.0;
        }
    }
    let mut total: f64 = mass.values().sum();
    let mut p = 1.0;
    for g in genotypes {
        let (x, y) = (g.0, g.1);
        let mx = mass.get(&x).copied().unwrap_or(0.0);
        if x == y {
            p *= mx * (mx + 1.0) / (total * (total + 1.0));
        } else {
            let my = mass.get(&y).copied().unwrap_or(0.0);
            p *= 2.0 * mx * my / (total * (total + 1.0));
        }
        *mass.entry(x).or_default() += 1.0;
        *mass.entry(y).or_default() += 1.0;
        total += 2.0;
    }
    p
}
