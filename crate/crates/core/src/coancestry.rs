//! Dirichlet-multinomial genotype priors for ambient relatedness and
//! uncertain allele frequencies.

use statrs::function::gamma::ln_gamma;

use crate::alleles::{Allele, AlleleFrequencyTable, Genotype, MarkerFrequencies};
use crate::engine::{likelihood, EngineOptions, GenePrior, LikelihoodReport, MixtureModel};
use crate::error::{Error, Result};
use crate::peakmodel::{EpgData, MixtureModelParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoancestryParams {
    theta: f64,
}

impl CoancestryParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::BadTheta(theta));
        }
        Ok(CoancestryParams { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Effective database size `(1 - theta) / theta`; `None` at `theta = 0`.
    pub fn alpha_total(&self) -> Option<f64> {
        (self.theta > 0.0).then(|| (1.0 - self.theta) / self.theta)
    }

    /// Per-allele urn masses `alpha_total * q_a`.
    pub fn alpha(&self, freqs: &MarkerFrequencies) -> Option<Vec<f64>> {
        self.alpha_total().map(|t| freqs.freqs.iter().map(|q| t * q).collect())
    }
}

/// Dirichlet-multinomial probability of the count vector `x`.
pub fn dm_pmf(x: &[u32], alpha: &[f64]) -> f64 {
    assert_eq!(x.len(), alpha.len());
    let n: u32 = x.iter().sum();
    let a_tot: f64 = alpha.iter().sum();
    let mut l = ln_gamma(n as f64 + 1.0) + ln_gamma(a_tot) - ln_gamma(a_tot + n as f64);
    for (&k, &a) in x.iter().zip(alpha) {
        if k == 0 {
            continue;
        }
        if a <= 0.0 {
            return 0.0;
        }
        l += ln_gamma(a + k as f64) - ln_gamma(a) - ln_gamma(k as f64 + 1.0);
    }
    l.exp()
}

/// Beta-binomial probability of `k` successes in `n` trials.
pub fn beta_binomial_pmf(k: u32, n: u32, a: f64, b: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    dm_pmf(&[k, n - k], &[a, b])
}

/// Sequential (Pólya urn) genotype prior for an ordered list of people.
#[derive(Clone, Debug)]
pub struct DmGenotypePrior {
    pub ordering: Vec<String>,
    freqs: MarkerFrequencies,
    params: CoancestryParams,
}

pub fn dm_genotype_prior(ordering: &[String], freqs: &MarkerFrequencies, theta: f64) -> Result<DmGenotypePrior> {
    Ok(DmGenotypePrior { ordering: ordering.to_vec(), freqs: freqs.clone(), params: CoancestryParams::new(theta)? })
}

impl DmGenotypePrior {
    fn masses(&self, previous: &[Genotype]) -> (Vec<f64>, f64) {
        let mut m = match self.params.alpha(&self.freqs) {
            Some(a) => a,
            None => self.freqs.freqs.clone(),
        };
        if self.params.alpha_total().is_some() {
            for g in previous {
                for a in g.alleles() {
                    if let Some(i) = self.freqs.index_of(a) {
                        m[i] += 1.0;
                    }
                }
            }
        }
        let total = m.iter().sum();
        (m, total)
    }

    /// Probability of `g` for the next person, given those before.
    pub fn conditional_prob(&self, previous: &[Genotype], g: Genotype) -> f64 {
        let (m, total) = self.masses(previous);
        let (Some(i), Some(j)) = (self.freqs.index_of(g.0), self.freqs.index_of(g.1)) else {
            return 0.0;
        };
        if self.params.alpha_total().is_none() {
            return if i == j { m[i] * m[i] } else { 2.0 * m[i] * m[j] };
        }
        // one allele at a time: the second draw sees the first
        let first = if i == j { m[i] / total } else { 2.0 * m[i] / total };
        first * if i == j { (m[i] + 1.0) / (total + 1.0) } else { m[j] / (total + 1.0) }
    }

    /// The full conditional distribution over genotypes of the next person.
    pub fn conditional(&self, previous: &[Genotype]) -> Vec<(Genotype, f64)> {
        all_genotypes(&self.freqs.alleles).into_iter().map(|g| (g, self.conditional_prob(previous, g))).collect()
    }

    /// Joint probability of genotypes in `ordering` order.
    pub fn joint(&self, genotypes: &[Genotype]) -> f64 {
        (0..genotypes.len()).map(|i| self.conditional_prob(&genotypes[..i], genotypes[i])).product()
    }
}

fn all_genotypes(alleles: &[Allele]) -> Vec<Genotype> {
    let mut v = Vec::new();
    for i in 0..alleles.len() {
        for j in i..alleles.len() {
            v.push(Genotype::new(alleles[i], alleles[j]));
        }
    }
    v
}

/// Mixture likelihood with the Pólya-urn gene prior. `theta = 0` is the
/// plain engine.
pub fn likelihood_with_coancestry(
    model: &MixtureModel,
    epgs: &[EpgData],
    freqs: &AlleleFrequencyTable,
    params: &[MixtureModelParams],
    theta: f64,
    opts: &EngineOptions,
) -> Result<LikelihoodReport> {
    let c = CoancestryParams::new(theta)?;
    let prior = if c.alpha_total().is_some() { GenePrior::Polya { theta } } else { GenePrior::Independent };
    likelihood(model, epgs, freqs, params, &EngineOptions { prior, ..opts.clone() })
}
