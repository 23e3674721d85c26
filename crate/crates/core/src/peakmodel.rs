//! Gamma peak-height model with back-stutter and a detection threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::alleles::{Allele, Genotype};
use crate::error::{Error, Result};

/// Parameters of the peak-height model for one EPG.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureModelParams {
    /// Amplification: gamma shape per unit of dose.
    pub rho: f64,
    /// Mean stutter proportion.
    pub xi: f64,
    /// Gamma scale, in rfu.
    pub eta: f64,
    /// Contributor fractions, on the simplex.
    pub phi: Vec<f64>,
    /// Detection threshold, in rfu.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    50.0
}

impl MixtureModelParams {
    pub fn new(rho: f64, xi: f64, eta: f64, phi: Vec<f64>, threshold: f64) -> Result<Self> {
        let p = MixtureModelParams { rho, xi, eta, phi, threshold };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(0.0..1.0).contains(&self.xi) {
            return bad(format!("xi must lie in [0,1), got {}", self.xi));
        }
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return bad(format!("threshold must be non-negative, got {}", self.threshold));
        }
        if self.phi.is_empty() || self.phi.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return bad(format!("phi must be non-negative, got {:?}", self.phi));
        }
        let s: f64 = self.phi.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return bad(format!("phi must sum to 1, got {s}"));
        }
        Ok(())
    }
}

/// Peak heights at one marker, sorted by allele.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MarkerEpg {
    pub name: String,
    pub peaks: Vec<(Allele, f64)>,
}

impl MarkerEpg {
    pub fn height(&self, a: Allele) -> f64 {
        self.peaks.binary_search_by(|(x, _)| x.cmp(&a)).map_or(0.0, |i| self.peaks[i].1)
    }

    /// Alleles with a peak strictly above the threshold.
    pub fn observed(&self, threshold: f64) -> impl Iterator<Item = Allele> + '_ {
        self.peaks.iter().filter(move |(_, z)| *z > threshold).map(|(a, _)| *a)
    }
}

/// An electropherogram: peak heights per marker.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpgData {
    markers: Vec<MarkerEpg>,
}

impl EpgData {
    pub fn from_rows(rows: impl IntoIterator<Item = (String, Allele, f64)>) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut map: BTreeMap<String, BTreeMap<Allele, f64>> = BTreeMap::new();
        for (m, a, z) in rows {
            if !(z >= 0.0 && z.is_finite()) {
                return Err(Error::Config(format!("marker {m}: bad peak height {z} at {a}")));
            }
            let e = map.entry(m.clone()).or_insert_with(|| {
                order.push(m.clone());
                BTreeMap::new()
            });
            if e.insert(a, z).is_some() {
                return Err(Error::Config(format!("marker {m}: allele {a} listed twice")));
            }
        }
        let markers = order
            .into_iter()
            .map(|name| {
                let peaks = map.remove(&name).unwrap().into_iter().collect();
                MarkerEpg { name, peaks }
            })
            .collect();
        Ok(EpgData { markers })
    }

    pub fn from_markers(markers: Vec<MarkerEpg>) -> Self {
        EpgData { markers }
    }

    /// CSV with header `marker,allele,height`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 3 {
                return Err(Error::Config("EPG rows need marker,allele,height".into()));
            }
            let z: f64 = rec[2].parse().map_err(|_| Error::Config(format!("bad height `{}`", &rec[2])))?;
            rows.push((rec[0].to_string(), rec[1].parse()?, z));
        }
        Self::from_rows(rows)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["marker", "allele", "height"])?;
        for m in &self.markers {
            for (a, z) in &m.peaks {
                wtr.write_record([m.name.clone(), a.to_string(), format!("{z}")])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn markers(&self) -> &[MarkerEpg] {
        &self.markers
    }

    pub fn marker(&self, name: &str) -> Option<&MarkerEpg> {
        self.markers.iter().find(|m| m.name == name)
    }

    /// Is there any peak above the threshold?
    pub fn has_signal(&self, threshold: f64) -> bool {
        self.markers.iter().any(|m| m.observed(threshold).next().is_some())
    }
}

/// Dose at allele `a`: own signal scaled by `1 - xi`, plus stutter from the
/// allele one repeat above.
pub fn effective_dose(genotypes: &[Genotype], phi: &[f64], xi: f64, a: Allele) -> f64 {
    let own: f64 = genotypes.iter().zip(phi).map(|(g, p)| p * g.count(a) as f64).sum();
    let up: f64 = genotypes.iter().zip(phi).map(|(g, p)| p * g.count(a.above()) as f64).sum();
    (1.0 - xi) * own + xi * up
}

/// Log of the gamma CDF at `x` (shape `k`, unit scale), accurate deep in
/// the lower tail.
fn ln_gamma_cdf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let p = gamma_lr(k, x);
    if p > 1e-250 {
        return p.ln();
    }
    // series P(k,x) = x^k e^-x / Γ(k+1) * Σ x^n / ((k+1)...(k+n))
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    while term > sum * 1e-17 && n < 10_000.0 {
        term *= x / (k + n);
        sum += term;
        n += 1.0;
    }
    k * x.ln() - x - ln_gamma(k + 1.0) + sum.ln()
}

/// Log contribution of one allele: the gamma log-density of `z` if it is
/// above `threshold`, otherwise the log-probability of falling below it.
/// Shape zero is a point mass at height zero.
pub fn allele_log_factor(z: f64, shape: f64, eta: f64, threshold: f64) -> f64 {
    let observed = z > threshold;
    if shape <= 0.0 {
        return if observed { f64::NEG_INFINITY } else { 0.0 };
    }
    if observed {
        (shape - 1.0) * z.ln() - z / eta - ln_gamma(shape) - shape * eta.ln()
    } else {
        ln_gamma_cdf(shape, threshold / eta)
    }
}

/// Log-likelihood of the peaks at one marker given contributor genotypes
/// (in the order of `params.phi`). May be `-inf` for an impossible
/// configuration.
pub fn marker_loglik(epg: &MarkerEpg, genotypes: &[Genotype], params: &MixtureModelParams) -> Result<f64> {
    if genotypes.len() != params.phi.len() {
        return Err(Error::InvalidParams(format!(
            "{} genotypes for {} contributor fractions",
            genotypes.len(),
            params.phi.len()
        )));
    }
    let mut alleles: BTreeSet<Allele> = epg.peaks.iter().map(|(a, _)| *a).collect();
    for g in genotypes {
        for a in g.alleles() {
            alleles.insert(a);
            alleles.insert(a.below());
        }
    }
    let mut total = 0.0;
    for a in alleles {
        let d = effective_dose(genotypes, &params.phi, params.xi, a);
        total += allele_log_factor(epg.height(a), params.rho * d, params.eta, params.threshold);
    }
    if total.is_nan() {
        return Err(Error::NonFinite(format!("marker {}", epg.name)));
    }
    Ok(total)
}

/// Draw peak heights at one marker. Every allele with positive dose gets a
/// height, including those that fall below the threshold.
pub fn simulate_marker<R: Rng>(
    name: &str,
    genotypes: &[Genotype],
    params: &MixtureModelParams,
    rng: &mut R,
) -> MarkerEpg {
    let mut alleles: BTreeSet<Allele> = BTreeSet::new();
    for g in genotypes {
        for a in g.alleles() {
            alleles.insert(a);
            alleles.insert(a.below());
        }
    }
    let mut peaks = Vec::new();
    for a in alleles {
        let d = effective_dose(genotypes, &params.phi, params.xi, a);
        if d > 0.0 {
            let z = Gamma::new(params.rho * d, params.eta).expect("positive shape").sample(rng);
            peaks.push((a, z));
        }
    }
    MarkerEpg { name: name.to_string(), peaks }
}
