//! Replicated simulation studies: simulate related genotypes, synthesise
//! EPGs under the gamma model, and score hypotheses by log10 LR.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::alleles::{Allele, AlleleFrequencyTable, Genotype, GenotypeProfile};
use crate::engine::PreparedLikelihood;
use crate::error::{Error, Result};
use crate::genotype::simulate_profiles;
use crate::hypothesis::{joint_distribution, Hypothesis, Relatedness, Relationship, Slot};
use crate::inference::{compare, mle_prepared, LrPolicy, MleOptions};
use crate::peakmodel::{simulate_marker, EpgData, MixtureModelParams};
use crate::pedigree::Pedigree;

/// Mix a base seed with replicate coordinates (splitmix64 steps).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut x = base;
    for &p in parts {
        x = x.wrapping_add(p.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x = z ^ (z >> 31);
    }
    x
}

/// A made-up STR database: `markers` loci of 8 to 10 consecutive alleles,
/// some with a micro-variant, frequencies from a Dirichlet(2) draw.
pub fn synthetic_database(markers: usize, seed: u64) -> AlleleFrequencyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Gamma::new(2.0, 1.0).expect("valid gamma");
    let mut rows = Vec::new();
    for m in 0..markers {
        let n = rng.random_range(8..=10);
        let start = rng.random_range(6..=14);
        let mut alleles: Vec<Allele> = (0..n).map(|k| Allele::new(start + k, 0)).collect();
        if rng.random_bool(0.5) {
            let r = start + rng.random_range(1..n - 1);
            *alleles.last_mut().unwrap() = Allele::new(r, if rng.random_bool(0.5) { 2 } else { 3 });
        }
        let w: Vec<f64> = alleles.iter().map(|_| g.sample(&mut rng) + 0.05).collect();
        let s: f64 = w.iter().sum();
        for (a, w) in alleles.iter().zip(&w) {
            rows.push((format!("S{:02}", m + 1), *a, w / s));
        }
    }
    AlleleFrequencyTable::from_rows(rows).expect("synthetic database")
}

/// The bundled ten-marker database.
pub fn default_database() -> AlleleFrequencyTable {
    synthetic_database(10, 20_200_507)
}

/// Settings of the EPG synthesiser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    /// Gamma shape per cell of DNA in the sample.
    pub rho_per_cell: f64,
    pub eta: f64,
    pub xi: f64,
    pub threshold: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams { rho_per_cell: 0.25, eta: 40.0, xi: 0.05, threshold: 50.0 }
    }
}

impl SynthParams {
    /// Peak-model parameters implied by the cell counts.
    pub fn params(&self, cells: &[f64]) -> Result<MixtureModelParams> {
        let total: f64 = cells.iter().sum();
        if cells.iter().any(|c| *c < 0.0) || total <= 0.0 {
            return Err(Error::Config("cell counts must be non-negative with a positive total".into()));
        }
        MixtureModelParams::new(
            self.rho_per_cell * total,
            self.xi,
            self.eta,
            cells.iter().map(|c| c / total).collect(),
            self.threshold,
        )
    }
}

/// Simulated EPG for contributors with the given profiles and cell counts;
/// peaks at or below the threshold are dropped.
pub fn synthesize_epg(
    profiles: &[&GenotypeProfile],
    cells: &[f64],
    freqs: &AlleleFrequencyTable,
    synth: &SynthParams,
    seed: u64,
) -> Result<EpgData> {
    if profiles.len() != cells.len() {
        return Err(Error::Config(format!("{} profiles for {} cell counts", profiles.len(), cells.len())));
    }
    let params = synth.params(cells)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut markers = Vec::new();
    for mf in freqs.markers() {
        let gts: Option<Vec<Genotype>> = profiles.iter().map(|p| p.get(&mf.name)).collect();
        let Some(gts) = gts else { continue };
        let mut m = simulate_marker(&mf.name, &gts, &params, &mut rng);
        m.peaks.retain(|(_, z)| *z > synth.threshold);
        markers.push(m);
    }
    Ok(EpgData::from_markers(markers))
}

/// Relatedness as written in a study file: a named pairwise relationship,
/// a pedigree file, or inline pedigree text.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructureSpec {
    pub relationship: Option<Relationship>,
    /// The two people a relationship links; the first two contributors
    /// when absent.
    pub pair: Option<[String; 2]>,
    pub pedigree: Option<String>,
    pub pedigree_text: Option<String>,
}

impl StructureSpec {
    /// Resolve against the listed people; pedigree paths are relative to `base`.
    pub fn resolve(&self, people: &[String], base: Option<&Path>) -> Result<Relatedness> {
        if let Some(rel) = self.relationship {
            if let Some([a, b]) = &self.pair {
                return Ok(Relatedness::Distribution(rel.distribution(a, b)?));
            }
            if people.len() < 2 {
                return Err(Error::Config(format!("relationship `{rel}` needs two contributors")));
            }
            return Ok(Relatedness::Distribution(rel.distribution(&people[0], &people[1])?));
        }
        if let Some(text) = &self.pedigree_text {
            return Ok(Relatedness::Pedigree(Pedigree::parse(text)?));
        }
        if let Some(path) = &self.pedigree {
            let full = base.map(|b| b.join(path)).unwrap_or_else(|| path.into());
            return Ok(Relatedness::Pedigree(Pedigree::parse(&std::fs::read_to_string(full)?)?));
        }
        Ok(Relatedness::Unrelated)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthSpec {
    pub name: String,
    #[serde(flatten)]
    pub structure: StructureSpec,
    pub contributors: Vec<String>,
    pub cells: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub name: String,
    #[serde(flatten)]
    pub structure: StructureSpec,
    pub contributors: Vec<String>,
}

/// A likelihood ratio to tabulate; `h0` defaults to the unrelated baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSpec {
    pub name: String,
    pub hp: String,
    pub h0: Option<String>,
}

pub const BASELINE: &str = "unrelated";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub name: String,
    #[serde(default = "one")]
    pub seed: u64,
    #[serde(default = "four")]
    pub genotype_replicates: usize,
    #[serde(default = "four")]
    pub epg_replicates: usize,
    /// Frequency file; the bundled synthetic database when absent.
    #[serde(default)]
    pub freqs: Option<String>,
    /// Size of a synthetic database to use instead of the bundled one.
    #[serde(default)]
    pub synthetic_markers: Option<usize>,
    #[serde(default)]
    pub synth: SynthParams,
    pub truths: Vec<TruthSpec>,
    pub hypotheses: Vec<HypothesisSpec>,
    /// Empty means every hypothesis against the unrelated baseline.
    #[serde(default)]
    pub comparisons: Vec<ComparisonSpec>,
    /// Sets of actors whose genotypes are given to the analysis.
    #[serde(default = "no_typed")]
    pub typed_sets: Vec<Vec<String>>,
    /// Optimiser starts per fit; replicate grids need many fits.
    #[serde(default = "default_starts")]
    pub mle_starts: usize,
}

fn one() -> u64 {
    1
}
fn four() -> usize {
    4
}
fn no_typed() -> Vec<Vec<String>> {
    vec![vec![]]
}
fn default_starts() -> usize {
    2
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: StudyConfig = toml::from_str(text)?;
        c.check()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: StudyConfig = serde_json::from_str(text)?;
        c.check()?;
        Ok(c)
    }

    /// Read TOML or JSON, by extension.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    fn check(&self) -> Result<()> {
        if self.truths.is_empty() || self.hypotheses.is_empty() {
            return Err(Error::Config("a study needs at least one truth and one hypothesis".into()));
        }
        if self.genotype_replicates == 0 || self.epg_replicates == 0 {
            return Err(Error::Config("replicate counts must be positive".into()));
        }
        for t in &self.truths {
            if t.contributors.len() != t.cells.len() || t.cells.iter().any(|c| *c < 0.0) {
                return Err(Error::Config(format!("truth `{}`: one non-negative cell count per contributor", t.name)));
            }
        }
        for c in &self.comparisons {
            for h in std::iter::once(&c.hp).chain(&c.h0) {
                if h != BASELINE && !self.hypotheses.iter().any(|x| &x.name == h) {
                    return Err(Error::Config(format!("comparison `{}` names unknown hypothesis `{h}`", c.name)));
                }
            }
        }
        Ok(())
    }

    fn comparisons(&self) -> Vec<ComparisonSpec> {
        if !self.comparisons.is_empty() {
            return self.comparisons.clone();
        }
        self.hypotheses
            .iter()
            .map(|h| ComparisonSpec { name: h.name.clone(), hp: h.name.clone(), h0: None })
            .collect()
    }

    fn database(&self, base: Option<&Path>) -> Result<AlleleFrequencyTable> {
        if let Some(path) = &self.freqs {
            let full = base.map(|b| b.join(path)).unwrap_or_else(|| path.into());
            return AlleleFrequencyTable::read_csv(std::fs::File::open(full)?);
        }
        Ok(match self.synthetic_markers {
            Some(n) => synthetic_database(n, self.seed),
            None => default_database(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub truth: String,
    pub typed: String,
    pub comparison: String,
    pub genotype_replicate: usize,
    pub epg_replicate: usize,
    pub log10_lr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MedianRow {
    pub truth: String,
    pub typed: String,
    pub comparison: String,
    pub median_log10_lr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyResult {
    pub name: String,
    pub rows: Vec<StudyRow>,
    pub medians: Vec<MedianRow>,
}

/// Median with -inf and +inf ordered naturally; NaN when any value is NaN.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    // equal middles also keep matching infinities from becoming NaN
    if n % 2 == 1 || v[n / 2 - 1] == v[n / 2] {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else if v == f64::INFINITY {
        "Inf".into()
    } else if v == f64::NEG_INFINITY {
        "-Inf".into()
    } else {
        format!("{v:.6}")
    }
}

impl StudyResult {
    pub fn median(&self, truth: &str, typed: &str, comparison: &str) -> Option<f64> {
        self.medians
            .iter()
            .find(|m| m.truth == truth && m.typed == typed && m.comparison == comparison)
            .map(|m| m.median_log10_lr)
    }

    /// Long format, one line per replicate.
    pub fn write_rows_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["truth", "typed", "comparison", "genotype_replicate", "epg_replicate", "log10_lr"])?;
        for r in &self.rows {
            out.write_record([
                r.truth.clone(),
                r.typed.clone(),
                r.comparison.clone(),
                r.genotype_replicate.to_string(),
                r.epg_replicate.to_string(),
                fmt_float(r.log10_lr),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Wide table of medians: one line per truth and typed set, one column
    /// per comparison.
    pub fn write_medians_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cols: Vec<&str> = Vec::new();
        let mut lines: Vec<(&str, &str)> = Vec::new();
        for m in &self.medians {
            if !cols.contains(&m.comparison.as_str()) {
                cols.push(&m.comparison);
            }
            if !lines.contains(&(m.truth.as_str(), m.typed.as_str())) {
                lines.push((&m.truth, &m.typed));
            }
        }
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["truth", "typed"];
        header.extend(&cols);
        out.write_record(&header)?;
        for (t, ty) in lines {
            let mut rec = vec![t.to_string(), ty.to_string()];
            for c in &cols {
                rec.push(self.median(t, ty, c).map(fmt_float).unwrap_or_default());
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn typed_label(set: &[String]) -> String {
    if set.is_empty() {
        "none".into()
    } else {
        set.join("+")
    }
}

impl HypothesisSpec {
    /// Build the hypothesis for one analysis: typed contributors become
    /// known, members of the structure related, everyone else unrelated.
    pub fn build(&self, base: Option<&Path>, typed: &BTreeMap<String, GenotypeProfile>) -> Result<Hypothesis> {
        let rel = self.structure.resolve(&self.contributors, base)?;
        let slots = self
            .contributors
            .iter()
            .map(|id| {
                if typed.contains_key(id) {
                    Slot::Known(id.clone())
                } else if rel.contains(id) {
                    Slot::Related(id.clone())
                } else {
                    Slot::Unrelated(id.clone())
                }
            })
            .collect();
        Hypothesis::new(self.name.clone(), slots, rel, typed.clone())
    }
}

fn baseline(k: usize, typed: &BTreeMap<String, GenotypeProfile>) -> Result<Hypothesis> {
    let ids: Vec<String> = (1..=k).map(|i| format!("_U{i}")).collect();
    let refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
    Hypothesis::unrelated(BASELINE, &refs, typed.clone())
}

/// One genotype replicate: simulate everyone who appears in the truth or a
/// typed set, then score every EPG replicate.
fn run_genotype_replicate(
    config: &StudyConfig,
    base: Option<&Path>,
    freqs: &AlleleFrequencyTable,
    ti: usize,
    g: usize,
    opts: &MleOptions,
) -> Result<Vec<StudyRow>> {
    let truth = &config.truths[ti];
    let rel = truth.structure.resolve(&truth.contributors, base)?;
    let mut people = truth.contributors.clone();
    for set in &config.typed_sets {
        for id in set {
            if !people.contains(id) {
                people.push(id.clone());
            }
        }
    }
    let dist = joint_distribution(&rel, &people, &Default::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[ti as u64, g as u64]));
    let profiles = simulate_profiles(&dist, freqs, &mut rng)?;
    let contributors: Vec<&GenotypeProfile> = truth.contributors.iter().map(|c| &profiles[c]).collect();
    let comparisons = config.comparisons();
    let k = truth.contributors.len();

    let mut rows = Vec::new();
    for set in &config.typed_sets {
        let typed: BTreeMap<String, GenotypeProfile> = set.iter().map(|id| (id.clone(), profiles[id].clone())).collect();
        let mut hyps: BTreeMap<String, Hypothesis> = BTreeMap::new();
        hyps.insert(BASELINE.into(), baseline(k, &typed)?);
        for spec in &config.hypotheses {
            hyps.insert(spec.name.clone(), spec.build(base, &typed)?);
        }
        for e in 0..config.epg_replicates {
            let seed = derive_seed(config.seed, &[ti as u64, g as u64, e as u64, 0xE9]);
            let epg = vec![synthesize_epg(&contributors, &truth.cells, freqs, &config.synth, seed)?];
            let mut prepared: BTreeMap<&str, PreparedLikelihood> = BTreeMap::new();
            let mut fits: BTreeMap<&str, Vec<MixtureModelParams>> = BTreeMap::new();
            for c in &comparisons {
                let h0_name = c.h0.as_deref().unwrap_or(BASELINE);
                for name in [c.hp.as_str(), h0_name] {
                    if !prepared.contains_key(name) {
                        prepared.insert(name, PreparedLikelihood::new(&hyps[name].model()?, &epg, freqs, &opts.engine)?);
                    }
                }
                if !fits.contains_key(h0_name) {
                    let fit = mle_prepared(&prepared[h0_name], &epg, &hyps[h0_name], None, opts)?;
                    fits.insert(h0_name, fit.params);
                }
                let params = &fits[h0_name];
                let rp = prepared[c.hp.as_str()].evaluate(params)?;
                let r0 = prepared[h0_name].evaluate(params)?;
                let report = compare((&c.hp, &rp, params), (h0_name, &r0, params), LrPolicy::SharedH0Mles)?;
                rows.push(StudyRow {
                    truth: truth.name.clone(),
                    typed: typed_label(set),
                    comparison: c.name.clone(),
                    genotype_replicate: g + 1,
                    epg_replicate: e + 1,
                    log10_lr: report.log10_lr,
                });
            }
        }
    }
    Ok(rows)
}

/// Run the full grid. `base` resolves relative paths in the config.
pub fn run_study(config: &StudyConfig, base: Option<&Path>, opts: &MleOptions) -> Result<StudyResult> {
    config.check()?;
    let freqs = config.database(base)?;
    let opts = MleOptions { starts: config.mle_starts, threshold: config.synth.threshold, ..opts.clone() };
    let tasks: Vec<(usize, usize)> =
        (0..config.truths.len()).flat_map(|t| (0..config.genotype_replicates).map(move |g| (t, g))).collect();
    let run = |&(t, g): &(usize, usize)| run_genotype_replicate(config, base, &freqs, t, g, &opts);
    #[cfg(feature = "parallel")]
    let chunks: Vec<Vec<StudyRow>> = {
        use rayon::prelude::*;
        tasks.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Vec<StudyRow>> = tasks.iter().map(run).collect::<Result<_>>()?;
    let rows: Vec<StudyRow> = chunks.into_iter().flatten().collect();

    let mut groups: Vec<((String, String, String), Vec<f64>)> = Vec::new();
    for r in &rows {
        let key = (r.truth.clone(), r.typed.clone(), r.comparison.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.log10_lr),
            None => groups.push((key, vec![r.log10_lr])),
        }
    }
    let medians = groups
        .into_iter()
        .map(|((truth, typed, comparison), v)| MedianRow { truth, typed, comparison, median_log10_lr: median(&v) })
        .collect();
    Ok(StudyResult { name: config.name.clone(), rows, medians })
}

/// Two contributors, 150 and 50 cells, five relationships each scored
/// against the unrelated baseline.
pub fn two_way_config(seed: u64) -> StudyConfig {
    let rels = [
        Relationship::ParentChild,
        Relationship::Sibs,
        Relationship::HalfSibs,
        Relationship::Cousins,
        Relationship::HalfCousins,
    ];
    let ab = vec!["A".to_string(), "B".to_string()];
    StudyConfig {
        name: "two-way".into(),
        seed,
        genotype_replicates: 4,
        epg_replicates: 4,
        freqs: None,
        synthetic_markers: None,
        synth: SynthParams::default(),
        truths: rels
            .iter()
            .map(|r| TruthSpec {
                name: r.name().into(),
                structure: StructureSpec { relationship: Some(*r), ..Default::default() },
                contributors: ab.clone(),
                cells: vec![150.0, 50.0],
            })
            .collect(),
        hypotheses: rels
            .iter()
            .map(|r| HypothesisSpec {
                name: r.name().into(),
                structure: StructureSpec { relationship: Some(*r), ..Default::default() },
                contributors: ab.clone(),
            })
            .collect(),
        comparisons: vec![],
        typed_sets: vec![vec![]],
        mle_starts: 2,
    }
}

/// Four brothers, three in the mixture with 200, 100 and 50 cells; the
/// fourth typed or not.
pub fn four_sibs_config(seed: u64) -> StudyConfig {
    let ped = "F * * M\nM * * F\nB1 F M M\nB2 F M M\nB3 F M M\nB4 F M M\n";
    let bs: Vec<String> = ["B1", "B2", "B3"].iter().map(|s| s.to_string()).collect();
    let structure = StructureSpec { pedigree_text: Some(ped.into()), ..Default::default() };
    StudyConfig {
        name: "four-sibs".into(),
        seed,
        genotype_replicates: 4,
        epg_replicates: 4,
        freqs: None,
        synthetic_markers: None,
        synth: SynthParams::default(),
        truths: vec![TruthSpec {
            name: "3 sibs".into(),
            structure: structure.clone(),
            contributors: bs.clone(),
            cells: vec![200.0, 100.0, 50.0],
        }],
        hypotheses: vec![HypothesisSpec { name: "3 sibs".into(), structure, contributors: bs }],
        comparisons: vec![],
        typed_sets: vec![vec![], vec!["B4".into()]],
        mle_starts: 2,
    }
}

const GF_INCEST: &str = "GF * * M\nGM * * F\nM GF GM F\nC GF M F\n";
const GF_NO_INCEST: &str = "GF * * M\nGM * * F\nM GF GM F\nF * * M\nC F M F\n";

/// Child (200 cells) and maternal grandfather (100 cells) in the mixture,
/// the grandfather also being the child's father. Tests rape and incest in
/// both directions for each set of typed actors.
pub fn incest_rape_config(seed: u64) -> StudyConfig {
    let incest = StructureSpec { pedigree_text: Some(GF_INCEST.into()), ..Default::default() };
    let no_incest = StructureSpec { pedigree_text: Some(GF_NO_INCEST.into()), ..Default::default() };
    let h = |name: &str, s: &StructureSpec, second: &str| HypothesisSpec {
        name: name.into(),
        structure: s.clone(),
        contributors: vec!["C".into(), second.into()],
    };
    let cmp = |name: &str, hp: &str, h0: &str| ComparisonSpec { name: name.into(), hp: hp.into(), h0: Some(h0.into()) };
    StudyConfig {
        name: "incest-rape".into(),
        seed,
        genotype_replicates: 4,
        epg_replicates: 4,
        freqs: None,
        synthetic_markers: None,
        synth: SynthParams::default(),
        truths: vec![TruthSpec {
            name: "incest and rape".into(),
            structure: incest.clone(),
            contributors: vec!["C".into(), "GF".into()],
            cells: vec![200.0, 100.0],
        }],
        hypotheses: vec![
            h("incest, rape", &incest, "GF"),
            h("incest, no rape", &incest, "U"),
            h("no incest, rape", &no_incest, "GF"),
            h("no incest, no rape", &no_incest, "U"),
        ],
        comparisons: vec![
            cmp("rape assuming incest", "incest, rape", "incest, no rape"),
            cmp("incest assuming rape", "incest, rape", "no incest, rape"),
            cmp("rape assuming no incest", "no incest, rape", "no incest, no rape"),
            cmp("incest assuming no rape", "incest, no rape", "no incest, no rape"),
        ],
        typed_sets: vec![vec!["M".into(), "C".into()], vec!["M".into()], vec!["C".into()], vec![]],
        mle_starts: 2,
    }
}
