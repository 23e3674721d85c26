//! Browser bindings: IBD tables, pairwise coefficients and a likelihood
//! explorer over named relationships.

use std::collections::BTreeMap;

use pedmix::alleles::AlleleFrequencyTable;
use pedmix::engine::{likelihood, EngineOptions, MixtureModel};
use pedmix::genotype::simulate_profiles_seeded;
use pedmix::hypothesis::Relationship;
use pedmix::ibd::{condensed_coefficients, pattern_distribution, IbdOptions, IbdPatternDistribution};
use pedmix::peakmodel::{EpgData, MixtureModelParams};
use pedmix::pedigree::Pedigree;
use pedmix::simstudy::{synthesize_epg, synthetic_database, SynthParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

type Result<T> = std::result::Result<T, String>;

fn err(e: pedmix::Error) -> String {
    e.to_string()
}

fn split_ids(text: &str) -> Vec<String> {
    text.split([',', ' ']).map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// IBD pattern table of `targets` (comma separated) in a pedigree, as CSV.
pub fn ibd_csv(ped_text: &str, targets: &str) -> Result<String> {
    let ped = Pedigree::parse(ped_text).map_err(err)?;
    let d = pattern_distribution(&ped, &split_ids(targets), &IbdOptions::default()).map_err(err)?;
    Ok(d.to_csv_string())
}

#[derive(Serialize)]
struct Coefficients {
    delta: Vec<String>,
    kappa: Option<[f64; 3]>,
    kinship: f64,
}

fn coefficients(d: &IbdPatternDistribution) -> Result<Coefficients> {
    let exact = condensed_coefficients(d).map_err(err)?;
    let v: Vec<f64> = exact.iter().map(|x| x.to_f64()).collect();
    Ok(Coefficients {
        delta: exact.iter().map(|x| x.to_string()).collect(),
        kappa: v[..6].iter().all(|x| *x == 0.0).then(|| [v[8], v[7], v[6]]),
        kinship: v[0] + (v[2] + v[4] + v[6]) / 2.0 + v[7] / 4.0,
    })
}

/// Jacquard and kappa coefficients of two pedigree members, as JSON.
pub fn kappa_json(ped_text: &str, a: &str, b: &str) -> Result<String> {
    let ped = Pedigree::parse(ped_text).map_err(err)?;
    let d = pattern_distribution(&ped, &[a.trim().to_string(), b.trim().to_string()], &IbdOptions::default())
        .map_err(err)?;
    serde_json::to_string(&coefficients(&d)?).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Example {
    freqs: String,
    epg: String,
}

/// A two-person mixture of relatives in `relationship`, on a synthetic
/// database, as `{freqs, epg}` CSV strings.
pub fn example_json(relationship: &str, cells_a: f64, cells_b: f64, markers: usize, seed: u64) -> Result<String> {
    let rel: Relationship = relationship.parse().map_err(err)?;
    let freqs = synthetic_database(markers.clamp(1, 30), seed);
    let dist = rel.distribution("A", "B").map_err(err)?;
    let p = simulate_profiles_seeded(&dist, &freqs, seed).map_err(err)?;
    let epg = synthesize_epg(&[&p["A"], &p["B"]], &[cells_a, cells_b], &freqs, &SynthParams::default(), seed)
        .map_err(err)?;
    let (mut f, mut e) = (Vec::new(), Vec::new());
    freqs.write_csv(&mut f).map_err(err)?;
    epg.write_csv(&mut e).map_err(err)?;
    let text = |v: Vec<u8>| String::from_utf8(v).map_err(|e| e.to_string());
    serde_json::to_string(&Example { freqs: text(f)?, epg: text(e)? }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Row {
    relationship: &'static str,
    log10_lr: f64,
    markers: Vec<(String, f64)>,
}

/// log10 likelihood ratio of every named relationship between the two
/// contributors against unrelated contributors, at fixed parameters.
/// Impossible relationships come back as null.
pub fn explore_json(freqs_csv: &str, epg_csv: &str, rho: f64, xi: f64, eta: f64, phi_a: f64) -> Result<String> {
    let freqs = AlleleFrequencyTable::read_csv(freqs_csv.as_bytes()).map_err(err)?;
    let epg = EpgData::read_csv(epg_csv.as_bytes()).map_err(err)?;
    let params = MixtureModelParams::new(rho, xi, eta, vec![phi_a, 1.0 - phi_a], 50.0).map_err(err)?;
    let ids = vec!["A".to_string(), "B".to_string()];
    let opts = EngineOptions { parallel: false, ..EngineOptions::default() };
    let run = |dist: IbdPatternDistribution| {
        let model = MixtureModel::new(ids.clone(), dist, BTreeMap::new())?;
        likelihood(&model, std::slice::from_ref(&epg), &freqs, std::slice::from_ref(&params), &opts)
    };
    let base = run(IbdPatternDistribution::unrelated(ids.clone()).map_err(err)?).map_err(err)?;
    let mut rows = Vec::new();
    for rel in Relationship::ALL {
        let r = run(rel.distribution("A", "B").map_err(err)?).map_err(err)?;
        let markers = r
            .markers
            .iter()
            .zip(&base.markers)
            .map(|(m, b)| (m.marker.clone(), (m.log_lik - b.log_lik) / std::f64::consts::LN_10))
            .collect();
        rows.push(Row { relationship: rel.name(), log10_lr: (r.total - base.total) / std::f64::consts::LN_10, markers });
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = ibdTable)]
pub fn ibd_table(ped_text: &str, targets: &str) -> std::result::Result<String, JsError> {
    ibd_csv(ped_text, targets).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pairCoefficients)]
pub fn pair_coefficients(ped_text: &str, a: &str, b: &str) -> std::result::Result<String, JsError> {
    kappa_json(ped_text, a, b).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = exampleMixture)]
pub fn example_mixture(
    relationship: &str,
    cells_a: f64,
    cells_b: f64,
    markers: usize,
    seed: u32,
) -> std::result::Result<String, JsError> {
    example_json(relationship, cells_a, cells_b, markers, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = exploreRelationships)]
pub fn explore_relationships(
    freqs_csv: &str,
    epg_csv: &str,
    rho: f64,
    xi: f64,
    eta: f64,
    phi_a: f64,
) -> std::result::Result<String, JsError> {
    explore_json(freqs_csv, epg_csv, rho, xi, eta, phi_a).map_err(|e| JsError::new(&e))
}
