//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use pedmix::alleles::{Allele, AlleleFrequencyTable, Genotype, GenotypeProfile, MarkerFrequencies};
use pedmix::coancestry::likelihood_with_coancestry;
use pedmix::dyadic::Dyadic;
use pedmix::engine::{brute_force_likelihood, likelihood, EngineOptions, MixtureModel};
use pedmix::genotype::{condition_on_typed, simulate_profiles, simulate_profiles_seeded, Gene};
use pedmix::hypothesis::{Hypothesis, Relatedness, Relationship, Slot};
use pedmix::ibd::{condensed_coefficients, count_states, pattern_distribution, IbdOptions, IbdPatternDistribution};
use pedmix::inference::{lr, mle, LrPolicy, MleOptions};
use pedmix::peakmodel::{marker_loglik, simulate_marker, EpgData, MixtureModelParams};
use pedmix::pedigree::{pairwise_coefficients, Pedigree};
use pedmix::simstudy::{incest_rape_config, run_study, synthesize_epg, synthetic_database, two_way_config, SynthParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn ped_file(name: &str) -> Pedigree {
    let text = std::fs::read_to_string(format!("{}/../../data/{name}.ped", env!("CARGO_MANIFEST_DIR"))).unwrap();
    Pedigree::parse(&text).unwrap()
}

fn frac(num: u32, log2_den: u32) -> f64 {
    num as f64 / (1u64 << log2_den) as f64
}

// ---------------------------------------------------------------- 1

fn golden_table(name: &str, ped: &Pedigree, targets: &[&str], rows: &[(f64, &[u32])]) -> Result<Duration, String> {
    let t = Instant::now();
    let d = pattern_distribution(ped, &s(targets), &IbdOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(d.len() == rows.len(), || format!("{name}: {} rows, expected {}", d.len(), rows.len()))?;
    for (p, raw) in rows {
        let got = d.probability_of(raw).map_err(|e| e.to_string())?;
        ensure((got - p).abs() < 1e-12, || format!("{name} {raw:?}: {got} vs {p}"))?;
    }
    ensure(d.exact_total() == Some(Dyadic::one()), || format!("{name}: total is not exactly one"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("{name}: took {elapsed:?}"))?;
    Ok(elapsed)
}

fn criterion_1() -> Check {
    let trio = ped_file("trio");
    let extended = Pedigree::parse("GF * * M\nGM * * F\nF GF GM M\nM * * F\nC F M M\n").unwrap();
    let mut slowest = Duration::ZERO;
    let tables: Vec<(&str, Pedigree, Vec<&str>, Vec<(f64, &[u32])>)> = vec![
        ("trio", trio, vec!["F", "M", "C"], vec![(1.0, &[1, 2, 3, 4, 1, 3])]),
        (
            "trio with grandfather",
            extended,
            vec!["F", "M", "C", "GF"],
            vec![(0.5, &[1, 2, 3, 4, 1, 3, 1, 5]), (0.5, &[1, 2, 3, 4, 1, 3, 2, 5])],
        ),
        (
            "star cousins",
            ped_file("cousins_star"),
            vec!["C1", "C2", "C3"],
            vec![
                (frac(3, 3), &[1, 2, 3, 4, 5, 6]),
                (frac(3, 4), &[1, 2, 1, 3, 4, 5]),
                (frac(3, 4), &[1, 2, 3, 4, 1, 5]),
                (frac(3, 4), &[1, 2, 3, 4, 3, 5]),
                (frac(1, 4), &[1, 2, 1, 3, 1, 4]),
            ],
        ),
        (
            "cyclic cousins",
            ped_file("cousins_cyclic"),
            vec!["C1", "C2", "C3"],
            vec![
                (frac(27, 6), &[1, 2, 3, 4, 5, 6]),
                (frac(9, 6), &[1, 2, 1, 3, 4, 5]),
                (frac(9, 6), &[1, 2, 3, 4, 1, 5]),
                (frac(9, 6), &[1, 2, 3, 4, 3, 5]),
                (frac(3, 6), &[1, 2, 1, 3, 2, 4]),
                (frac(3, 6), &[1, 2, 1, 3, 3, 4]),
                (frac(3, 6), &[1, 2, 3, 4, 1, 3]),
                (frac(1, 6), &[1, 2, 1, 3, 2, 3]),
            ],
        ),
        (
            "brother-sister parents",
            ped_file("sib_incest"),
            vec!["F", "M", "C"],
            vec![
                (0.125, &[1, 2, 1, 2, 1, 1]),
                (0.125, &[1, 2, 1, 2, 1, 2]),
                (0.125, &[1, 2, 1, 3, 1, 1]),
                (0.125, &[1, 2, 1, 3, 1, 2]),
                (0.125, &[1, 2, 1, 3, 1, 3]),
                (0.125, &[1, 2, 1, 3, 2, 3]),
                (0.25, &[1, 2, 3, 4, 1, 3]),
            ],
        ),
        (
            "grandfather is father",
            ped_file("gf_incest"),
            vec!["GF", "M", "C"],
            vec![
                (0.25, &[1, 2, 1, 3, 1, 1]),
                (0.25, &[1, 2, 1, 3, 1, 2]),
                (0.25, &[1, 2, 1, 3, 1, 3]),
                (0.25, &[1, 2, 1, 3, 2, 3]),
            ],
        ),
    ];
    for (name, ped, targets, rows) in &tables {
        slowest = slowest.max(golden_table(name, ped, targets, rows)?);
    }
    Ok(format!("6 tables exact, slowest {:.3} s", slowest.as_secs_f64()))
}

// ---------------------------------------------------------------- 2

fn criterion_2() -> Check {
    let want = [
        (Relationship::ParentChild, [0.0, 1.0, 0.0]),
        (Relationship::Sibs, [0.25, 0.5, 0.25]),
        (Relationship::HalfSibs, [0.5, 0.5, 0.0]),
        (Relationship::Cousins, [0.75, 0.25, 0.0]),
        (Relationship::HalfCousins, [0.875, 0.125, 0.0]),
    ];
    for (rel, kappa) in want {
        let ped = rel.pedigree("A", "B").unwrap();
        let c = pairwise_coefficients(&ped, "A", "B").map_err(|e| e.to_string())?;
        ensure(c.kappa == Some(kappa), || format!("{rel}: {:?}", c.kappa))?;
    }
    let fam = Pedigree::parse("GF * *\nGM * *\nF GF GM\nM GF GM\nS1 F M\nS2 F M\n").unwrap();
    let delta = pairwise_coefficients(&fam, "S1", "S2").map_err(|e| e.to_string())?.delta_exact;
    let nine: Vec<Dyadic> = [(2u32, 5u32), (1, 5), (4, 5), (1, 5), (4, 5), (1, 5), (7, 5), (10, 5), (2, 5)]
        .iter()
        .map(|&(n, k)| Dyadic::new(n, k))
        .collect();
    ensure(delta == nine, || format!("brother-sister offspring delta {delta:?}"))?;

    let t = Instant::now();
    let caesars = ped_file("caesars");
    ensure(caesars.len() == 35, || format!("{} members", caesars.len()))?;
    let ids = s(&["Germanicus", "AgrippinaMaior"]);
    let d = pattern_distribution(&caesars, &ids, &IbdOptions::default()).map_err(|e| e.to_string())?;
    let delta = condensed_coefficients(&d).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(d.is_exact(), || "Caesars distribution not exact".into())?;
    ensure(delta[8] == Dyadic::new(15u32, 4) && delta[7] == Dyadic::new(1u32, 4), || {
        format!("Germanicus-Agrippina kappa0 {} kappa1 {}", delta[8], delta[7])
    })?;
    ensure(delta[..7].iter().all(|x| *x == Dyadic::zero()), || "unexpected inbreeding terms".into())?;
    ensure(elapsed < Duration::from_secs(60), || format!("Caesars took {elapsed:?}"))?;
    Ok(format!("5 kappa vectors, delta exact, Caesars kappa (15/16, 1/16) in {:.3} s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Check {
    let got = [
        count_states(2, true).map_err(|e| e.to_string())?,
        count_states(4, true).map_err(|e| e.to_string())?,
        count_states(4, false).map_err(|e| e.to_string())?,
    ];
    ensure(got == [9, 712, 139], || format!("{got:?}"))?;
    Ok("9, 712, 139".into())
}

// ---------------------------------------------------------------- 4

fn al(r: i32) -> Allele {
    Allele::new(r, 0)
}

fn marker(freqs: &[f64]) -> MarkerFrequencies {
    MarkerFrequencies {
        name: "M".into(),
        alleles: (0..freqs.len() as i32).map(|i| al(10 + i)).collect(),
        freqs: freqs.to_vec(),
    }
}

fn gmap(v: &[(&str, Genotype)]) -> BTreeMap<String, Genotype> {
    v.iter().map(|(id, g)| (id.to_string(), *g)).collect()
}

fn all_genotypes(m: &MarkerFrequencies) -> Vec<Genotype> {
    let mut v = Vec::new();
    for i in 0..m.alleles.len() {
        for j in i..m.alleles.len() {
            v.push(Genotype::new(m.alleles[i], m.alleles[j]));
        }
    }
    v
}

/// Assign every allele to every label of every pattern and sum the
/// probabilities of assignments producing the given genotypes.
fn enumerate(dist: &IbdPatternDistribution, m: &MarkerFrequencies, g: &BTreeMap<String, Genotype>) -> f64 {
    let cols: Vec<usize> = g.keys().map(|id| dist.position(id).unwrap()).collect();
    let na = m.alleles.len();
    let mut total = 0.0;
    for e in dist.entries() {
        let nl = e.pattern.distinct_labels();
        let mut code = vec![0usize; nl];
        loop {
            let hit = cols.iter().zip(g.values()).all(|(&c, want)| {
                let (l0, l1) = e.pattern.pair(c);
                Genotype::new(m.alleles[code[l0 as usize - 1]], m.alleles[code[l1 as usize - 1]]) == *want
            });
            if hit {
                total += e.prob * code.iter().map(|&i| m.freqs[i]).product::<f64>();
            }
            let mut k = 0;
            while k < nl {
                code[k] += 1;
                if code[k] < na {
                    break;
                }
                code[k] = 0;
                k += 1;
            }
            if k == nl {
                break;
            }
        }
    }
    total
}

fn criterion_4() -> Check {
    let (qa, qb, qc) = (0.1, 0.2, 0.3);
    let m = marker(&[qa, qb, qc, 0.4]);
    let (a, b, c) = (al(10), al(11), al(12));
    let family = pattern_distribution(
        &Pedigree::parse("GF * *\nGM * *\nF GF GM\nM * *\nC F M\n").unwrap(),
        &s(&["F", "M", "C", "GF"]),
        &IbdOptions::default(),
    )
    .unwrap();

    // grandfather example: C=(a,b), GF=(b,c)
    let typed = gmap(&[("C", Genotype::new(a, b)), ("GF", Genotype::new(b, c))]);
    let t = condition_on_typed(&family, &m, &s(&["F", "M"]), &typed).map_err(|e| e.to_string())?;
    use Gene::*;
    let mut expected: Vec<([Gene; 2], [Gene; 2], f64)> = vec![([Fixed(b), Draw(0)], [Fixed(a), Draw(1)], qa * qb * qc)];
    for (f, mo) in [
        ([Fixed(a), Fixed(b)], [Fixed(b), Draw(0)]),
        ([Fixed(b), Fixed(b)], [Fixed(a), Draw(0)]),
        ([Fixed(a), Fixed(c)], [Fixed(b), Draw(0)]),
        ([Fixed(b), Fixed(c)], [Fixed(a), Draw(0)]),
    ] {
        expected.push((f, mo, qa * qb * qb * qc));
    }
    ensure(t.len() == expected.len(), || format!("{} surviving rows", t.len()))?;
    for (f, mo, w) in &expected {
        let row = t.rows.iter().find(|r| r.genes == vec![*f, *mo]).ok_or_else(|| format!("missing row {f:?} {mo:?}"))?;
        ensure((row.raw_weight - 0.125 * w).abs() < 1e-15, || format!("row {f:?} {mo:?}: {}", row.raw_weight))?;
    }

    // paternity example: M=(a,b), C=(b,c)
    let trio = IbdPatternDistribution::from_raw(s(&["F", "M", "C"]), &[(1.0, vec![1, 2, 3, 4, 1, 3])]).unwrap();
    let typed = gmap(&[("M", Genotype::new(a, b)), ("C", Genotype::new(b, c))]);
    let t = condition_on_typed(&trio, &m, &s(&["F"]), &typed).map_err(|e| e.to_string())?;
    ensure(t.len() == 1, || format!("paternity: {} rows", t.len()))?;
    ensure((t.rows[0].raw_weight - 0.25 * qa * qb * qc).abs() < 1e-15, || "paternity weight".into())?;
    ensure(t.rows[0].genes == vec![[Fixed(c), Draw(0)]], || format!("paternity genes {:?}", t.rows[0].genes))?;

    // Bayes consistency, exhaustively
    let mut checked = 0usize;
    for freqs in [vec![0.35, 0.65], vec![0.2, 0.3, 0.5], vec![0.1, 0.2, 0.3, 0.4]] {
        let m = marker(&freqs);
        let gs = all_genotypes(&m);
        let mut typed_sets: Vec<BTreeMap<String, Genotype>> = Vec::new();
        for g in &gs {
            typed_sets.push(gmap(&[("C", *g)]));
            typed_sets.push(gmap(&[("GF", *g)]));
            for h in &gs {
                typed_sets.push(gmap(&[("C", *g), ("GF", *h)]));
            }
        }
        for typed in typed_sets {
            let ids: Vec<String> = typed.keys().cloned().collect();
            let pt = enumerate(&family.marginalize(&ids).unwrap(), &m, &typed);
            let t = condition_on_typed(&family, &m, &s(&["F", "M"]), &typed);
            if pt == 0.0 {
                ensure(t.map(|t| t.p_typed == 0.0).unwrap_or(true), || format!("{typed:?} should be impossible"))?;
                continue;
            }
            let t = t.map_err(|e| e.to_string())?;
            ensure((t.p_typed - pt).abs() < 1e-12, || format!("{typed:?}: p_typed {} vs {pt}", t.p_typed))?;
            for f in &gs {
                for mo in &gs {
                    let mut all = typed.clone();
                    all.insert("F".into(), *f);
                    all.insert("M".into(), *mo);
                    let want = enumerate(&family, &m, &all) / pt;
                    let got = t.genotype_probability(&m, &[*f, *mo]);
                    ensure((got - want).abs() < 1e-12, || format!("{typed:?} F={f} M={mo}: {got} vs {want}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("worked examples match; {checked} conditional probabilities agree"))
}

// ---------------------------------------------------------------- 5

const FAMILY: &str = "GF * * M\nGM * * F\nF GF GM M\nM * * F\nA F M M\nB F M F\nC F M M\nD F B M\nX * * M\n";

fn random_freqs(rng: &mut ChaCha8Rng, markers: usize, max_alleles: usize) -> AlleleFrequencyTable {
    let mut rows = Vec::new();
    for m in 0..markers {
        let n = rng.random_range(2..=max_alleles as i32);
        let start = rng.random_range(8..12);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        for (k, w) in w.iter().enumerate() {
            rows.push((format!("M{m}"), Allele::new(start + k as i32, 0), w / total));
        }
    }
    AlleleFrequencyTable::from_rows(rows).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng, k: usize) -> MixtureModelParams {
    let mut phi: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = phi.iter().sum();
    phi.iter_mut().for_each(|p| *p /= total);
    MixtureModelParams::new(
        rng.random_range(0.5..25.0),
        rng.random_range(0.01..0.25),
        rng.random_range(15.0..60.0),
        phi,
        [20.0, 50.0, 80.0][rng.random_range(0..3)],
    )
    .unwrap()
}

fn simulate_epg(
    rng: &mut ChaCha8Rng,
    freqs: &AlleleFrequencyTable,
    contributors: &[String],
    truth: &BTreeMap<String, GenotypeProfile>,
) -> EpgData {
    let sim = random_params(rng, contributors.len());
    let markers = freqs
        .markers()
        .iter()
        .map(|mf| {
            let g: Vec<Genotype> = contributors.iter().map(|c| truth[c].get(&mf.name).unwrap()).collect();
            simulate_marker(&mf.name, &g, &sim, rng)
        })
        .collect();
    EpgData::from_markers(markers)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * b.abs().max(1.0)
}

fn criterion_5() -> Check {
    let t = Instant::now();
    let ped = Pedigree::parse(FAMILY).unwrap();
    let pool = ["GF", "F", "A", "B", "C", "D", "X"];
    let opts = EngineOptions { parallel: false, ..EngineOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let mut censored = 0;
    for case in 0..200 {
        let nm = rng.random_range(1..=2);
        let freqs = random_freqs(&mut rng, nm, 5);
        let k = rng.random_range(1..=3);
        let mut people: Vec<String> = Vec::new();
        while people.len() < k + 1 {
            let p = pool[rng.random_range(0..pool.len())].to_string();
            if !people.contains(&p) {
                people.push(p);
            }
        }
        let contributors = people[..k].to_vec();
        let dist = pattern_distribution(&ped, &people, &IbdOptions::default()).unwrap();
        let truth = simulate_profiles(&dist, &freqs, &mut rng).unwrap();
        let model = if rng.random_bool(0.5) {
            let typed: BTreeMap<_, _> = [(people[k].clone(), truth[&people[k]].clone())].into();
            MixtureModel::new(contributors.clone(), dist, typed).unwrap()
        } else {
            MixtureModel::new(contributors.clone(), dist.marginalize(&contributors).unwrap(), BTreeMap::new()).unwrap()
        };
        let epg = simulate_epg(&mut rng, &freqs, &contributors, &truth);
        let params = random_params(&mut rng, k);
        if freqs.markers().iter().any(|mf| epg.marker(&mf.name).is_none_or(|m| m.peaks.len() < mf.alleles.len())) {
            censored += 1;
        }
        let fast = likelihood(&model, std::slice::from_ref(&epg), &freqs, std::slice::from_ref(&params), &opts).map_err(|e| e.to_string())?;
        let slow = brute_force_likelihood(&model, &[epg], &freqs, &[params], &opts).map_err(|e| e.to_string())?;
        ensure(close(fast.total, slow.total, 1e-10), || format!("case {case}: {} vs {}", fast.total, slow.total))?;
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("200 instances ({censored} with censored alleles) within 1e-10, {:.2} s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------- 6

fn ln_dm(x: &[u32], alpha: &[f64]) -> f64 {
    let n: u32 = x.iter().sum();
    let a: f64 = alpha.iter().sum();
    let mut l = ln_gamma(n as f64 + 1.0) + ln_gamma(a) - ln_gamma(a + n as f64);
    for (&k, &al) in x.iter().zip(alpha) {
        l += ln_gamma(al + k as f64) - ln_gamma(al) - ln_gamma(k as f64 + 1.0);
    }
    l
}

fn counts(g: Genotype, alleles: &[Allele]) -> Vec<u32> {
    alleles.iter().map(|a| g.count(*a) as u32).collect()
}

fn criterion_6() -> Check {
    let theta = 0.03;
    let opts = EngineOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    for case in 0..40 {
        let freqs = random_freqs(&mut rng, 1, 4);
        let mf = &freqs.markers()[0];
        let ids = s(&["K", "U"]);
        let truth = simulate_profiles(&IbdPatternDistribution::unrelated(ids.clone()).unwrap(), &freqs, &mut rng).unwrap();
        let epg = simulate_epg(&mut rng, &freqs, &ids, &truth);
        let params = random_params(&mut rng, 2);
        let known = case % 2 == 1;
        let typed: BTreeMap<_, _> =
            if known { [("K".to_string(), truth["K"].clone())].into() } else { BTreeMap::new() };
        let model = MixtureModel::unrelated(ids.clone(), typed).unwrap();

        let plain = likelihood(&model, std::slice::from_ref(&epg), &freqs, std::slice::from_ref(&params), &opts).map_err(|e| e.to_string())?;
        let zero = likelihood_with_coancestry(&model, std::slice::from_ref(&epg), &freqs, std::slice::from_ref(&params), 0.0, &opts)
            .map_err(|e| e.to_string())?;
        ensure(plain.total == zero.total, || format!("case {case}: theta 0 gives {} vs {}", zero.total, plain.total))?;

        let alpha: Vec<f64> = mf.freqs.iter().map(|q| q * (1.0 - theta) / theta).collect();
        let gs = all_genotypes(mf);
        let firsts: Vec<Genotype> = if known { vec![truth["K"].get(&mf.name).unwrap()] } else { gs.clone() };
        let me = epg.marker(&mf.name).cloned().unwrap_or_else(|| pedmix::peakmodel::MarkerEpg {
            name: mf.name.clone(),
            peaks: vec![],
        });
        let mut want = 0.0;
        for g1 in &firsts {
            let c1 = counts(*g1, &mf.alleles);
            let p1 = if known { 1.0 } else { ln_dm(&c1, &alpha).exp() };
            let shifted: Vec<f64> = alpha.iter().zip(&c1).map(|(a, c)| a + *c as f64).collect();
            for g2 in &gs {
                let p2 = ln_dm(&counts(*g2, &mf.alleles), &shifted).exp();
                want += p1 * p2 * marker_loglik(&me, &[*g1, *g2], &params).unwrap().exp();
            }
        }
        let got = likelihood_with_coancestry(&model, std::slice::from_ref(&epg), &freqs, std::slice::from_ref(&params), theta, &opts)
            .map_err(|e| e.to_string())?;
        ensure(close(got.total, want.ln(), 1e-10), || format!("case {case}: {} vs {}", got.total, want.ln()))?;

        let swapped = MixtureModel::unrelated(s(&["U", "K"]), model.typed.clone()).unwrap();
        let p = MixtureModelParams::new(params.rho, params.xi, params.eta, vec![params.phi[1], params.phi[0]], params.threshold)
            .unwrap();
        let other = likelihood_with_coancestry(&swapped, &[epg], &freqs, &[p], theta, &opts).map_err(|e| e.to_string())?;
        ensure(other.total == got.total, || format!("case {case}: reordering gives {} vs {}", other.total, got.total))?;
    }
    Ok("40 instances: theta 0 identical, theta 0.03 within 1e-10, reordering exact".into())
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Check {
    let mut good = 0;
    let mut slowest = Duration::ZERO;
    let mut worst = String::new();
    for seed in 1..=10u64 {
        let freqs = synthetic_database(20, 700 + seed);
        let ids = s(&["A", "B"]);
        let profiles = simulate_profiles_seeded(&IbdPatternDistribution::unrelated(ids).unwrap(), &freqs, seed).unwrap();
        let synth = SynthParams::default();
        let epg = synthesize_epg(&[&profiles["A"], &profiles["B"]], &[150.0, 50.0], &freqs, &synth, seed).unwrap();
        let h = Hypothesis::unrelated("H0", &["U1", "U2"], BTreeMap::new()).unwrap();
        let t = Instant::now();
        let fit = mle(&[epg], &h, &freqs, None, &MleOptions::default()).map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        let p = &fit.params[0];
        let mut phi = p.phi.clone();
        phi.sort_by(|a, b| b.total_cmp(a));
        let ok = (phi[0] - 0.75).abs() <= 0.05 && (phi[1] - 0.25).abs() <= 0.05 && (p.xi - synth.xi).abs() <= 0.02;
        if ok {
            good += 1;
        } else {
            worst = format!(" (miss: seed {seed} phi {:.3}/{:.3} xi {:.3})", phi[0], phi[1], p.xi);
        }
    }
    ensure(good >= 8, || format!("{good}/10 seeds recovered{worst}"))?;
    ensure(slowest < Duration::from_secs(60), || format!("slowest fit {slowest:?}"))?;
    Ok(format!("{good}/10 seeds recovered, slowest fit {:.2} s{worst}", slowest.as_secs_f64()))
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Check {
    let opts = MleOptions::default();

    // (a) parent-child truth row
    let mut diagonal = 0;
    for seed in 1..=10u64 {
        let mut c = two_way_config(seed);
        c.truths.retain(|t| t.name == "parent-child");
        let r = run_study(&c, None, &opts).map_err(|e| e.to_string())?;
        let best = r.medians.iter().max_by(|a, b| a.median_log10_lr.total_cmp(&b.median_log10_lr)).unwrap();
        if best.comparison == "parent-child" {
            diagonal += 1;
        }
    }
    ensure(diagonal >= 9, || format!("(a) parent-child row maximal on the diagonal in {diagonal}/10 seeds"))?;

    // (b) incest assuming no rape, child typed
    let mut c = incest_rape_config(5);
    c.comparisons.retain(|x| x.name == "incest assuming no rape");
    c.typed_sets.retain(|t| t.iter().any(|p| p == "C"));
    let r = run_study(&c, None, &opts).map_err(|e| e.to_string())?;
    ensure(!r.rows.is_empty() && r.rows.iter().all(|x| x.log10_lr == 0.0), || {
        format!("(b) non-zero rows: {:?}", r.rows.iter().filter(|x| x.log10_lr != 0.0).collect::<Vec<_>>())
    })?;
    let zeros = r.rows.len();

    // (c) twins against a mixture with too many alleles
    let freqs = synthetic_database(10, 808);
    let ids = s(&["A", "B"]);
    let profiles = simulate_profiles_seeded(&IbdPatternDistribution::unrelated(ids).unwrap(), &freqs, 8).unwrap();
    let epg =
        synthesize_epg(&[&profiles["A"], &profiles["B"]], &[120.0, 100.0], &freqs, &SynthParams::default(), 8).unwrap();
    let twins = Hypothesis::pairwise("mz-twins", Relationship::MzTwins, "A", "B").unwrap();
    let h0 = Hypothesis::unrelated("unrelated", &["A", "B"], BTreeMap::new()).unwrap();
    let rep = lr(&[epg], &twins, &h0, &freqs, LrPolicy::SharedH0Mles, None, &opts).map_err(|e| e.to_string())?;
    let json = serde_json::to_string(&rep).unwrap();
    ensure(rep.log10_lr == f64::NEG_INFINITY && json.contains("\"-inf\""), || {
        format!("(c) twins log10 LR {}", rep.log10_lr)
    })?;
    Ok(format!("(a) {diagonal}/10 seeds; (b) {zeros} replicates exactly 0; (c) twins give -inf"))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Check {
    let freqs = synthetic_database(20, 909);
    let ids = s(&["K", "S", "U"]);
    let sibs = Relationship::Sibs.distribution("K", "S").unwrap().with_unrelated(&s(&["U"])).unwrap();
    let truth = simulate_profiles_seeded(&sibs, &freqs, 9).unwrap();
    let epg = synthesize_epg(&[&truth["S"], &truth["U"]], &[150.0, 60.0], &freqs, &SynthParams::default(), 9).unwrap();
    let typed: BTreeMap<_, _> = [(ids[0].clone(), truth["K"].clone())].into();

    let t = Instant::now();
    let hp = Hypothesis::new(
        "sib of K",
        vec![Slot::Related("S".into()), Slot::Unrelated("U".into())],
        Relatedness::Distribution(Relationship::Sibs.distribution("K", "S").unwrap()),
        typed.clone(),
    )
    .map_err(|e| e.to_string())?;
    let h0 = Hypothesis::unrelated("unrelated", &["U1", "U2"], typed).map_err(|e| e.to_string())?;
    let opts = MleOptions { engine: EngineOptions { parallel: false, ..EngineOptions::default() }, ..MleOptions::default() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let rep = pool
        .install(|| lr(&[epg], &hp, &h0, &freqs, LrPolicy::SharedH0Mles, None, &opts))
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(rep.log10_lr.is_finite(), || format!("log10 LR {}", rep.log10_lr))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {:.2} s", elapsed.as_secs_f64()))?;
    Ok(format!("log10 LR {:.2} in {:.2} s on one thread", rep.log10_lr, elapsed.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("golden IBD tables", criterion_1),
        ("pairwise coefficients", criterion_2),
        ("state counts", criterion_3),
        ("conditioning on typed people", criterion_4),
        ("engine equals brute force", criterion_5),
        ("coancestry", criterion_6),
        ("MLE round trip", criterion_7),
        ("simulation study properties", criterion_8),
        ("performance", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
