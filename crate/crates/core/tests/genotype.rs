use std::collections::BTreeMap;

use pedmix::alleles::{Allele, AlleleFrequencyTable, Genotype, MarkerFrequencies};
use pedmix::genotype::{
    condition_on_typed, joint_genotype_probability, simulate_conditioned, simulate_profiles_seeded,
    simulate_profiles_with_patterns, Gene,
};
use pedmix::ibd::{jacquard_class, pattern_distribution, IbdOptions, IbdPatternDistribution};
use pedmix::pedigree::Pedigree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

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

fn s(v: &[&str]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn gmap(v: &[(&str, i32, i32)]) -> BTreeMap<String, Genotype> {
    v.iter().map(|&(id, a, b)| (id.to_string(), Genotype::new(al(a), al(b)))).collect()
}

/// Independent oracle: assign every allele to every distinct label of every
/// pattern and add up the probabilities of the matching genotype sets.
fn oracle(dist: &IbdPatternDistribution, m: &MarkerFrequencies, g: &BTreeMap<String, Genotype>) -> f64 {
    let cols: Vec<usize> = g.keys().map(|id| dist.position(id).unwrap()).collect();
    let na = m.alleles.len();
    let mut total = 0.0;
    for e in dist.entries() {
        let nl = e.pattern.distinct_labels();
        let mut code = vec![0usize; nl];
        loop {
            let matches = cols.iter().zip(g.values()).all(|(&c, want)| {
                let (l0, l1) = e.pattern.pair(c);
                Genotype::new(m.alleles[code[l0 as usize - 1]], m.alleles[code[l1 as usize - 1]]) == *want
            });
            if matches {
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

fn all_genotypes(m: &MarkerFrequencies) -> Vec<Genotype> {
    let mut v = Vec::new();
    for i in 0..m.alleles.len() {
        for j in i..m.alleles.len() {
            v.push(Genotype::new(m.alleles[i], m.alleles[j]));
        }
    }
    v
}

fn family() -> IbdPatternDistribution {
    let ped = Pedigree::parse("GF * *\nGM * *\nF GF GM\nM * *\nC F M\n").unwrap();
    pattern_distribution(&ped, &s(&["F", "M", "C", "GF"]), &IbdOptions::default()).unwrap()
}

fn sib_incest() -> IbdPatternDistribution {
    let ped = Pedigree::parse("GF * *\nGM * *\nF GF GM\nM GF GM\nC F M\n").unwrap();
    pattern_distribution(&ped, &s(&["F", "M", "C"]), &IbdOptions::default()).unwrap()
}

#[test]
fn kappa_formula_for_two_people() {
    let m = marker(&[0.1, 0.2, 0.3, 0.4]);
    let (qa, qb, qc) = (0.1, 0.2, 0.3);
    for (k0, k1, k2) in [(0.25, 0.5, 0.25), (0.5, 0.5, 0.0), (1.0, 0.0, 0.0)] {
        let d = IbdPatternDistribution::from_raw(
            s(&["X", "Y"]),
            &[(k0, vec![1, 2, 3, 4]), (k1, vec![1, 2, 1, 3]), (k2, vec![1, 2, 1, 2])],
        )
        .unwrap();
        let p = joint_genotype_probability(&d, &m, &gmap(&[("X", 10, 11), ("Y", 10, 12)])).unwrap();
        let want = k0 * 4.0 * qa * qa * qb * qc + k1 * qa * qb * qc;
        assert!((p - want).abs() < 1e-15, "{p} {want}");
    }
}

#[test]
fn incest_trio_matches_oracle() {
    let d = sib_incest();
    let m = marker(&[0.1, 0.2, 0.3, 0.4]);
    for g in [
        gmap(&[("F", 10, 11), ("M", 10, 12), ("C", 10, 10)]),
        gmap(&[("F", 10, 11), ("M", 10, 11), ("C", 10, 11)]),
        gmap(&[("F", 12, 13), ("M", 10, 11), ("C", 11, 13)]),
    ] {
        let p = joint_genotype_probability(&d, &m, &g).unwrap();
        assert!((p - oracle(&d, &m, &g)).abs() < 1e-15);
    }
}

#[test]
fn joint_probabilities_sum_to_one() {
    let d = sib_incest();
    let m = marker(&[0.1, 0.2, 0.3, 0.4]);
    let gs = all_genotypes(&m);
    let mut total = 0.0;
    for a in &gs {
        for b in &gs {
            for c in &gs {
                let g: BTreeMap<String, Genotype> =
                    [("F", a), ("M", b), ("C", c)].iter().map(|(k, v)| (k.to_string(), **v)).collect();
                total += joint_genotype_probability(&d, &m, &g).unwrap();
            }
        }
    }
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn grandparent_worked_example() {
    // typed C=(a,b), GF=(b,c); contributors F and M
    let (qa, qb, qc) = (0.1, 0.2, 0.3);
    let m = marker(&[qa, qb, qc, 0.4]);
    let typed = gmap(&[("C", 10, 11), ("GF", 11, 12)]);
    let t = condition_on_typed(&family(), &m, &s(&["F", "M"]), &typed).unwrap();
    // five orders survive; each has a distinct contributor configuration
    assert_eq!(t.len(), 5);
    let find = |f: [Gene; 2], mo: [Gene; 2]| t.rows.iter().find(|r| r.genes == vec![f, mo]).unwrap().raw_weight;
    use Gene::*;
    let w = find([Fixed(al(11)), Draw(0)], [Fixed(al(10)), Draw(1)]);
    assert!((w - 0.125 * qa * qb * qc).abs() < 1e-15);
    for (f, mo) in [
        ([Fixed(al(10)), Fixed(al(11))], [Fixed(al(11)), Draw(0)]),
        ([Fixed(al(11)), Fixed(al(11))], [Fixed(al(10)), Draw(0)]),
        ([Fixed(al(10)), Fixed(al(12))], [Fixed(al(11)), Draw(0)]),
        ([Fixed(al(11)), Fixed(al(12))], [Fixed(al(10)), Draw(0)]),
    ] {
        assert!((find(f, mo) - 0.125 * qa * qb * qb * qc).abs() < 1e-15);
    }
    let total: f64 = t.rows.iter().map(|r| r.weight).sum();
    assert!((total - 1.0).abs() < 1e-15);
    let marginal = family().marginalize(&s(&["C", "GF"])).unwrap();
    assert!((t.p_typed - oracle(&marginal, &m, &typed)).abs() < 1e-15);
}

#[test]
fn paternity_example() {
    let (qa, qb, qc) = (0.1, 0.2, 0.3);
    let m = marker(&[qa, qb, qc, 0.4]);
    let trio = IbdPatternDistribution::from_raw(s(&["F", "M", "C"]), &[(1.0, vec![1, 2, 3, 4, 1, 3])]).unwrap();
    let t = condition_on_typed(&trio, &m, &s(&["F"]), &gmap(&[("M", 10, 11), ("C", 11, 12)])).unwrap();
    assert_eq!(t.len(), 1);
    assert!((t.rows[0].raw_weight - 0.25 * qa * qb * qc).abs() < 1e-15);
    assert_eq!(t.rows[0].genes, vec![[Gene::Fixed(al(12)), Gene::Draw(0)]]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let g = simulate_conditioned(&t, &m, &mut rng).unwrap();
        assert!(g["F"].count(al(12)) >= 1);
    }
}

#[test]
fn conditioning_obeys_bayes() {
    let d = family();
    let m = marker(&[0.15, 0.25, 0.6]);
    let gs = all_genotypes(&m);
    for typed in [gmap(&[("C", 10, 11)]), gmap(&[("C", 10, 11), ("GF", 11, 12)]), gmap(&[("GF", 12, 12)])] {
        let t = condition_on_typed(&d, &m, &s(&["F", "M"]), &typed).unwrap();
        let pt = oracle(&d.marginalize(&typed.keys().cloned().collect::<Vec<_>>()).unwrap(), &m, &typed);
        assert!((t.p_typed - pt).abs() < 1e-15);
        let mut total = 0.0;
        for f in &gs {
            for mo in &gs {
                let mut all = typed.clone();
                all.insert("F".into(), *f);
                all.insert("M".into(), *mo);
                let want = oracle(&d, &m, &all) / pt;
                let got = t.genotype_probability(&m, &[*f, *mo]);
                assert!((got - want).abs() < 1e-14, "{f} {mo}: {got} vs {want}");
                total += got;
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn repeated_contributor_labels_share_draws() {
    let d = IbdPatternDistribution::from_raw(s(&["A", "B"]), &[(1.0, vec![1, 2, 1, 2])]).unwrap();
    let t = condition_on_typed(&d, &marker(&[0.5, 0.5]), &s(&["A", "B"]), &BTreeMap::new()).unwrap();
    assert_eq!(t.ndraws, 2);
    assert_eq!(t.rows[0].genes, vec![[Gene::Draw(0), Gene::Draw(1)]; 2]);
}

#[test]
fn simulated_grandparent_genotype_frequencies() {
    // empirical P(F carries b) against the normalized table weights
    let (qa, qb, qc) = (0.1, 0.2, 0.3);
    let m = marker(&[qa, qb, qc, 0.4]);
    let b = al(11);
    let t = condition_on_typed(&family(), &m, &s(&["F", "M"]), &gmap(&[("C", 10, 11), ("GF", 11, 12)])).unwrap();
    let want: f64 = t
        .rows
        .iter()
        .map(|r| {
            let f = r.genes[0];
            let draws = f.iter().filter(|g| matches!(g, Gene::Draw(_))).count() as i32;
            let carry = if f.contains(&Gene::Fixed(b)) { 1.0 } else { 1.0 - (1.0 - qb).powi(draws) };
            r.weight * carry
        })
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let hits = (0..n).filter(|_| simulate_conditioned(&t, &m, &mut rng).unwrap()["F"].count(b) > 0).count();
    let se = (want * (1.0 - want) / n as f64).sqrt();
    assert!((hits as f64 / n as f64 - want).abs() < 4.0 * se);
}

fn table(nm: usize, freqs: &[f64]) -> AlleleFrequencyTable {
    let rows = (0..nm).flat_map(|k| freqs.iter().enumerate().map(move |(i, q)| (format!("M{k}"), al(10 + i as i32), *q)));
    AlleleFrequencyTable::from_rows(rows).unwrap()
}

#[test]
fn simulated_single_person_is_hardy_weinberg() {
    let d = IbdPatternDistribution::unrelated(s(&["A"])).unwrap();
    let q = [0.1, 0.3, 0.6];
    let t = table(1, &q);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mut counts: BTreeMap<Genotype, usize> = BTreeMap::new();
    for _ in 0..n {
        let p = pedmix::genotype::simulate_profiles(&d, &t, &mut rng).unwrap();
        *counts.entry(p["A"].get("M0").unwrap()).or_default() += 1;
    }
    let mut chi2 = 0.0;
    for i in 0..3 {
        for j in i..3 {
            let e = n as f64 * if i == j { q[i] * q[i] } else { 2.0 * q[i] * q[j] };
            let o = *counts.get(&Genotype::new(al(10 + i as i32), al(10 + j as i32))).unwrap_or(&0) as f64;
            chi2 += (o - e).powi(2) / e;
        }
    }
    // 5 degrees of freedom; 99.9% quantile is 20.5
    assert!(chi2 < 20.5, "chi2 = {chi2}");
}

#[test]
fn simulated_parent_child_share_an_allele() {
    let d = IbdPatternDistribution::from_raw(s(&["P", "C"]), &[(1.0, vec![1, 2, 1, 3])]).unwrap();
    let t = table(50, &[0.1, 0.2, 0.3, 0.4]);
    let p = simulate_profiles_seeded(&d, &t, 9).unwrap();
    for m in t.marker_names() {
        let (a, b) = (p["P"].get(m).unwrap(), p["C"].get(m).unwrap());
        assert!(a.alleles().iter().any(|x| b.count(*x) > 0));
    }
}

#[test]
fn simulated_sib_pattern_frequencies() {
    let d = IbdPatternDistribution::from_raw(
        s(&["A", "B"]),
        &[(0.25, vec![1, 2, 3, 4]), (0.5, vec![1, 2, 1, 3]), (0.25, vec![1, 2, 1, 2])],
    )
    .unwrap();
    let t = table(100_000, &[0.5, 0.5]);
    let (_, picked) = simulate_profiles_with_patterns(&d, &t, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let mut k = [0usize; 3];
    for i in picked {
        // κ0, κ1, κ2 are Jacquard classes 9, 8, 7
        k[8 - jacquard_class(&d.entries()[i].pattern).unwrap()] += 1;
    }
    let f: Vec<f64> = k.iter().map(|&c| c as f64 / 100_000.0).collect();
    for (got, want) in f.iter().zip([0.25, 0.5, 0.25]) {
        assert!((got - want).abs() < 0.01);
    }
}
