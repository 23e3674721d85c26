use pedmix::dyadic::Dyadic;
use pedmix::ibd::{
    condensed_coefficients, count_states, pattern_distribution, IbdMode, IbdOptions, IbdPattern,
    IbdPatternDistribution,
};
use pedmix::pedigree::{pairwise_coefficients, Pedigree};
use proptest::prelude::*;

fn ped(name: &str) -> Pedigree {
    let text = std::fs::read_to_string(format!("{}/../../data/{name}.ped", env!("CARGO_MANIFEST_DIR"))).unwrap();
    Pedigree::parse(&text).unwrap()
}

fn ids(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn exact(p: &Pedigree, targets: &[&str]) -> IbdPatternDistribution {
    pattern_distribution(p, &ids(targets), &IbdOptions::default()).unwrap()
}

/// Compare with a published table given to four decimals.
fn assert_table(d: &IbdPatternDistribution, rows: &[(f64, &[u32])]) {
    assert_eq!(d.len(), rows.len(), "{}", d.to_csv_string());
    for (p, raw) in rows {
        let got = d.probability_of(raw).unwrap();
        assert!((got - p).abs() < 5e-5, "{raw:?}: {got} vs {p}");
    }
    assert_eq!(d.exact_total(), Some(Dyadic::one()));
}

#[test]
fn trio_single_pattern() {
    let d = exact(&ped("trio"), &["F", "M", "C"]);
    assert_table(&d, &[(1.0, &[1, 2, 3, 4, 1, 3])]);
}

#[test]
fn three_cousins_star() {
    let d = exact(&ped("cousins_star"), &["C1", "C2", "C3"]);
    assert_table(
        &d,
        &[
            (0.3750, &[1, 2, 3, 4, 5, 6]),
            (0.1875, &[1, 2, 1, 3, 4, 5]),
            (0.1875, &[1, 2, 3, 4, 1, 5]),
            (0.1875, &[1, 2, 3, 4, 3, 5]),
            (0.0625, &[1, 2, 1, 3, 1, 4]),
        ],
    );
    let pair = d.marginalize(&ids(&["C1", "C2"])).unwrap();
    let delta = condensed_coefficients(&pair).unwrap();
    assert_eq!(delta[8], Dyadic::new(3u32, 2));
}

#[test]
fn three_cousins_cyclic() {
    let d = exact(&ped("cousins_cyclic"), &["C1", "C2", "C3"]);
    assert_table(
        &d,
        &[
            (0.4219, &[1, 2, 3, 4, 5, 6]),
            (0.1406, &[1, 2, 1, 3, 4, 5]),
            (0.1406, &[1, 2, 3, 4, 1, 5]),
            (0.1406, &[1, 2, 3, 4, 3, 5]),
            (0.0469, &[1, 2, 1, 3, 2, 4]),
            (0.0469, &[1, 2, 1, 3, 3, 4]),
            (0.0469, &[1, 2, 3, 4, 1, 3]),
            (0.0156, &[1, 2, 1, 3, 2, 3]),
        ],
    );
    // every pair is still an ordinary cousin pair
    for pair in [["C1", "C2"], ["C1", "C3"], ["C2", "C3"]] {
        let c = pairwise_coefficients(&ped("cousins_cyclic"), pair[0], pair[1]).unwrap();
        assert_eq!(c.kappa, Some([0.75, 0.25, 0.0]));
    }
}

#[test]
fn brother_sister_trio() {
    let d = exact(&ped("sib_incest"), &["F", "M", "C"]);
    assert_table(
        &d,
        &[
            (0.125, &[1, 2, 1, 2, 1, 1]),
            (0.125, &[1, 2, 1, 2, 1, 2]),
            (0.125, &[1, 2, 1, 3, 1, 1]),
            (0.125, &[1, 2, 1, 3, 1, 2]),
            (0.125, &[1, 2, 1, 3, 1, 3]),
            (0.125, &[1, 2, 1, 3, 2, 3]),
            (0.25, &[1, 2, 3, 4, 1, 3]),
        ],
    );
}

#[test]
fn grandfather_trio() {
    let d = exact(&ped("gf_incest"), &["GF", "M", "C"]);
    assert_table(
        &d,
        &[
            (0.25, &[1, 2, 1, 3, 1, 1]),
            (0.25, &[1, 2, 1, 3, 1, 2]),
            (0.25, &[1, 2, 1, 3, 1, 3]),
            (0.25, &[1, 2, 1, 3, 2, 3]),
        ],
    );
}

#[test]
fn caesars_pedigree_is_exact() {
    let p = ped("caesars");
    assert_eq!(p.len(), 35);
    assert_eq!(p.inbred_matings().len(), 2);
    let d = exact(&p, &["Germanicus", "AgrippinaMaior", "Caligula", "Nero"]);
    assert_eq!(d.exact_total(), Some(Dyadic::one()));
    let d3 = exact(&p, &["Claudius", "Caligula", "Nero"]);
    assert_eq!(d3.exact_total(), Some(Dyadic::one()));
    let c = pairwise_coefficients(&p, "Germanicus", "AgrippinaMaior").unwrap();
    assert_eq!(c.kappa, Some([0.9375, 0.0625, 0.0]));
    let pair = d.marginalize(&ids(&["Germanicus", "AgrippinaMaior"])).unwrap();
    assert_eq!(condensed_coefficients(&pair).unwrap(), c.delta_exact);
}

#[test]
fn state_counts() {
    assert_eq!(count_states(2, true).unwrap(), 9);
    assert_eq!(count_states(2, false).unwrap(), 3);
    assert_eq!(count_states(4, true).unwrap(), 712);
    assert_eq!(count_states(4, false).unwrap(), 139);
}

#[test]
fn monte_carlo_converges_on_star() {
    let p = ped("cousins_star");
    let t = ids(&["C1", "C2", "C3"]);
    let ex = pattern_distribution(&p, &t, &IbdOptions::default()).unwrap();
    let opts = IbdOptions { mode: IbdMode::MonteCarlo, mc_samples: 1_000_000, seed: 7, ..Default::default() };
    let mc = pattern_distribution(&p, &t, &opts).unwrap();
    assert!(ex.total_variation(&mc) < 0.01);
}

#[test]
fn permuting_targets_permutes_columns() {
    let p = ped("cousins_cyclic");
    let a = exact(&p, &["C1", "C2", "C3"]);
    let b = exact(&p, &["C3", "C1", "C2"]);
    assert_eq!(b.marginalize(a.ids()).unwrap(), a);
}

/// Random pedigree: `f` founders, then `k` children of two distinct earlier
/// members (so inbreeding loops occur).
fn random_pedigree(f: usize, picks: &[(usize, usize)]) -> Pedigree {
    let mut text = String::new();
    for i in 0..f {
        text.push_str(&format!("P{i} * *\n"));
    }
    for (k, &(a, b)) in picks.iter().enumerate() {
        let n = f + k;
        let (x, y) = (a % n, b % n);
        let y = if x == y { (y + 1) % n } else { y };
        text.push_str(&format!("P{} P{x} P{y}\n", f + k));
    }
    Pedigree::parse(&text).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn active_set_matches_naive(
        f in 2usize..5,
        picks in prop::collection::vec((0usize..100, 0usize..100), 1..=8),
        t in prop::collection::vec(0usize..100, 1..=3),
    ) {
        let p = random_pedigree(f, &picks);
        let mut targets: Vec<String> = t.iter().map(|i| format!("P{}", i % p.len())).collect();
        targets.dedup();
        targets.sort();
        targets.dedup();
        let fast = pattern_distribution(&p, &targets, &IbdOptions::default()).unwrap();
        let slow = pattern_distribution(&p, &targets, &IbdOptions { mode: IbdMode::ExactNaive, ..Default::default() }).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn kinship_from_patterns_matches_recursion(
        f in 2usize..5,
        picks in prop::collection::vec((0usize..100, 0usize..100), 1..=8),
        a in 0usize..100,
        b in 0usize..100,
    ) {
        let p = random_pedigree(f, &picks);
        let (a, b) = (p.id(a % p.len()).to_string(), p.id(b % p.len()).to_string());
        let c = pairwise_coefficients(&p, &a, &b).unwrap();
        prop_assert_eq!(c.theta_exact.clone(), p.kinship(&a, &b).unwrap());
        let sum = c.delta_exact.iter().fold(Dyadic::zero(), |s, d| &s + d);
        prop_assert_eq!(sum, Dyadic::one());
    }
}

#[test]
fn canonical_examples() {
    let want = IbdPattern::canonicalize(&[1, 2, 3, 4, 1, 3]).unwrap();
    assert_eq!(IbdPattern::canonicalize(&[2, 4, 1, 3, 2, 1]).unwrap(), want);
    assert_eq!(IbdPattern::canonicalize(&[2, 1, 4, 3, 1, 3]).unwrap(), want);
}
