//! Pedigrees and pairwise relationship coefficients.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::ibd::{self, IbdOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Sex {
    Male,
    Female,
    #[default]
    Unknown,
}

impl FromStr for Sex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" | "1" | "male" => Ok(Sex::Male),
            "F" | "f" | "2" | "female" => Ok(Sex::Female),
            "U" | "u" | "0" | "?" | "unknown" => Ok(Sex::Unknown),
            other => Err(Error::PedigreeSyntax { line: 0, msg: format!("unknown sex `{other}`") }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Individual {
    pub id: String,
    pub father: Option<String>,
    pub mother: Option<String>,
    pub sex: Sex,
}

/// A validated pedigree. Parents are stored as indices; `order` is a
/// topological order (parents before children).
#[derive(Clone, Debug)]
pub struct Pedigree {
    individuals: Vec<Individual>,
    parents: Vec<Option<(usize, usize)>>,
    children: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl Pedigree {
    pub fn new(individuals: Vec<Individual>) -> Result<Self> {
        let mut index = HashMap::with_capacity(individuals.len());
        for (i, ind) in individuals.iter().enumerate() {
            if index.insert(ind.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(ind.id.clone()));
            }
        }
        let mut parents = Vec::with_capacity(individuals.len());
        let mut children = vec![Vec::new(); individuals.len()];
        for (i, ind) in individuals.iter().enumerate() {
            match (&ind.father, &ind.mother) {
                (None, None) => parents.push(None),
                (Some(f), Some(m)) => {
                    let lookup = |p: &String| {
                        index.get(p).copied().ok_or_else(|| Error::UnknownParent {
                            id: ind.id.clone(),
                            parent: p.clone(),
                        })
                    };
                    let (fi, mi) = (lookup(f)?, lookup(m)?);
                    children[fi].push(i);
                    if mi != fi {
                        children[mi].push(i);
                    }
                    parents.push(Some((fi, mi)));
                }
                _ => return Err(Error::OneParent(ind.id.clone())),
            }
        }
        let order = topological_order(&individuals, &parents, &children)?;
        let mut rank = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Ok(Pedigree { individuals, parents, children, index, order, rank })
    }

    /// Parse a whitespace table `id father mother [sex]`; `0` or `*` marks an
    /// absent parent. Blank lines and `#` comments are skipped, as is an
    /// optional header line starting with `id`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if rows.is_empty() && fields[0].eq_ignore_ascii_case("id") {
                continue;
            }
            if fields.len() < 3 || fields.len() > 4 {
                return Err(Error::PedigreeSyntax {
                    line: lineno + 1,
                    msg: format!("expected `id father mother [sex]`, got {} fields", fields.len()),
                });
            }
            let parent = |s: &str| (s != "0" && s != "*").then(|| s.to_string());
            let sex = match fields.get(3) {
                Some(s) => s.parse().map_err(|_| Error::PedigreeSyntax {
                    line: lineno + 1,
                    msg: format!("unknown sex `{s}`"),
                })?,
                None => Sex::Unknown,
            };
            rows.push(Individual {
                id: fields[0].to_string(),
                father: parent(fields[1]),
                mother: parent(fields[2]),
                sex,
            });
        }
        Pedigree::new(rows)
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn individuals(&self) -> &[Individual] {
        &self.individuals
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.individuals[idx].id
    }

    pub fn parents(&self, idx: usize) -> Option<(usize, usize)> {
        self.parents[idx]
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    pub fn is_founder(&self, idx: usize) -> bool {
        self.parents[idx].is_none()
    }

    pub fn founders(&self) -> Vec<&str> {
        (0..self.len()).filter(|&i| self.is_founder(i)).map(|i| self.id(i)).collect()
    }

    pub fn non_founder_count(&self) -> usize {
        self.parents.iter().filter(|p| p.is_some()).count()
    }

    /// Parents-before-children ordering of all individuals.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Indices of the given individuals and all of their ancestors.
    pub fn ancestral_closure(&self, targets: &[usize]) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<usize> = targets.to_vec();
        while let Some(i) = stack.pop() {
            if keep[i] {
                continue;
            }
            keep[i] = true;
            if let Some((f, m)) = self.parents[i] {
                stack.push(f);
                stack.push(m);
            }
        }
        keep
    }

    /// Matings between relatives, as `(father, mother)` pairs with positive
    /// kinship.
    pub fn inbred_matings(&self) -> Vec<(String, String)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut memo = HashMap::new();
        for &i in &self.order {
            if let Some((f, m)) = self.parents[i] {
                if seen.insert((f, m)) && !kinship_idx(self, f, m, &mut memo).is_zero() {
                    out.push((self.id(f).to_string(), self.id(m).to_string()));
                }
            }
        }
        out
    }

    /// Kinship coefficient by the classical recursion down the pedigree.
    pub fn kinship(&self, a: &str, b: &str) -> Result<Dyadic> {
        let (ia, ib) = (self.index_of(a)?, self.index_of(b)?);
        Ok(kinship_idx(self, ia, ib, &mut HashMap::new()))
    }

    /// Inbreeding coefficient `F = kinship(father, mother)`.
    pub fn inbreeding(&self, id: &str) -> Result<Dyadic> {
        let i = self.index_of(id)?;
        Ok(match self.parents[i] {
            None => Dyadic::zero(),
            Some((f, m)) => kinship_idx(self, f, m, &mut HashMap::new()),
        })
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for ind in &self.individuals {
            let sex = match ind.sex {
                Sex::Male => "M",
                Sex::Female => "F",
                Sex::Unknown => "U",
            };
            s.push_str(&format!(
                "{} {} {} {}\n",
                ind.id,
                ind.father.as_deref().unwrap_or("*"),
                ind.mother.as_deref().unwrap_or("*"),
                sex
            ));
        }
        s
    }
}

impl FromStr for Pedigree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Pedigree::parse(s)
    }
}

impl fmt::Display for Pedigree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

fn topological_order(
    individuals: &[Individual],
    parents: &[Option<(usize, usize)>],
    children: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let n = individuals.len();
    let mut indegree: Vec<usize> = parents
        .iter()
        .map(|p| match p {
            None => 0,
            Some((f, m)) if f == m => 1,
            Some(_) => 2,
        })
        .collect();
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop() {
        order.push(i);
        for &c in children[i].iter().rev() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(Error::Cycle(individuals[stuck].id.clone()));
    }
    Ok(order)
}

fn kinship_idx(
    ped: &Pedigree,
    a: usize,
    b: usize,
    memo: &mut HashMap<(usize, usize), Dyadic>,
) -> Dyadic {
    let key = (a.min(b), a.max(b));
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let pos = |i: usize| ped.rank[i];
    let value = if a == b {
        match ped.parents[a] {
            None => Dyadic::new(1u32, 1),
            Some((f, m)) => {
                let fm = kinship_idx(ped, f, m, memo);
                (&Dyadic::one() + &fm).scale_down(1)
            }
        }
    } else {
        // recurse on whichever individual comes later, so it cannot be an
        // ancestor of the other
        let (late, other) = if pos(a) > pos(b) { (a, b) } else { (b, a) };
        match ped.parents[late] {
            None => Dyadic::zero(),
            Some((f, m)) => {
                let x = kinship_idx(ped, f, other, memo);
                let y = kinship_idx(ped, m, other, memo);
                (&x + &y).scale_down(1)
            }
        }
    };
    memo.insert(key, value.clone());
    value
}

/// Condensed identity coefficients of a pair of individuals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseCoefficients {
    /// Jacquard's Δ1..Δ9.
    pub delta: [f64; 9],
    #[serde(skip)]
    pub delta_exact: Vec<Dyadic>,
    /// (κ0, κ1, κ2), defined when Δ1..Δ6 vanish.
    pub kappa: Option<[f64; 3]>,
    pub theta: f64,
    #[serde(skip)]
    pub theta_exact: Dyadic,
}

impl PairwiseCoefficients {
    /// Build from the exact Δ vector.
    pub fn from_delta(delta_exact: Vec<Dyadic>) -> Self {
        assert_eq!(delta_exact.len(), 9);
        let mut delta = [0.0; 9];
        for (d, e) in delta.iter_mut().zip(&delta_exact) {
            *d = e.to_f64();
        }
        let kappa = delta_exact[..6]
            .iter()
            .all(Dyadic::is_zero)
            .then(|| [delta[8], delta[7], delta[6]]);
        // θ = Δ1 + (Δ3 + Δ5 + Δ7)/2 + Δ8/4
        let half = (&(&delta_exact[2] + &delta_exact[4]) + &delta_exact[6]).scale_down(1);
        let theta_exact = &(&delta_exact[0] + &half) + &delta_exact[7].scale_down(2);
        PairwiseCoefficients { delta, theta: theta_exact.to_f64(), delta_exact, kappa, theta_exact }
    }
}

/// Pairwise Δ/κ/θ for two pedigree members, obtained by marginalising the
/// joint IBD pattern distribution of the pair.
pub fn pairwise_coefficients(ped: &Pedigree, a: &str, b: &str) -> Result<PairwiseCoefficients> {
    ped.index_of(a)?;
    ped.index_of(b)?;
    let opts = IbdOptions::default();
    let delta = if a == b {
        let single = ibd::pattern_distribution(ped, &[a.to_string()], &opts)?;
        let mut delta = vec![Dyadic::zero(); 9];
        for entry in single.entries() {
            let exact = entry.exact.clone().expect("exact mode");
            let l = entry.pattern.labels();
            let doubled = ibd::IbdPattern::canonicalize(&[l[0], l[1], l[0], l[1]])?;
            let class = ibd::jacquard_class(&doubled).expect("two-person pattern");
            delta[class] += &exact;
        }
        delta
    } else {
        let dist = ibd::pattern_distribution(ped, &[a.to_string(), b.to_string()], &opts)?;
        ibd::condensed_coefficients(&dist)?
    };
    Ok(PairwiseCoefficients::from_delta(delta))
}
