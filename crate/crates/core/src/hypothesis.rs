//! Hypotheses about who contributed to a mixture and how they are related.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alleles::GenotypeProfile;
use crate::dyadic::Dyadic;
use crate::engine::MixtureModel;
use crate::error::{Error, Result};
use crate::ibd::{pattern_distribution, IbdOptions, IbdPatternDistribution};
use crate::pedigree::Pedigree;

/// One contributor to the mixture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Slot {
    /// Typed contributor; the profile lives in the typed map.
    Known(String),
    /// Untyped member of the pedigree or relationship.
    Related(String),
    /// Untyped, drawn from the gene pool.
    Unrelated(String),
}

impl Slot {
    pub fn id(&self) -> &str {
        match self {
            Slot::Known(id) | Slot::Related(id) | Slot::Unrelated(id) => id,
        }
    }
}

/// Named pairwise relationships.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relationship {
    ParentChild,
    Sibs,
    HalfSibs,
    Cousins,
    HalfCousins,
    DoubleFirstCousins,
    MzTwins,
    Unrelated,
}

impl Relationship {
    pub const ALL: [Relationship; 8] = [
        Relationship::ParentChild,
        Relationship::Sibs,
        Relationship::HalfSibs,
        Relationship::Cousins,
        Relationship::HalfCousins,
        Relationship::DoubleFirstCousins,
        Relationship::MzTwins,
        Relationship::Unrelated,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Relationship::ParentChild => "parent-child",
            Relationship::Sibs => "sibs",
            Relationship::HalfSibs => "half-sibs",
            Relationship::Cousins => "cousins",
            Relationship::HalfCousins => "half-cousins",
            Relationship::DoubleFirstCousins => "double-first-cousins",
            Relationship::MzTwins => "mz-twins",
            Relationship::Unrelated => "unrelated",
        }
    }

    /// A pedigree in which `a` and `b` stand in this relationship, with `a`
    /// the parent for parent-child. `None` for twins and unrelated.
    pub fn pedigree(&self, a: &str, b: &str) -> Option<Pedigree> {
        let text = match self {
            Relationship::ParentChild => format!("{a} * * M\n_X * * F\n{b} {a} _X M\n"),
            Relationship::Sibs => format!("_F * * M\n_M * * F\n{a} _F _M M\n{b} _F _M M\n"),
            Relationship::HalfSibs => format!("_F * * M\n_M1 * * F\n_M2 * * F\n{a} _F _M1 M\n{b} _F _M2 M\n"),
            Relationship::Cousins => format!(
                "_G * * M\n_H * * F\n_S1 _G _H M\n_S2 _G _H F\n_X1 * * F\n_X2 * * M\n{a} _S1 _X1 M\n{b} _X2 _S2 M\n"
            ),
            Relationship::HalfCousins => format!(
                "_G * * M\n_H1 * * F\n_H2 * * F\n_S1 _G _H1 M\n_S2 _G _H2 F\n_X1 * * F\n_X2 * * M\n\
                 {a} _S1 _X1 M\n{b} _X2 _S2 M\n"
            ),
            Relationship::DoubleFirstCousins => format!(
                "_G1 * * M\n_H1 * * F\n_G2 * * M\n_H2 * * F\n_B1 _G1 _H1 M\n_B2 _G1 _H1 M\n\
                 _S1 _G2 _H2 F\n_S2 _G2 _H2 F\n{a} _B1 _S1 M\n{b} _B2 _S2 M\n"
            ),
            Relationship::MzTwins | Relationship::Unrelated => return None,
        };
        Some(Pedigree::parse(&text).expect("built-in pedigree"))
    }

    /// Joint pattern distribution of `a` and `b`.
    pub fn distribution(&self, a: &str, b: &str) -> Result<IbdPatternDistribution> {
        let ids = vec![a.to_string(), b.to_string()];
        match self {
            Relationship::MzTwins => IbdPatternDistribution::from_exact(ids, vec![(Dyadic::one(), vec![1, 2, 1, 2])]),
            Relationship::Unrelated => IbdPatternDistribution::unrelated(ids),
            _ => pattern_distribution(&self.pedigree(a, b).expect("pedigree"), &ids, &IbdOptions::default()),
        }
    }
}

impl fmt::Display for Relationship {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relationship {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        Relationship::ALL
            .into_iter()
            .find(|r| r.name() == key)
            .ok_or_else(|| Error::InvalidHypothesis(format!("unknown relationship `{s}`")))
    }
}

/// Source of relatedness among the people in a hypothesis.
#[derive(Clone, Debug)]
pub enum Relatedness {
    Unrelated,
    Pedigree(Pedigree),
    Distribution(IbdPatternDistribution),
}

impl Relatedness {
    pub fn contains(&self, id: &str) -> bool {
        match self {
            Relatedness::Unrelated => false,
            Relatedness::Pedigree(p) => p.contains(id),
            Relatedness::Distribution(d) => d.position(id).is_some(),
        }
    }
}

/// Joint pattern distribution of `ids`; anyone outside the pedigree or
/// distribution is unrelated to everyone else.
pub fn joint_distribution(rel: &Relatedness, ids: &[String], ibd: &IbdOptions) -> Result<IbdPatternDistribution> {
    let (inside, outside): (Vec<String>, Vec<String>) = ids.iter().cloned().partition(|id| rel.contains(id));
    let base = match rel {
        _ if inside.is_empty() => return IbdPatternDistribution::unrelated(ids.to_vec()),
        Relatedness::Unrelated => unreachable!(),
        Relatedness::Pedigree(p) => pattern_distribution(p, &inside, ibd)?,
        Relatedness::Distribution(d) => d.marginalize(&inside)?,
    };
    if outside.is_empty() {
        Ok(base)
    } else {
        base.with_unrelated(&outside)
    }
}

#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub name: String,
    pub slots: Vec<Slot>,
    pub relatedness: Relatedness,
    /// Typed individuals: known contributors and typed relatives.
    pub typed: BTreeMap<String, GenotypeProfile>,
    /// Per EPG, slot indices whose mixture proportion is held at zero.
    pub phi_zero: Vec<Vec<usize>>,
    pub ibd: IbdOptions,
}

impl Hypothesis {
    pub fn new(
        name: impl Into<String>,
        slots: Vec<Slot>,
        relatedness: Relatedness,
        typed: BTreeMap<String, GenotypeProfile>,
    ) -> Result<Self> {
        let h = Hypothesis {
            name: name.into(),
            slots,
            relatedness,
            typed,
            phi_zero: Vec::new(),
            ibd: IbdOptions::default(),
        };
        h.validate()?;
        Ok(h)
    }

    /// Untyped unrelated contributors `ids`, plus typed non-contributors.
    pub fn unrelated(name: impl Into<String>, ids: &[&str], typed: BTreeMap<String, GenotypeProfile>) -> Result<Self> {
        let slots = ids.iter().map(|id| Slot::Unrelated(id.to_string())).collect();
        Self::new(name, slots, Relatedness::Unrelated, typed)
    }

    /// Two untyped contributors in a named relationship.
    pub fn pairwise(name: impl Into<String>, rel: Relationship, a: &str, b: &str) -> Result<Self> {
        let slots = vec![Slot::Related(a.into()), Slot::Related(b.into())];
        Self::new(name, slots, Relatedness::Distribution(rel.distribution(a, b)?), BTreeMap::new())
    }

    pub fn with_phi_zero(mut self, phi_zero: Vec<Vec<usize>>) -> Result<Self> {
        self.phi_zero = phi_zero;
        self.validate()?;
        Ok(self)
    }

    pub fn contributors(&self) -> Vec<String> {
        self.slots.iter().map(|s| s.id().to_string()).collect()
    }

    fn in_structure(&self, id: &str) -> bool {
        self.relatedness.contains(id)
    }

    fn validate(&self) -> Result<()> {
        if self.slots.is_empty() {
            return Err(Error::InvalidHypothesis(format!("{}: no contributors", self.name)));
        }
        for (i, s) in self.slots.iter().enumerate() {
            if self.slots[..i].iter().any(|t| t.id() == s.id()) {
                return Err(Error::InvalidHypothesis(format!("{}: `{}` listed twice", self.name, s.id())));
            }
            match s {
                Slot::Known(id) if !self.typed.contains_key(id) => {
                    return Err(Error::InvalidHypothesis(format!("{}: known contributor `{id}` has no profile", self.name)))
                }
                Slot::Related(id) if !self.in_structure(id) => {
                    return Err(Error::InvalidHypothesis(format!(
                        "{}: related contributor `{id}` is not in the pedigree",
                        self.name
                    )))
                }
                Slot::Unrelated(id) if self.in_structure(id) || self.typed.contains_key(id) => {
                    return Err(Error::InvalidHypothesis(format!(
                        "{}: unrelated contributor `{id}` also appears as a relative or typed person",
                        self.name
                    )))
                }
                _ => {}
            }
        }
        for zeros in &self.phi_zero {
            if zeros.iter().any(|&i| i >= self.slots.len()) {
                return Err(Error::InvalidHypothesis(format!("{}: zero-proportion slot out of range", self.name)));
            }
            if zeros.len() >= self.slots.len() {
                return Err(Error::InvalidHypothesis(format!("{}: every proportion held at zero", self.name)));
            }
        }
        Ok(())
    }

    /// Slot indices held at zero in EPG `e`.
    pub fn zeros(&self, e: usize) -> &[usize] {
        self.phi_zero.get(e).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Everyone involved: contributors first, then typed non-contributors.
    fn people(&self) -> Vec<String> {
        let mut ids = self.contributors();
        ids.extend(self.typed.keys().filter(|k| !ids.contains(k)).cloned().collect::<Vec<_>>());
        ids
    }

    /// Joint pattern distribution over contributors and typed people.
    pub fn distribution(&self) -> Result<IbdPatternDistribution> {
        joint_distribution(&self.relatedness, &self.people(), &self.ibd)
    }

    pub fn model(&self) -> Result<MixtureModel> {
        MixtureModel::new(self.contributors(), self.distribution()?, self.typed.clone())
    }
}
