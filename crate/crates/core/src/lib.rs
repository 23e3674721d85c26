//! Probabilistic genotyping of DNA mixtures whose contributors may be
//! related through a pedigree.

pub mod alleles;
pub mod coancestry;
pub mod dyadic;
pub mod error;
pub mod genotype;
pub mod hypothesis;
pub mod inference;
pub mod engine;
pub mod ibd;
pub(crate) mod numeric;
pub mod peakmodel;
pub mod pedigree;
pub mod simstudy;

pub use error::{Error, Result};
