//! Hypothesis description files.
//!
//! ```toml
//! name = "S is a brother of K"
//! relationship = "sibs"
//! pair = ["K", "S"]
//! contributors = ["S", "U"]
//!
//! [typed]
//! K = "k.csv"
//! ```
//!
//! Relatedness comes from `relationship` (with optional `pair`), a
//! `pedigree` file or inline `pedigree_text`. Each `typed` entry points at a
//! genotype CSV; a file with an `id` column may hold several people.
//! Relative paths are resolved against the directory of the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pedmix::alleles::{read_profiles_csv, GenotypeProfile};
use pedmix::hypothesis::Hypothesis;
use pedmix::simstudy::HypothesisSpec;
use serde::Deserialize;

use crate::{CliError, Inputs};

#[derive(Debug, Deserialize)]
pub struct HypothesisFile {
    #[serde(flatten)]
    pub spec: HypothesisSpec,
    #[serde(default)]
    pub typed: BTreeMap<String, String>,
    /// Per EPG, contributor indices whose proportion is held at zero.
    #[serde(default)]
    pub phi_zero: Vec<Vec<usize>>,
}

impl HypothesisFile {
    pub fn read(path: &Path, inputs: &mut Inputs) -> Result<Self, CliError> {
        let text = inputs.read(path)?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?
        };
        Ok(parsed)
    }

    pub fn build(&self, base: &Path, inputs: &mut Inputs) -> Result<Hypothesis, CliError> {
        let typed = read_typed(&self.typed, base, inputs)?;
        let mut spec = self.spec.clone();
        if let Some(p) = &spec.structure.pedigree {
            let full = base.join(p);
            inputs.read(&full)?;
            spec.structure.pedigree = Some(full.to_string_lossy().into_owned());
        }
        let h = spec.build(None, &typed)?;
        Ok(if self.phi_zero.is_empty() { h } else { h.with_phi_zero(self.phi_zero.clone())? })
    }
}

/// Load `id -> path` genotype files.
pub fn read_typed(
    entries: &BTreeMap<String, String>,
    base: &Path,
    inputs: &mut Inputs,
) -> Result<BTreeMap<String, GenotypeProfile>, CliError> {
    let mut out = BTreeMap::new();
    for (id, path) in entries {
        let full: PathBuf = base.join(path);
        let text = inputs.read(&full)?;
        let mut all = read_profiles_csv(text.as_bytes())?;
        let profile = all
            .remove(id)
            .or_else(|| all.remove(""))
            .ok_or_else(|| CliError::Model(format!("{}: no genotypes for `{id}`", full.display())))?;
        out.insert(id.clone(), profile);
    }
    Ok(out)
}
