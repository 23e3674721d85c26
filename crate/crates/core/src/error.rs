use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pedigree line {line}: {msg}")]
    PedigreeSyntax { line: usize, msg: String },

    #[error("duplicate individual id `{0}`")]
    DuplicateId(String),

    #[error("individual `{id}` refers to unknown parent `{parent}`")]
    UnknownParent { id: String, parent: String },

    #[error("individual `{0}` has exactly one parent; both or neither must be given")]
    OneParent(String),

    #[error("pedigree contains a cycle through `{0}`")]
    Cycle(String),

    #[error("unknown individual `{0}`")]
    UnknownId(String),

    #[error("empty target list")]
    EmptyTargets,

    #[error("target `{0}` listed more than once")]
    DuplicateTarget(String),

    #[error("exact enumeration needs {meioses} meioses, over the cap of {cap}; use monte-carlo mode")]
    MeiosisCap { meioses: usize, cap: usize },

    #[error("exact computation reached {states} coalesced states (limit {limit}); use monte-carlo mode")]
    StateLimit { states: usize, limit: usize },

    #[error("invalid IBD pattern: {0}")]
    InvalidPattern(String),

    #[error("state enumeration for n={n} exceeds the cap of {cap} individuals")]
    EnumerationCap { n: usize, cap: usize },

    #[error("ids {0:?} are not all part of the pattern distribution")]
    NotInDistribution(Vec<String>),

    #[error("unknown marker `{0}`")]
    UnknownMarker(String),

    #[error("allele `{allele}` is not in the frequency table for marker `{marker}`")]
    UnknownAllele { marker: String, allele: String },

    #[error("cannot parse allele designation `{0}`")]
    BadAllele(String),

    #[error("typed genotypes have probability zero at marker `{0}`")]
    ImpossibleEvidence(String),

    #[error("conditioned pattern table is empty")]
    EmptyTable,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("state space of 2^{draws} draw states exceeds the limit of 2^{limit_log2}")]
    StateSpace { draws: usize, limit_log2: u32 },

    #[error("brute-force enumeration needs {terms} terms, over the cap of {cap}")]
    BruteForceCap { terms: u128, cap: u128 },

    #[error("coancestry correction cannot be combined with close relationships; joint modelling is not implemented")]
    UnsupportedCombination,

    #[error("theta must lie in [0, 1), got {0}")]
    BadTheta(f64),

    #[error("non-finite likelihood: {0}")]
    NonFinite(String),

    #[error("no marker has a peak above threshold")]
    DegenerateData,

    #[error("policy `{0}` is not implemented")]
    PolicyNotImplemented(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
