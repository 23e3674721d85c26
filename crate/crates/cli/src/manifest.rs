use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

/// What was run, on which inputs, and how long it took.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub version: String,
    pub started_unix: u64,
    pub wall_seconds: f64,
    pub exit_code: i32,
}

/// Reads input files and remembers their hashes.
#[derive(Default)]
pub struct Inputs {
    records: Vec<InputRecord>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
        let name = path.to_string_lossy().into_owned();
        if !self.records.iter().any(|r| r.path == name) {
            self.records.push(InputRecord { path: name, sha256: format!("{:x}", Sha256::digest(&bytes)) });
        }
        String::from_utf8(bytes).map_err(|_| CliError::Model(format!("{}: not UTF-8 text", path.display())))
    }

    pub fn into_records(self) -> Vec<InputRecord> {
        self.records
    }
}

pub struct Clock {
    start: Instant,
    unix: u64,
}

impl Clock {
    pub fn start() -> Self {
        let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Clock { start: Instant::now(), unix }
    }

    pub fn unix(&self) -> u64 {
        self.unix
    }

    pub fn seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Where the manifest goes: next to the main output, or stderr.
pub fn manifest_path(explicit: Option<&Path>, output: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        output.map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}
