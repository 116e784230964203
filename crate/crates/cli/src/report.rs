use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    pub fn new(path: &str, contents: &str) -> Self {
        InputFile { path: path.to_string(), sha256: format!("{:x}", Sha256::digest(contents.as_bytes())) }
    }
}

/// Outcome for one generator, catalog stage, solution case or equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Nonzero residuals in DSL form.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub case: String,
    pub equation: String,
    pub samples: usize,
    pub rejected: usize,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tolerance: f64,
    /// Real and imaginary parts per coordinate of the worst sample.
    pub worst: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketRow {
    pub left: String,
    pub right: String,
    pub bracket: String,
    pub is_symmetry: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<InputFile>,
    pub seed: u64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<ResidualRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<BracketRow>,
    /// Printed DSL output: a transformed system or reduced ODEs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Not covered by determinism; `--no-timing` writes 0.
    pub wall_time_ms: u64,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs: Vec::new(),
            seed,
            passed: true,
            verdicts: Vec::new(),
            residuals: Vec::new(),
            dimension: None,
            basis: Vec::new(),
            brackets: Vec::new(),
            output: None,
            wall_time_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }
}
