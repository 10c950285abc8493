//! Reproducible experiment runs with CSV/JSON artifacts and a checksummed
//! manifest.
//!
//! A run writes one file per artifact into the output directory, then
//! `manifest.json`. If the run stops with an error or misses a quality
//! target, whatever was computed is still written and a `FAILED` marker file
//! holds the message.

mod output;
mod params;
mod runners;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{bail, Error, Result};

pub use output::{reemit_csv, Artifact, Cell, Format, Table};
pub use params::*;
pub use runners::{random_function, random_matrix, Outcome};

pub const MANIFEST: &str = "manifest.json";
pub const FAILURE_MARKER: &str = "FAILED";

/// Exit codes of the command-line runner.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVALID_ARGUMENTS: i32 = 2;
    pub const NUMERICAL_FAILURE: i32 = 3;
    pub const IO: i32 = 4;
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => exit::NUMERICAL_FAILURE,
        Error::Io(_) | Error::Csv(_) => exit::IO,
        Error::Index(_) | Error::Shape(_) | Error::Argument(_) | Error::Size(_) | Error::Aliasing(_) | Error::Json(_) => {
            exit::INVALID_ARGUMENTS
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(command: Command, out: impl Into<PathBuf>) -> Self {
        Self { command, seed: 0, out: out.into(), format: Format::Csv }
    }
}

/// Contents of a `--config` file: the reserved keys `command`, `seed`, `out`
/// and `format`, and every other key as a parameter of the command.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub params: Map<String, Value>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Argument(format!("config: {what}"));
        let Value::Object(mut map) = serde_json::from_str(text)? else {
            return Err(bad("expected a JSON object"));
        };
        let mut take = |k: &str| map.remove(k);
        let command = match take("command") {
            Some(Value::String(s)) => Some(s),
            None => None,
            Some(_) => return Err(bad("command must be a string")),
        };
        let seed = take("seed").map(|v| v.as_u64().ok_or_else(|| bad("seed must be a nonnegative integer"))).transpose()?;
        let out = match take("out") {
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            None => None,
            Some(_) => return Err(bad("out must be a string")),
        };
        let format = take("format").map(serde_json::from_value).transpose().map_err(|e| bad(&e.to_string()))?;
        Ok(Self { command, seed, out, format, params: map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Values given on the command line; each overrides the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

pub const DEFAULT_OUT: &str = "results";

/// Merge a config file with command-line values.
pub fn resolve(file: Option<ConfigFile>, flags: Overrides) -> Result<ExperimentConfig> {
    let file = file.unwrap_or_default();
    let name = match (&flags.command, &file.command) {
        (Some(c), Some(f)) if c.name() != f => bail!(Argument, "config is for {f:?} but the command is {:?}", c.name()),
        (Some(c), _) => c.name().to_string(),
        (None, Some(f)) => f.clone(),
        (None, None) => bail!(Argument, "no command given"),
    };
    let mut params = file.params;
    if let Some(c) = &flags.command {
        params.extend(c.params());
    }
    Ok(ExperimentConfig {
        command: Command::from_params(&name, params)?,
        seed: flags.seed.or(file.seed).unwrap_or(0),
        out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        format: flags.format.or(file.format).unwrap_or_default(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    NumericalFailure,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub format: Format,
    pub params: Map<String, Value>,
    pub status: RunStatus,
    pub message: Option<String>,
    pub files: Vec<FileEntry>,
    pub notes: Map<String, Value>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST))?)?)
    }
}

/// A finished run. `error` is set when the run stopped early.
#[derive(Debug)]
pub struct RunReport {
    pub manifest: Manifest,
    pub outcome: Outcome,
    pub error: Option<Error>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match (&self.error, self.manifest.status) {
            (Some(e), _) => exit_code(e),
            (None, RunStatus::NumericalFailure) => exit::NUMERICAL_FAILURE,
            (None, _) => exit::SUCCESS,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Render an artifact and write it into `dir`.
pub fn emit(artifact: &Artifact, format: Format, dir: &Path) -> Result<FileEntry> {
    let bytes = artifact.render(format)?;
    let name = artifact.file_name(format);
    output::write_file(dir, &name, &bytes)?;
    Ok(FileEntry { name, sha256: hex(&Sha256::digest(&bytes)), bytes: bytes.len() as u64 })
}

/// Compute the experiment without touching the file system.
pub fn compute(command: &Command, seed: u64) -> (Outcome, Option<Error>) {
    let mut outcome = Outcome::default();
    let err = runners::execute(command, seed, &mut outcome).err();
    (outcome, err)
}

/// Execute a configured run and write its artifacts and manifest.
///
/// Only failures to create or write the output directory are returned as
/// `Err`; experiment errors are recorded in the report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    std::fs::create_dir_all(&config.out)?;
    let marker = config.out.join(FAILURE_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker)?;
    }
    let (outcome, error) = compute(&config.command, config.seed);
    let files = outcome.artifacts.iter().map(|a| emit(a, config.format, &config.out)).collect::<Result<Vec<_>>>()?;
    let (status, message) = match (&error, &outcome.failure) {
        (Some(e), _) => (RunStatus::Failed, Some(e.to_string())),
        (None, Some(m)) => (RunStatus::NumericalFailure, Some(m.clone())),
        (None, None) => (RunStatus::Ok, None),
    };
    let manifest = Manifest {
        command: config.command.name().to_string(),
        seed: config.seed,
        format: config.format,
        params: config.command.params(),
        status,
        message: message.clone(),
        files,
        notes: outcome.notes.clone(),
    };
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    output::write_file(&config.out, MANIFEST, &text)?;
    if let Some(m) = message {
        output::write_file(&config.out, FAILURE_MARKER, format!("{m}\n").as_bytes())?;
    }
    Ok(RunReport { manifest, outcome, error })
}

#[cfg(test)]
mod tests;
