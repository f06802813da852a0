//! Serialization helpers shared by the subcommands.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use lifeindex::{ModelError, ProfileError};
use serde::Serialize;

/// One error class per exit code: profile and I/O problems exit 1, model
/// evaluation problems exit 2.
#[derive(Debug)]
pub enum CliError {
    Profile(ProfileError),
    Model(ModelError),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Profile(_) | CliError::Io { .. } => 1,
            CliError::Model(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Profile(_) => "profile",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Profile(e) => e.to_string(),
            CliError::Model(e) => e.to_string(),
            CliError::Io { path, source } => {
                format!("cannot write {}: {source}", path.display())
            }
        }
    }

    /// One-line JSON report for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.message() }
        })
        .to_string()
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        CliError::Profile(e)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

/// Pretty JSON with keys sorted at every level, trailing newline included.
/// Two runs over equal data produce byte-identical output.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("reports contain only finite numbers");
    let mut text = serde_json::to_string_pretty(&v).expect("json values serialize");
    text.push('\n');
    text
}

/// Writes through a temporary file in the target directory so readers never
/// observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Prints to stdout, or writes atomically when a target path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
