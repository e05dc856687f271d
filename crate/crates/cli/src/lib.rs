//! Experiment runner behind the `nilavg` binary.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 configuration or
//! window-closure error, 3 search exceeded `max_depth`.

use std::fmt;
use std::path::PathBuf;

pub mod config;
pub mod random;
pub mod run;

pub use config::{Command, ExperimentConfig, Mode};
pub use run::{run, Format, Options, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_EXCEEDED: i32 = 3;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NILAVG_OUT_DIR";

/// Directory of the configurations shipped with the crate.
pub fn bundled_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

/// Paths of all bundled configurations, sorted.
pub fn bundled_configs() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(bundled_dir())
        .map(|rd| {
            rd.filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<nilavg::Error> for CliError {
    fn from(e: nilavg::Error) -> Self {
        let kind = match e {
            nilavg::Error::WindowClosure(_) => "window closure",
            nilavg::Error::MissingCoordinate(_) => "window closure",
            _ => "config",
        };
        Self::config(format!("{kind}: {e}"))
    }
}
