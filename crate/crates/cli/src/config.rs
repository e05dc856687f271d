//! Experiment configuration files.

use std::path::{Path, PathBuf};

use nilavg::dynamics::{DynSystem, Observable};
use nilavg::nilseq::IntMatrix;
use nilavg::{GSystem, MultiPoly, NilSeq};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_SCHEMA: &str = "nilavg.experiment/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Complexity,
    Average,
    Couple,
    Verify,
}

/// How system entries are written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    /// `ℤ^rank` in the first row of `UT(rank + 1)`; entries list the
    /// `rank` coordinates.
    FirstRow { rank: usize },
    /// `UT(3)`; entries list `(a, b, c)` at positions (1,2), (2,3), (1,3).
    Heisenberg,
    /// `UT(dim)`; entries list the strictly upper part row by row.
    Unitriangular { dim: usize },
}

/// One sequence, as a full matrix or as its coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Matrix(Vec<Vec<String>>),
    Coords(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub fixed_initial_order: bool,
    #[serde(default)]
    pub prune_constant_last: bool,
}

fn default_depth() -> usize {
    6
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_depth: default_depth(),
            fixed_initial_order: false,
            prune_constant_last: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageConfig {
    pub grid: Vec<u64>,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_window() -> f64 {
    2.0
}

fn default_epsilon() -> f64 {
    0.01
}

fn default_samples() -> usize {
    2000
}

fn default_seed() -> u64 {
    20_241_014
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureConfig {
    #[serde(default = "yes")]
    pub alpha: bool,
    #[serde(default = "yes")]
    pub translations: bool,
    #[serde(default = "yes")]
    pub elements: bool,
}

fn yes() -> bool {
    true
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            alpha: true,
            translations: true,
            elements: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    /// Cesàro lengths `N` of the couplings.
    pub grid: Vec<u64>,
    /// Inclusive range of `n` whose brackets enter the window.
    #[serde(default = "default_range")]
    pub n_range: (i64, i64),
    /// Length of the averages in the identity chain; at most the top of
    /// `n_range`.
    #[serde(default = "default_n_avg")]
    pub n_avg: u64,
    /// Group elements `g` for the diagonal check.
    #[serde(default)]
    pub translations: Vec<Entry>,
    /// `f''`; the last slot holds `A_N = Λ_N(f_1, .., f_{k-1}, f'')`
    /// unless `cesaro_last` is off.
    pub last: Observable,
    #[serde(default = "yes")]
    pub cesaro_last: bool,
    #[serde(default)]
    pub closures: ClosureConfig,
    /// Write each coupling as JSON next to the report.
    #[serde(default)]
    pub dump: bool,
}

fn default_range() -> (i64, i64) {
    (0, 2)
}

fn default_n_avg() -> u64 {
    2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_cases() -> usize {
    200
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            cases: default_cases(),
            seed: default_seed(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub group: GroupSpec,
    pub system: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynSystem>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average: Option<AverageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(CliError::config(format!(
                "unsupported schema {:?}, expected {CONFIG_SCHEMA:?}",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    pub fn gsystem(&self) -> Result<GSystem, CliError> {
        if self.system.is_empty() {
            return Err(CliError::config("system has no entries"));
        }
        let entries = self
            .system
            .iter()
            .map(|e| self.group.sequence(e))
            .collect::<Result<Vec<_>, _>>()?;
        GSystem::new(entries).map_err(CliError::from)
    }

    pub fn dynamics(&self) -> Result<&DynSystem, CliError> {
        let d = self
            .dynamics
            .as_ref()
            .ok_or_else(|| CliError::config("config has no dynamics section"))?;
        d.validate()?;
        Ok(d)
    }
}

impl GroupSpec {
    pub fn dim(&self) -> usize {
        match self {
            GroupSpec::FirstRow { rank } => rank + 1,
            GroupSpec::Heisenberg => 3,
            GroupSpec::Unitriangular { dim } => *dim,
        }
    }

    /// A level-0 sequence from its textual entry.
    pub fn sequence(&self, entry: &Entry) -> Result<NilSeq, CliError> {
        let parse = |s: &str| MultiPoly::parse(s, 1).map_err(CliError::from);
        let m = match (self, entry) {
            (_, Entry::Matrix(rows)) => {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                NilSeq::from_rows(rows)?
            }
            (GroupSpec::FirstRow { rank }, Entry::Coords(v)) => {
                if v.len() != *rank {
                    return Err(CliError::config(format!(
                        "first-row entry needs {rank} coordinates, got {}",
                        v.len()
                    )));
                }
                let v = v.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>()?;
                NilSeq::first_row(&v)?
            }
            (GroupSpec::Heisenberg, Entry::Coords(v)) => {
                let [a, b, c] = v.as_slice() else {
                    return Err(CliError::config("heisenberg entry needs (a, b, c)"));
                };
                NilSeq::heisenberg(parse(a)?, parse(b)?, parse(c)?)?
            }
            (GroupSpec::Unitriangular { dim }, Entry::Coords(v)) => {
                let d = *dim;
                if d < 2 || v.len() != d * (d - 1) / 2 {
                    return Err(CliError::config(format!(
                        "UT({d}) entry needs {} coordinates",
                        d * d.saturating_sub(1) / 2
                    )));
                }
                let mut it = v.iter();
                let mut rows = vec![vec![MultiPoly::zero(1); d]; d];
                for (i, row) in rows.iter_mut().enumerate() {
                    row[i] = MultiPoly::one(1);
                    for cell in row.iter_mut().skip(i + 1) {
                        *cell = parse(it.next().expect("length checked"))?;
                    }
                }
                NilSeq::from_rows(rows)?
            }
        };
        if m.dim() != self.dim() {
            return Err(CliError::config(format!(
                "entry {m} has dimension {}, group needs {}",
                m.dim(),
                self.dim()
            )));
        }
        if matches!(self, GroupSpec::FirstRow { .. }) && !m.is_first_row() {
            return Err(CliError::config(format!(
                "entry {m} is not in the first row"
            )));
        }
        Ok(m)
    }

    /// A group element, written like an entry without `n`.
    pub fn element(&self, entry: &Entry) -> Result<IntMatrix, CliError> {
        let s = self.sequence(entry)?;
        if !s.is_independent_of(nilavg::poly::N) {
            return Err(CliError::config(format!("group element {s} depends on n")));
        }
        Ok(s.eval_i64(&[0])?)
    }
}
