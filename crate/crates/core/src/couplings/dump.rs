//! JSON form of an [`EmpiricalCoupling`]. Serializing a parsed dump
//! reproduces it byte for byte.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::coupling::EmpiricalCoupling;
use super::window::{ClosureNote, IndexWindow, SemidirectElement};
use crate::dynamics::{DynSystem, Observable};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::nilseq::NilSeq;

pub const COUPLING_SCHEMA: &str = "nilavg.coupling/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDump {
    pub dim: usize,
    pub level: usize,
    /// Canonical strings; the first `core` entries are the core.
    pub elements: Vec<String>,
    pub core: usize,
    pub closures: Vec<ClosureNote>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDump {
    pub state: usize,
    pub block: Vec<u32>,
    #[serde(with = "exact::pair")]
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingDump {
    pub schema: String,
    pub system: DynSystem,
    pub observables: Vec<Observable>,
    pub n_terms: u64,
    #[serde(with = "exact::pair_vec")]
    pub base_weights: Vec<Rational>,
    pub window: WindowDump,
    /// Value table indexed by the ids in atom blocks.
    #[serde(with = "exact::pair_vec")]
    pub values: Vec<Rational>,
    pub atoms: Vec<AtomDump>,
}

impl WindowDump {
    pub fn of(w: &IndexWindow) -> Self {
        Self {
            dim: w.dim(),
            level: 1,
            elements: w.elements().iter().map(ToString::to_string).collect(),
            core: w.core_len(),
            closures: w.closure_notes(),
        }
    }

    pub fn to_window(&self) -> Result<IndexWindow> {
        if self.level != 1 {
            return Err(Error::LevelMismatch {
                left: 1,
                right: self.level,
            });
        }
        let elements = self
            .elements
            .iter()
            .map(|s| NilSeq::parse(s, 1))
            .collect::<Result<Vec<_>>>()?;
        let closures = self
            .closures
            .iter()
            .map(|c| SemidirectElement::new(NilSeq::parse(&c.element, 1)?, c.shift))
            .collect::<Result<Vec<_>>>()?;
        IndexWindow::from_parts(self.dim, elements, self.core, closures)
    }
}

impl EmpiricalCoupling {
    pub fn to_dump(&self) -> CouplingDump {
        CouplingDump {
            schema: COUPLING_SCHEMA.to_string(),
            system: self.system.clone(),
            observables: self.observables.clone(),
            n_terms: self.n_terms,
            base_weights: self.base_weights.clone(),
            window: WindowDump::of(&self.window),
            values: self.values.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|((state, block), w)| AtomDump {
                    state: *state,
                    block: block.clone(),
                    weight: w.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dump()).expect("dumps always serialize")
    }

    /// Validates a dump: schema, window, block shapes and total mass.
    pub fn from_dump(d: CouplingDump) -> Result<Self> {
        if d.schema != COUPLING_SCHEMA {
            return Err(Error::InvalidParameter(format!(
                "unknown schema {}",
                d.schema
            )));
        }
        d.system.validate()?;
        let count = d
            .system
            .state_count()
            .ok_or_else(|| Error::Unsupported("couplings need a finite system".into()))?;
        for f in &d.observables {
            f.validate(&d.system)?;
        }
        if d.observables.is_empty() || d.base_weights.len() != count {
            return Err(Error::InvalidParameter("dump shape mismatch".into()));
        }
        let window = d.window.to_window()?;
        let width = window.len() * d.observables.len();
        let mut atoms = BTreeMap::new();
        let mut mass = Rational::zero();
        for a in d.atoms {
            if a.state >= count
                || a.block.len() != width
                || a.block.iter().any(|&v| v as usize >= d.values.len())
            {
                return Err(Error::InvalidParameter("malformed atom".into()));
            }
            mass += &a.weight;
            if atoms.insert((a.state, a.block), a.weight).is_some() {
                return Err(Error::InvalidParameter("duplicate atom".into()));
            }
        }
        if mass != Rational::one() {
            return Err(Error::InvalidParameter(
                "atom weights do not sum to one".into(),
            ));
        }
        Ok(Self {
            system: d.system,
            observables: d.observables,
            base_weights: d.base_weights,
            n_terms: d.n_terms,
            window,
            values: d.values,
            atoms,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dump: CouplingDump = serde_json::from_str(s).map_err(|e| Error::Parse {
            input: "coupling dump".into(),
            msg: e.to_string(),
        })?;
        Self::from_dump(dump)
    }
}
