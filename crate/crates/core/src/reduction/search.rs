//! Iterative-deepening search for the complexity of a system: the least
//! number of reductions, interleaved with free reorderings and duplicate
//! removals, that reaches a system constant in `n`.
//!
//! States are canonicalized by removing duplicates and sorting entries by
//! their text form, so the only real choice at each step is which entry
//! goes last. Children are explored in order of their canonical text, so
//! the first witness found at the minimal depth is the lexicographically
//! least one.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{dedupe, is_trivial, reduce, reorder};
use crate::error::{Error, Result};
use crate::nilseq::{GSystem, NilSeq};
use crate::poly::N;

/// Knobs for [`complexity`]. The defaults follow the plain definition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchOptions {
    /// Forbid reordering before the first reduction: the given last entry
    /// is reduced first.
    pub fixed_initial_order: bool,
    /// Skip reductions whose last entry is constant in `n`.
    pub prune_constant_last: bool,
}

/// A system as recorded in a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub level: usize,
    pub entries: Vec<String>,
}

impl Snapshot {
    pub fn of(system: &GSystem) -> Self {
        Self {
            level: system.level(),
            entries: system.to_strings(),
        }
    }

    pub fn to_system(&self) -> Result<GSystem> {
        GSystem::new(
            self.entries
                .iter()
                .map(|s| NilSeq::parse(s, self.level))
                .collect::<Result<_>>()?,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum TraceStep {
    Dedupe {
        removed: Vec<usize>,
        snapshot: Snapshot,
    },
    Reorder {
        perm: Vec<usize>,
        snapshot: Snapshot,
    },
    Reduce {
        snapshot: Snapshot,
    },
}

impl TraceStep {
    pub fn snapshot(&self) -> &Snapshot {
        match self {
            TraceStep::Dedupe { snapshot, .. }
            | TraceStep::Reorder { snapshot, .. }
            | TraceStep::Reduce { snapshot } => snapshot,
        }
    }
}

/// Witness sequence of operations from an initial system to a trivial one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub initial: Snapshot,
    pub steps: Vec<TraceStep>,
}

impl ReductionTrace {
    pub fn reductions(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, TraceStep::Reduce { .. }))
            .count()
    }

    /// Re-applies every step from the initial system, checking each
    /// snapshot, and returns the final system.
    pub fn replay(&self) -> Result<GSystem> {
        let mut current = self.initial.to_system()?;
        for (i, step) in self.steps.iter().enumerate() {
            current = match step {
                TraceStep::Dedupe { removed, .. } => {
                    let (d, r) = dedupe(&current);
                    if &r != removed {
                        return Err(Error::InvalidParameter(format!(
                            "step {i}: dedupe removed {r:?}, trace says {removed:?}"
                        )));
                    }
                    d
                }
                TraceStep::Reorder { perm, .. } => reorder(&current, perm)?,
                TraceStep::Reduce { .. } => reduce(&current),
            };
            if &Snapshot::of(&current) != step.snapshot() {
                return Err(Error::InvalidParameter(format!(
                    "step {i}: snapshot does not match replay"
                )));
            }
        }
        Ok(current)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComplexityOutcome {
    Found { value: usize, trace: ReductionTrace },
    Exceeded { max_depth: usize },
}

impl ComplexityOutcome {
    pub fn value(&self) -> Option<usize> {
        match self {
            ComplexityOutcome::Found { value, .. } => Some(*value),
            ComplexityOutcome::Exceeded { .. } => None,
        }
    }
}

/// Canonical key: level plus sorted, deduplicated entry strings.
pub fn canonical_key(system: &GSystem) -> String {
    let mut entries = system.to_strings();
    entries.sort();
    entries.dedup();
    format!("{}|{}", system.level(), entries.join(";"))
}

struct Child {
    steps: Vec<TraceStep>,
    reduced: GSystem,
    key: String,
}

fn children(state: &GSystem, allow_reorder: bool, prune: bool) -> Vec<Child> {
    let (deduped, removed) = dedupe(state);
    let mut prefix = Vec::new();
    if !removed.is_empty() {
        prefix.push(TraceStep::Dedupe {
            removed,
            snapshot: Snapshot::of(&deduped),
        });
    }
    let k = deduped.len();
    let perms: Vec<Vec<usize>> = if allow_reorder {
        let strings = deduped.to_strings();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| strings[a].cmp(&strings[b]));
        (0..k)
            .map(|chosen| {
                let mut perm: Vec<usize> = order.iter().copied().filter(|&i| i != chosen).collect();
                perm.push(chosen);
                perm
            })
            .collect()
    } else {
        vec![(0..k).collect()]
    };

    let mut out: Vec<Child> = Vec::with_capacity(perms.len());
    for perm in perms {
        let last = &deduped.entries()[*perm.last().expect("nonempty")];
        if prune && last.is_independent_of(N) {
            continue;
        }
        let mut steps = prefix.clone();
        let ordered = if perm.iter().enumerate().all(|(i, &p)| i == p) {
            deduped.clone()
        } else {
            let ordered = reorder(&deduped, &perm).expect("valid permutation");
            steps.push(TraceStep::Reorder {
                perm,
                snapshot: Snapshot::of(&ordered),
            });
            ordered
        };
        let reduced = reduce(&ordered);
        steps.push(TraceStep::Reduce {
            snapshot: Snapshot::of(&reduced),
        });
        let key = canonical_key(&reduced);
        out.push(Child {
            steps,
            reduced,
            key,
        });
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out.dedup_by(|a, b| a.key == b.key);
    out
}

struct Searcher<'a> {
    options: &'a SearchOptions,
    // Largest remaining budget known to be insufficient, per canonical state.
    failed: HashMap<String, usize>,
}

impl Searcher<'_> {
    fn dfs(&mut self, state: &GSystem, remaining: usize, root: bool) -> Option<Vec<TraceStep>> {
        if is_trivial(state) {
            return Some(Vec::new());
        }
        if remaining == 0 {
            return None;
        }
        let key = canonical_key(state);
        if !root && self.failed.get(&key).is_some_and(|&r| r >= remaining) {
            return None;
        }
        let allow_reorder = !(root && self.options.fixed_initial_order);
        for child in children(state, allow_reorder, self.options.prune_constant_last) {
            if let Some(rest) = self.dfs(&child.reduced, remaining - 1, false) {
                let mut steps = child.steps;
                steps.extend(rest);
                return Some(steps);
            }
        }
        if !root {
            let entry = self.failed.entry(key).or_insert(0);
            *entry = (*entry).max(remaining);
        }
        None
    }
}

/// Least number of reductions reaching a trivial system, with a witness,
/// or `Exceeded` when none exists within `max_depth` reductions.
pub fn complexity(
    system: &GSystem,
    max_depth: usize,
    options: &SearchOptions,
) -> ComplexityOutcome {
    let mut searcher = Searcher {
        options,
        failed: HashMap::new(),
    };
    for depth in 0..=max_depth {
        if let Some(steps) = searcher.dfs(system, depth, true) {
            let trace = ReductionTrace {
                initial: Snapshot::of(system),
                steps,
            };
            return ComplexityOutcome::Found {
                value: trace.reductions(),
                trace,
            };
        }
    }
    ComplexityOutcome::Exceeded { max_depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;

    fn z(s: &str) -> NilSeq {
        NilSeq::first_row(&[MultiPoly::parse(s, 1).unwrap()]).unwrap()
    }

    #[test]
    fn trivial_system_has_complexity_zero() {
        let s = GSystem::new(vec![z("3"), z("-1")]).unwrap();
        let out = complexity(&s, 4, &SearchOptions::default());
        assert_eq!(out.value(), Some(0));
    }

    #[test]
    fn linear_sequence_has_complexity_one() {
        let s = GSystem::new(vec![z("n")]).unwrap();
        let ComplexityOutcome::Found { value, trace } =
            complexity(&s, 4, &SearchOptions::default())
        else {
            panic!("search exceeded");
        };
        assert_eq!(value, 1);
        assert!(is_trivial(&trace.replay().unwrap()));
    }

    #[test]
    fn exceeded_is_a_value() {
        let s = GSystem::new(vec![z("n^2")]).unwrap();
        assert_eq!(
            complexity(&s, 1, &SearchOptions::default()),
            ComplexityOutcome::Exceeded { max_depth: 1 }
        );
    }

    #[test]
    fn replay_detects_tampering() {
        let s = GSystem::new(vec![z("n"), z("2*n")]).unwrap();
        let ComplexityOutcome::Found { mut trace, .. } =
            complexity(&s, 4, &SearchOptions::default())
        else {
            panic!("search exceeded");
        };
        trace.replay().unwrap();
        if let Some(TraceStep::Reduce { snapshot }) = trace.steps.last_mut() {
            snapshot.entries[0] = "[[1, 7], [0, 1]]".into();
        }
        assert!(trace.replay().is_err());
    }
}
