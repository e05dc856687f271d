//! Canonical processes on finite windows, empirical couplings `λ_N` and
//! the exact identities relating them to the averages.
//!
//! Coordinates are indexed by a finite [`IndexWindow`] `W ⊂ G̃`. The
//! action of `H̃ = G̃ ⋊_α ℤ` on blocks is `(S^h y)_q = y_{ρ(h)⁻¹ q}`, so a
//! check involving `h` needs `ρ(h)⁻¹ q ∈ W` for every compared `q`. The
//! checks compare the core coordinates and refuse with
//! [`crate::Error::WindowClosure`] when a pullback is missing.
//!
//! All weights and values are exact rationals.

mod coupling;
mod dump;
mod identities;
mod window;

pub use coupling::{cesaro_last, l1_distance, AtomKey, EmpiricalCoupling};
pub use dump::{AtomDump, CouplingDump, WindowDump, COUPLING_SCHEMA};
pub use identities::{
    basic_function, canon_rearrange_check, cond_exp_identity_check, pairing, rearrange_indices,
    CondExpReport, Pairing,
};
pub use window::{
    bracket_at, build_window, embed, iota, value_at, ClosureNote, IndexWindow, SemidirectElement,
};
