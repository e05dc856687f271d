//! Finite windows into `G̃` and the action of `H̃ = G̃ ⋊_α ℤ` on them.
//!
//! Elements of `G̃` are sequences `m ↦ q(m)` in `G`, stored as level-1
//! matrices in the variable `m1`. A level-0 sequence `p` enters `G̃` by
//! reading its index `n` as `m1` ([`embed`]); a group element `g` enters as
//! the constant sequence `ι(g)` ([`iota`]).

use std::collections::HashMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilseq::{GSystem, IntMatrix, NilSeq};
use crate::poly::{Var, N};
use crate::reduction::{alpha_shift, bracket};

const M1: Var = 1;

/// A level-0 sequence as an element of `G̃`.
pub fn embed(p: &NilSeq) -> Result<NilSeq> {
    if p.level() != 0 {
        return Err(Error::LevelMismatch {
            left: 0,
            right: p.level(),
        });
    }
    p.lift().rename_var(N, M1)
}

/// The constant sequence `ι(g)`.
pub fn iota(g: &IntMatrix) -> NilSeq {
    NilSeq::from_int(g, 1)
}

/// `⟨p|q⟩(n)` as an element of `G̃`.
pub fn bracket_at(p: &NilSeq, q: &NilSeq, n: i64) -> Result<NilSeq> {
    bracket(p, q, M1)?.fix_var(N, n)
}

/// Value `q(n)` of an element of `G̃`.
pub fn value_at(q: &NilSeq, n: i64) -> Result<IntMatrix> {
    q.eval_i64(&[0, n])
}

/// An element `(p, α^shift)` of `H̃`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemidirectElement {
    pub p: NilSeq,
    pub shift: i64,
}

impl SemidirectElement {
    pub fn new(p: NilSeq, shift: i64) -> Result<Self> {
        if p.level() != 1 {
            return Err(Error::LevelMismatch {
                left: 1,
                right: p.level(),
            });
        }
        Ok(Self { p, shift })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            p: NilSeq::identity(dim, 1),
            shift: 0,
        }
    }

    /// `(r, α^0)`.
    pub fn translation(r: &NilSeq) -> Result<Self> {
        Self::new(r.clone(), 0)
    }

    /// `(e, α^n)`.
    pub fn alpha(dim: usize, n: i64) -> Self {
        Self {
            p: NilSeq::identity(dim, 1),
            shift: n,
        }
    }

    /// `(p, αⁿ)(p', αⁿ') = (p αⁿ(p'), αⁿ⁺ⁿ')`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            p: self.p.checked_mul(&alpha_shift(&other.p, self.shift))?,
            shift: self.shift + other.shift,
        })
    }

    /// `(α⁻ⁿ(p⁻¹), α⁻ⁿ)`.
    pub fn inverse(&self) -> Self {
        Self {
            p: alpha_shift(&self.p.inverse(), -self.shift),
            shift: -self.shift,
        }
    }

    /// The permutation representation `ρ(p, αⁿ): x ↦ p αⁿ(x)`.
    pub fn act(&self, x: &NilSeq) -> Result<NilSeq> {
        self.p.checked_mul(&alpha_shift(x, self.shift))
    }

    /// `ρ(h)⁻¹ x`, the coordinate read by `(S^h y)_x`.
    pub fn pull(&self, x: &NilSeq) -> Result<NilSeq> {
        self.inverse().act(x)
    }
}

/// A recorded closure: the window contains `ρ(h)⁻¹ q` for every core `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureNote {
    pub element: String,
    pub shift: i64,
}

/// A finite subset `W ⊂ G̃`. The first [`IndexWindow::core_len`] elements
/// are the coordinates the checks compare; elements added by
/// [`IndexWindow::close_under`] follow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexWindow {
    dim: usize,
    elements: Vec<NilSeq>,
    index: HashMap<NilSeq, usize>,
    core_len: usize,
    closures: Vec<SemidirectElement>,
}

impl IndexWindow {
    pub fn new(dim: usize) -> Self {
        let mut w = Self {
            dim,
            elements: Vec::new(),
            index: HashMap::new(),
            core_len: 0,
            closures: Vec::new(),
        };
        w.insert_core(NilSeq::identity(dim, 1))
            .expect("identity fits");
        w
    }

    fn check(&self, q: &NilSeq) -> Result<()> {
        if q.dim() != self.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: q.dim(),
            });
        }
        if q.level() != 1 {
            return Err(Error::LevelMismatch {
                left: 1,
                right: q.level(),
            });
        }
        if !q.is_independent_of(N) {
            return Err(Error::InvalidParameter(format!(
                "window element {q} depends on n"
            )));
        }
        Ok(())
    }

    fn push(&mut self, q: NilSeq) -> usize {
        if let Some(&i) = self.index.get(&q) {
            return i;
        }
        let i = self.elements.len();
        self.index.insert(q.clone(), i);
        self.elements.push(q);
        i
    }

    /// Adds a core element. Fails once closures have been taken.
    pub fn insert_core(&mut self, q: NilSeq) -> Result<usize> {
        self.check(&q)?;
        if self.elements.len() != self.core_len {
            return Err(Error::InvalidParameter(
                "core elements must be added before closures".into(),
            ));
        }
        let i = self.push(q);
        self.core_len = self.elements.len();
        Ok(i)
    }

    /// Adds `ρ(h)⁻¹ q` for every core `q` and records `h`.
    pub fn close_under(&mut self, h: &SemidirectElement) -> Result<()> {
        if h.p.dim() != self.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: h.p.dim(),
            });
        }
        let pulled: Vec<NilSeq> = self.elements[..self.core_len]
            .iter()
            .map(|q| h.pull(q))
            .collect::<Result<_>>()?;
        for q in pulled {
            self.check(&q)?;
            self.push(q);
        }
        if !self.closures.contains(h) {
            self.closures.push(h.clone());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn core_len(&self) -> usize {
        self.core_len
    }

    pub fn elements(&self) -> &[NilSeq] {
        &self.elements
    }

    pub fn core(&self) -> &[NilSeq] {
        &self.elements[..self.core_len]
    }

    pub fn closures(&self) -> &[SemidirectElement] {
        &self.closures
    }

    pub fn position(&self, q: &NilSeq) -> Option<usize> {
        self.index.get(q).copied()
    }

    pub fn contains(&self, q: &NilSeq) -> bool {
        self.index.contains_key(q)
    }

    pub fn require(&self, q: &NilSeq) -> Result<usize> {
        self.position(q)
            .ok_or_else(|| Error::MissingCoordinate(q.to_string()))
    }

    /// Positions of `ρ(h)⁻¹ q` for each core `q`, or a closure error.
    pub fn pullback_positions(&self, h: &SemidirectElement) -> Result<Vec<usize>> {
        self.core()
            .iter()
            .map(|q| {
                let target = h.pull(q)?;
                self.position(&target).ok_or_else(|| {
                    Error::WindowClosure(format!(
                        "window lacks {target}, the pullback of {q} under ({}, α^{})",
                        h.p, h.shift
                    ))
                })
            })
            .collect()
    }

    pub fn closure_notes(&self) -> Vec<ClosureNote> {
        self.closures
            .iter()
            .map(|h| ClosureNote {
                element: h.p.to_string(),
                shift: h.shift,
            })
            .collect()
    }

    /// Rebuilds a window from its serialized parts, checking the closures.
    pub fn from_parts(
        dim: usize,
        elements: Vec<NilSeq>,
        core_len: usize,
        closures: Vec<SemidirectElement>,
    ) -> Result<Self> {
        if core_len == 0 || core_len > elements.len() {
            return Err(Error::InvalidParameter("bad core length".into()));
        }
        let mut w = Self {
            dim,
            elements: Vec::new(),
            index: HashMap::new(),
            core_len: 0,
            closures: Vec::new(),
        };
        for (i, q) in elements.into_iter().enumerate() {
            w.check(&q)?;
            if w.contains(&q) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate window element {q}"
                )));
            }
            w.push(q);
            if i < core_len {
                w.core_len = w.elements.len();
            }
        }
        for h in &closures {
            w.pullback_positions(h)?;
        }
        w.closures = closures;
        Ok(w)
    }
}

/// Finite window for a level-0 system `(p_1, .., p_k)`.
///
/// The core lists `e`, `p_k` and `p_k p_i⁻¹`; then for every `n` in
/// `n_range` the brackets `⟨p_k|e⟩(n)`, `⟨p_k|p_i⟩(n)` with their
/// inverses and the translates `ι(p_k(n))⁻¹ p_k`, `ι(p_k(n))⁻¹ p_k p_i⁻¹`;
/// then `extra`.
pub fn build_window(
    gsys: &GSystem,
    n_range: RangeInclusive<i64>,
    extra: &[NilSeq],
) -> Result<IndexWindow> {
    if n_range.is_empty() {
        return Err(Error::InvalidParameter("empty n range".into()));
    }
    if gsys.level() != 0 {
        return Err(Error::LevelMismatch {
            left: 0,
            right: gsys.level(),
        });
    }
    let mut w = IndexWindow::new(gsys.dim());
    let (last, rest) = gsys.entries().split_last().expect("systems are nonempty");
    let pk = embed(last)?;
    let quotients: Vec<NilSeq> = rest
        .iter()
        .map(|p| pk.checked_mul(&embed(p)?.inverse()))
        .collect::<Result<_>>()?;
    w.insert_core(pk.clone())?;
    for q in &quotients {
        w.insert_core(q.clone())?;
    }
    let identity = NilSeq::identity(gsys.dim(), 0);
    for n in n_range {
        let mut brackets = vec![bracket_at(last, &identity, n)?];
        for p in rest {
            brackets.push(bracket_at(last, p, n)?);
        }
        for b in &brackets {
            w.insert_core(b.clone())?;
        }
        for b in &brackets {
            w.insert_core(b.inverse())?;
        }
        let shift = iota(&last.eval_i64(&[n])?).inverse();
        w.insert_core(shift.checked_mul(&pk)?)?;
        for q in &quotients {
            w.insert_core(shift.checked_mul(q)?)?;
        }
    }
    for q in extra {
        w.insert_core(q.clone())?;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;

    fn z0(s: &str) -> NilSeq {
        NilSeq::first_row(&[MultiPoly::parse(s, 1).unwrap()]).unwrap()
    }

    fn z1(s: &str) -> NilSeq {
        NilSeq::first_row(&[MultiPoly::parse(s, 2).unwrap()]).unwrap()
    }

    #[test]
    fn single_linear_window() {
        let gsys = GSystem::new(vec![z0("n")]).unwrap();
        let w = build_window(&gsys, 0..=0, &[]).unwrap();
        for q in [NilSeq::identity(2, 1), z1("m1"), z1("-m1")] {
            assert!(w.contains(&q), "{q}");
        }
        assert_eq!(w.core_len(), w.len());
    }

    #[test]
    fn trivial_system_window() {
        let e = NilSeq::identity(2, 0);
        let gsys = GSystem::new(vec![e.clone(), e]).unwrap();
        let extra = z1("m1^2");
        let w = build_window(&gsys, 0..=2, std::slice::from_ref(&extra)).unwrap();
        assert_eq!(w.elements(), &[NilSeq::identity(2, 1), extra]);
    }

    #[test]
    fn constant_system_window() {
        let c = z0("3");
        let gsys = GSystem::new(vec![c.clone(), c]).unwrap();
        let w = build_window(&gsys, 0..=2, &[]).unwrap();
        let three = iota(&IntMatrix::first_row(&[3]));
        let expected = [NilSeq::identity(2, 1), three.clone(), three.inverse()];
        assert_eq!(w.elements(), &expected);
    }

    #[test]
    fn linear_pair_brackets() {
        let gsys = GSystem::new(vec![z0("n"), z0("2*n")]).unwrap();
        let w = build_window(&gsys, 0..=1, &[]).unwrap();
        assert!(w.contains(&z1("-m1")));
        assert!(w.contains(&z1("1 - m1")));
        assert!(w.contains(&z1("-2*m1")));
        assert!(w.contains(&z1("m1")));
    }

    #[test]
    fn empty_range_is_an_error() {
        let gsys = GSystem::new(vec![z0("n")]).unwrap();
        #[allow(clippy::reversed_empty_ranges)]
        let r = build_window(&gsys, 1..=0, &[]);
        assert!(r.is_err());
    }

    #[test]
    fn semidirect_product_laws() {
        let h1 = SemidirectElement::new(z1("m1^2 + 1"), 2).unwrap();
        let h2 = SemidirectElement::new(z1("3*m1"), -1).unwrap();
        let x = z1("m1 - 5");
        let prod = h1.mul(&h2).unwrap();
        assert_eq!(prod.act(&x).unwrap(), h1.act(&h2.act(&x).unwrap()).unwrap());
        let e = SemidirectElement::identity(2);
        assert_eq!(h1.mul(&h1.inverse()).unwrap(), e);
        assert_eq!(h1.pull(&h1.act(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn closure_adds_pullbacks() {
        let gsys = GSystem::new(vec![z0("n")]).unwrap();
        let mut w = build_window(&gsys, 0..=0, &[]).unwrap();
        let a = SemidirectElement::alpha(2, 1);
        assert!(matches!(
            w.pullback_positions(&a),
            Err(Error::WindowClosure(_))
        ));
        w.close_under(&a).unwrap();
        assert!(w.pullback_positions(&a).is_ok());
        assert!(w.contains(&z1("m1 + 1")));
        assert!(w.insert_core(z1("7")).is_err());
        assert_eq!(w.closures(), &[a]);
    }

    #[test]
    fn bracket_at_matches_direct_values() {
        let p = z0("n^2");
        let q = z0("n");
        for n in -2..=2 {
            let b = bracket_at(&p, &q, n).unwrap();
            for m in -2..=3 {
                let direct = q
                    .eval_i64(&[n + m])
                    .unwrap()
                    .mul(&p.eval_i64(&[n + m]).unwrap().inverse())
                    .mul(&p.eval_i64(&[n]).unwrap());
                assert_eq!(value_at(&b, m).unwrap(), direct);
            }
        }
    }
}
