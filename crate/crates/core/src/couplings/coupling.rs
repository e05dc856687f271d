//! Empirical couplings `λ_N` on `X × K^W` and their invariance checks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::window::{iota, value_at, IndexWindow, SemidirectElement};
use crate::dynamics::{DynSystem, Observable};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::nilseq::{IntMatrix, NilSeq};

/// Support point of `λ_N`: a state and a coordinate block. The block
/// stores value ids, `block[w * k + i]` being slot `i` at window element
/// `w`.
pub type AtomKey = (usize, Vec<u32>);

/// `λ_N = (1/N) Σ_{n=1}^N ∫ δ_{(x, (F(T^{q(n)⁻¹} x))_{q ∈ W})} dμ(x)` with
/// `F = (f_1, .., f_{k-1}, last)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCoupling {
    pub(crate) system: DynSystem,
    pub(crate) observables: Vec<Observable>,
    pub(crate) base_weights: Vec<Rational>,
    pub(crate) n_terms: u64,
    pub(crate) window: IndexWindow,
    pub(crate) values: Vec<Rational>,
    pub(crate) atoms: BTreeMap<AtomKey, Rational>,
}

/// Key of a marginal: optional state plus the selected value ids.
type MarginalKey = (Option<usize>, Vec<u32>);

impl EmpiricalCoupling {
    /// The coupling over the uniform measure.
    pub fn new(
        sys: &DynSystem,
        fs: &[Observable],
        last: &Observable,
        window: &IndexWindow,
        n_terms: u64,
    ) -> Result<Self> {
        let count = sys
            .state_count()
            .ok_or_else(|| Error::Unsupported("couplings need a finite system".into()))?;
        let w = Rational::new(BigInt::one(), BigInt::from(count));
        Self::with_base_weights(sys, fs, last, window, n_terms, vec![w; count])
    }

    /// The same construction over arbitrary state weights; weights other
    /// than uniform give the non-invariant negative controls.
    pub fn with_base_weights(
        sys: &DynSystem,
        fs: &[Observable],
        last: &Observable,
        window: &IndexWindow,
        n_terms: u64,
        base_weights: Vec<Rational>,
    ) -> Result<Self> {
        let count = sys
            .state_count()
            .ok_or_else(|| Error::Unsupported("couplings need a finite system".into()))?;
        if n_terms == 0 {
            return Err(Error::InvalidParameter("N must be positive".into()));
        }
        if window.dim() != sys.group_dim() {
            return Err(Error::DimMismatch {
                left: sys.group_dim(),
                right: window.dim(),
            });
        }
        if base_weights.len() != count
            || base_weights.iter().any(|w| !w.is_positive())
            || base_weights.iter().sum::<Rational>() != Rational::one()
        {
            return Err(Error::InvalidParameter(
                "base weights must be positive and sum to one".into(),
            ));
        }
        let mut observables = fs.to_vec();
        observables.push(last.clone());
        for f in &observables {
            f.validate(sys)?;
            if f.is_character() {
                return Err(Error::Unsupported(
                    "couplings take rational observables".into(),
                ));
            }
            if !f.is_bounded_by_one() {
                return Err(Error::InvalidParameter(
                    "coupling observables must be bounded by one".into(),
                ));
            }
        }
        let tables: Vec<Vec<Rational>> = observables
            .iter()
            .map(|f| f.table(sys))
            .collect::<Result<_>>()?;

        let mut values: Vec<Rational> = Vec::new();
        let mut ids: BTreeMap<Rational, u32> = BTreeMap::new();
        let mut id_of = |v: &Rational| -> u32 {
            *ids.entry(v.clone()).or_insert_with(|| {
                values.push(v.clone());
                (values.len() - 1) as u32
            })
        };
        // ids[table][state]
        let table_ids: Vec<Vec<u32>> = tables
            .iter()
            .map(|t| t.iter().map(&mut id_of).collect())
            .collect();

        let k = observables.len();
        let scale = BigInt::from(n_terms);
        let mut atoms: BTreeMap<AtomKey, Rational> = BTreeMap::new();
        for n in 1..=n_terms as i64 {
            let perms: Vec<Vec<usize>> = window
                .elements()
                .iter()
                .map(|q| sys.permutation(&value_at(q, n)?.inverse()))
                .collect::<Result<_>>()?;
            for (x, w) in base_weights.iter().enumerate() {
                let mut block = Vec::with_capacity(perms.len() * k);
                for perm in &perms {
                    let moved = perm[x];
                    block.extend(table_ids.iter().map(|t| t[moved]));
                }
                *atoms.entry((x, block)).or_insert_with(Rational::zero) += w / &scale;
            }
        }
        Ok(Self {
            system: sys.clone(),
            observables,
            base_weights,
            n_terms,
            window: window.clone(),
            values,
            atoms,
        })
    }

    pub fn system(&self) -> &DynSystem {
        &self.system
    }

    /// `f_1, .., f_{k-1}, last`.
    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn slots(&self) -> usize {
        self.observables.len()
    }

    pub fn n_terms(&self) -> u64 {
        self.n_terms
    }

    pub fn window(&self) -> &IndexWindow {
        &self.window
    }

    pub fn base_weights(&self) -> &[Rational] {
        &self.base_weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&AtomKey, &Rational)> {
        self.atoms.iter()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn value(&self, id: u32) -> &Rational {
        &self.values[id as usize]
    }

    /// Slot `slot` of coordinate `w` in an atom block.
    pub fn coordinate(&self, block: &[u32], w: usize, slot: usize) -> &Rational {
        self.value(block[w * self.slots() + slot])
    }

    /// True when `N` is a multiple of the common period of the action in
    /// `n`, which makes `λ_N` exactly `α`-invariant.
    pub fn is_periodized(&self) -> bool {
        self.system
            .period()
            .is_some_and(|p| self.n_terms.is_multiple_of(p))
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.values().sum()
    }

    /// The `X`-marginal, one weight per state.
    pub fn x_marginal(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.base_weights.len()];
        for ((x, _), w) in &self.atoms {
            out[*x] += w;
        }
        out
    }

    /// Marginal on the state (mapped through `state_map`, or dropped)
    /// and the blocks of the window elements at `positions`.
    fn marginal(
        &self,
        state_map: Option<&[usize]>,
        keep_state: bool,
        positions: &[usize],
    ) -> BTreeMap<MarginalKey, Rational> {
        let k = self.slots();
        let mut out: BTreeMap<MarginalKey, Rational> = BTreeMap::new();
        for ((x, block), w) in &self.atoms {
            let state = keep_state.then(|| state_map.map_or(*x, |m| m[*x]));
            let sel: Vec<u32> = positions
                .iter()
                .flat_map(|&p| block[p * k..(p + 1) * k].iter().copied())
                .collect();
            *out.entry((state, sel)).or_insert_with(Rational::zero) += w;
        }
        out
    }

    fn core_positions(&self) -> Vec<usize> {
        (0..self.window.core_len()).collect()
    }

    /// `(T^g × S^{ι(g)})_* λ_N = λ_N` on the core coordinates.
    pub fn check_diag_invariance(&self, g: &IntMatrix) -> Result<bool> {
        let h = SemidirectElement::translation(&iota(g))?;
        let pulled = self.window.pullback_positions(&h)?;
        let perm = self.system.permutation(g)?;
        Ok(self.marginal(Some(&perm), true, &pulled)
            == self.marginal(None, true, &self.core_positions()))
    }

    /// `∥(id × S^α)_* λ_N − λ_N∥` on the core coordinates, as the total
    /// mass of the difference (at most `2/N`).
    pub fn check_alpha_invariance(&self) -> Result<Rational> {
        let h = SemidirectElement::alpha(self.window.dim(), 1);
        let pulled = self.window.pullback_positions(&h)?;
        let pushed = self.marginal(None, true, &pulled);
        let original = self.marginal(None, true, &self.core_positions());
        Ok(l1_distance(&pushed, &original))
    }

    /// `S^r_* ν_N = ν_N` for the `Y`-marginal `ν_N`, on the core
    /// coordinates. `r` must belong to the window.
    pub fn check_marginal_s_invariance(&self, r: &NilSeq) -> Result<bool> {
        self.window.require(r)?;
        let h = SemidirectElement::translation(r)?;
        let pulled = self.window.pullback_positions(&h)?;
        Ok(self.marginal(None, false, &pulled)
            == self.marginal(None, false, &self.core_positions()))
    }
}

/// Total mass of the difference of two finite measures.
pub fn l1_distance<K: Ord>(a: &BTreeMap<K, Rational>, b: &BTreeMap<K, Rational>) -> Rational {
    let mut total = Rational::zero();
    for (key, wa) in a {
        match b.get(key) {
            Some(wb) => total += (wa - wb).abs(),
            None => total += wa.abs(),
        }
    }
    for (key, wb) in b {
        if !a.contains_key(key) {
            total += wb.abs();
        }
    }
    total
}

/// `A_N = Λ_N(f_1, .., f_{k-1}, last)` as a tabulated observable, the
/// choice of last slot that turns the pairing into the rearranged
/// inner product.
pub fn cesaro_last(
    sys: &DynSystem,
    gsys: &crate::nilseq::GSystem,
    fs: &[Observable],
    last: &Observable,
    n_terms: u64,
) -> Result<Observable> {
    let mut all = fs.to_vec();
    all.push(last.clone());
    Ok(Observable::tabulated(crate::dynamics::lambda_exact(
        sys, gsys, &all, n_terms,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::window::build_window;
    use crate::exact::ratio;
    use crate::nilseq::GSystem;
    use crate::poly::MultiPoly;

    fn z0(s: &str) -> NilSeq {
        NilSeq::first_row(&[MultiPoly::parse(s, 1).unwrap()]).unwrap()
    }

    fn setup(n_terms: u64) -> EmpiricalCoupling {
        let sys = DynSystem::cyclic_product(vec![5]).unwrap();
        let gsys = GSystem::new(vec![z0("n")]).unwrap();
        let mut w = build_window(&gsys, 0..=0, &[]).unwrap();
        w.close_under(&SemidirectElement::alpha(2, 1)).unwrap();
        w.close_under(&SemidirectElement::translation(&iota(&IntMatrix::first_row(&[1]))).unwrap())
            .unwrap();
        EmpiricalCoupling::new(&sys, &[], &Observable::indicator([0]), &w, n_terms).unwrap()
    }

    #[test]
    fn single_term_has_one_atom_per_state() {
        let c = setup(1);
        assert_eq!(c.atom_count(), 5);
        assert!(c.atoms().all(|(_, w)| *w == ratio(1, 5)));
    }

    #[test]
    fn x_marginal_is_uniform() {
        let c = setup(5);
        assert!(c.x_marginal().iter().all(|w| *w == ratio(1, 5)));
        assert_eq!(c.total_mass(), Rational::one());
    }

    #[test]
    fn constant_sequences_do_not_depend_on_n() {
        let sys = DynSystem::cyclic_product(vec![5]).unwrap();
        let gsys = GSystem::new(vec![z0("2")]).unwrap();
        let w = build_window(&gsys, 0..=0, &[]).unwrap();
        let f = Observable::indicator([0, 1]);
        let one = EmpiricalCoupling::new(&sys, &[], &f, &w, 1).unwrap();
        for n in [2, 3, 7] {
            let c = EmpiricalCoupling::new(&sys, &[], &f, &w, n).unwrap();
            assert_eq!(c.atoms, one.atoms);
        }
    }

    #[test]
    fn invariances_on_five_points() {
        let c = setup(5);
        assert!(c
            .check_diag_invariance(&IntMatrix::first_row(&[1]))
            .unwrap());
        assert!(c.check_diag_invariance(&IntMatrix::identity(2)).unwrap());
        assert_eq!(c.check_alpha_invariance().unwrap(), Rational::zero());
        let e = NilSeq::identity(2, 1);
        assert!(c.check_marginal_s_invariance(&e).unwrap());
        let c7 = setup(7);
        let tv = c7.check_alpha_invariance().unwrap();
        assert!(tv > Rational::zero() && tv <= ratio(2, 7));
    }

    #[test]
    fn missing_closure_is_refused() {
        let c = setup(5);
        let g = IntMatrix::first_row(&[2]);
        assert!(matches!(
            c.check_diag_invariance(&g),
            Err(Error::WindowClosure(_))
        ));
    }

    #[test]
    fn skewed_weights_break_invariance() {
        let sys = DynSystem::cyclic_product(vec![5]).unwrap();
        let gsys = GSystem::new(vec![z0("n")]).unwrap();
        let mut w = build_window(&gsys, 0..=0, &[]).unwrap();
        let g = IntMatrix::first_row(&[1]);
        w.close_under(&SemidirectElement::translation(&iota(&g)).unwrap())
            .unwrap();
        let weights = vec![
            ratio(2, 6),
            ratio(1, 6),
            ratio(1, 6),
            ratio(1, 6),
            ratio(1, 6),
        ];
        let c = EmpiricalCoupling::with_base_weights(
            &sys,
            &[],
            &Observable::indicator([0]),
            &w,
            5,
            weights,
        )
        .unwrap();
        assert!(!c.check_diag_invariance(&g).unwrap());
    }

    #[test]
    fn rejects_unbounded_and_torus() {
        let sys = DynSystem::cyclic_product(vec![5]).unwrap();
        let gsys = GSystem::new(vec![z0("n")]).unwrap();
        let w = build_window(&gsys, 0..=0, &[]).unwrap();
        let big = Observable::constant(ratio(3, 2), 5);
        assert!(EmpiricalCoupling::new(&sys, &[], &big, &w, 3).is_err());
        let torus = DynSystem::torus(vec![0.3]).unwrap();
        let f = Observable::character(vec![1]);
        assert!(matches!(
            EmpiricalCoupling::new(&torus, &[], &f, &w, 3),
            Err(Error::Unsupported(_))
        ));
    }
}
