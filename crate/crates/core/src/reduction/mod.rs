//! The sequence calculus: index shift, differences, brackets and the
//! reduction of a system, plus the complexity search in [`search`].
//!
//! For sequences `p, q` at level `r` and a fresh variable `m = m_{r+1}`:
//!
//! ```text
//! D_m p(n)    = p(n + m)^{-1} p(n)
//! <p|q>_m(n)  = q(n + m) D_m p(n)  =  (q p^{-1})(n + m) p(n)
//! ```
//!
//! Read as a function of `n` with values in sequences of `m`, the bracket
//! is the combined map `<p|q>`, a sequence at level `r + 1`. The
//! reduction of `(p_1, .., p_k)` is
//!
//! ```text
//! (ι p_1, .., ι p_{k-1}, <p_k|e>, <p_k|p_1>, .., <p_k|p_{k-1}>)
//! ```
//!
//! where `ι` reads an entry one level up without using the new variable.

use crate::error::{Error, Result};
use crate::nilseq::{GSystem, NilSeq};
use crate::poly::{var_name, Var, N};

pub mod search;

pub use search::{complexity, ComplexityOutcome, ReductionTrace, SearchOptions, TraceStep};

/// The shift automorphism `α^power`, `α(p)(v) = p(v - 1)`.
///
/// The shifted variable is the outermost index of the group the element
/// lives in: `n` at level 0 and `m_r` at level `r >= 1`.
pub fn alpha_shift(p: &NilSeq, power: i64) -> NilSeq {
    let v = alpha_var(p.level());
    p.shift_by_const(v, -power)
        .expect("the shifted variable is always present")
}

/// Variable moved by [`alpha_shift`] at the given level.
pub fn alpha_var(level: usize) -> Var {
    if level == 0 {
        N
    } else {
        level
    }
}

/// Shifts the sequence index `n` by `offset`, `p(n) ↦ p(n + offset)`.
pub fn index_shift(p: &NilSeq, offset: i64) -> NilSeq {
    p.shift_by_const(N, offset)
        .expect("the sequence variable is always present")
}

fn check_fresh(p: &NilSeq, newvar: Var) -> Result<()> {
    if newvar < p.nvars() {
        return Err(Error::VariableInUse(var_name(newvar)));
    }
    Ok(())
}

/// `D_m p(n) = p(n + m)^{-1} p(n)` with `m = newvar`, which must be fresh.
pub fn difference(p: &NilSeq, newvar: Var) -> Result<NilSeq> {
    check_fresh(p, newvar)?;
    let shifted = p.shift_by_var(N, newvar)?;
    let base = p.lift_to(newvar)?;
    shifted.inverse().checked_mul(&base)
}

/// `<p|q>_m(n) = q(n + m) D_m p(n)` with `m = newvar`.
pub fn bracket(p: &NilSeq, q: &NilSeq, newvar: Var) -> Result<NilSeq> {
    if p.dim() != q.dim() {
        return Err(Error::DimMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    if p.level() != q.level() {
        return Err(Error::LevelMismatch {
            left: p.level(),
            right: q.level(),
        });
    }
    let dp = difference(p, newvar)?;
    q.shift_by_var(N, newvar)?.checked_mul(&dp)
}

/// The reduction `p*` of a system, one level up.
pub fn reduce(system: &GSystem) -> GSystem {
    let newvar = system.level() + 1;
    let entries = system.entries();
    let (last, rest) = entries.split_last().expect("systems are nonempty");
    let identity = NilSeq::identity(system.dim(), system.level());
    let mut out: Vec<NilSeq> = rest.iter().map(NilSeq::lift).collect();
    out.push(bracket(last, &identity, newvar).expect("entries share dimension and level"));
    for p in rest {
        out.push(bracket(last, p, newvar).expect("entries share dimension and level"));
    }
    GSystem::new(out).expect("reduction keeps dimension and level uniform")
}

/// Permutes entries: entry `i` of the result is entry `perm[i]` of the
/// input. With this convention `perm = [2, 0, 1]` maps `(a, b, c)` to
/// `(c, a, b)`.
pub fn reorder(system: &GSystem, perm: &[usize]) -> Result<GSystem> {
    let k = system.len();
    let mut seen = vec![false; k];
    if perm.len() != k {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &i in perm {
        if i >= k || seen[i] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[i] = true;
    }
    GSystem::new(perm.iter().map(|&i| system.entries()[i].clone()).collect())
}

/// Removes repeated entries, keeping first occurrences in order. Returns
/// the reduced system and the removed indices.
pub fn dedupe(system: &GSystem) -> (GSystem, Vec<usize>) {
    let mut kept: Vec<NilSeq> = Vec::with_capacity(system.len());
    let mut removed = Vec::new();
    for (i, e) in system.entries().iter().enumerate() {
        if kept.contains(e) {
            removed.push(i);
        } else {
            kept.push(e.clone());
        }
    }
    (
        GSystem::new(kept).expect("the first entry is always kept"),
        removed,
    )
}

/// True iff no entry depends on the sequence variable.
pub fn is_trivial(system: &GSystem) -> bool {
    system.entries().iter().all(|e| e.is_independent_of(N))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilseq::IntMatrix;
    use crate::poly::MultiPoly;

    fn z(s: &str, level: usize) -> NilSeq {
        NilSeq::first_row(&[MultiPoly::parse(s, level + 1).unwrap()]).unwrap()
    }

    fn heis(a: &str, b: &str, c: &str, level: usize) -> NilSeq {
        let p = |s: &str| MultiPoly::parse(s, level + 1).unwrap();
        NilSeq::heisenberg(p(a), p(b), p(c)).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let p = z("n", 0);
        assert_eq!(alpha_shift(&p, 1), z("n - 1", 0));
        assert_eq!(alpha_shift(&p, 0), p);
        assert_eq!(alpha_shift(&alpha_shift(&p, 1), -1), p);
        // Level-1 elements shift their inner index.
        let q = z("n + m1^2", 1);
        assert_eq!(alpha_shift(&q, 2), z("n + m1^2 - 4*m1 + 4", 1));
    }

    #[test]
    fn difference_of_linear_sequence() {
        let d = difference(&z("n", 0), 1).unwrap();
        assert_eq!(d, z("-m1", 1));
        for (n, m) in [(0, 1), (3, -2), (5, 7)] {
            let lhs = d.eval_i64(&[n, m]).unwrap();
            let p = z("n", 0);
            let direct = p
                .eval_i64(&[n + m])
                .unwrap()
                .inverse()
                .mul(&p.eval_i64(&[n]).unwrap());
            assert_eq!(lhs, direct);
        }
    }

    #[test]
    fn difference_of_constant_is_identity() {
        let c = heis("2", "-1", "5", 0);
        assert!(difference(&c, 1).unwrap().is_identity());
    }

    #[test]
    fn difference_of_heisenberg_sequence() {
        let p = heis("n", "n", "0", 0);
        let d = difference(&p, 1).unwrap();
        assert_eq!(d, heis("-m1", "-m1", "m1*(n + m1)", 1));
        for (n, m) in [(0, 1), (2, 3), (1, 1)] {
            let direct = p
                .eval_i64(&[n + m])
                .unwrap()
                .inverse()
                .mul(&p.eval_i64(&[n]).unwrap());
            assert_eq!(d.eval_i64(&[n, m]).unwrap(), direct);
        }
        assert_eq!(
            d.eval_i64(&[1, 1]).unwrap(),
            IntMatrix::heisenberg(-1, -1, 2)
        );
    }

    #[test]
    fn difference_needs_fresh_variable() {
        let p = z("n + m1", 1);
        assert_eq!(
            difference(&p, 1),
            Err(Error::VariableInUse("m1".to_string()))
        );
    }

    #[test]
    fn bracket_examples() {
        let p = z("2*n", 0);
        let e = NilSeq::identity(2, 0);
        assert_eq!(bracket(&p, &e, 1).unwrap(), difference(&p, 1).unwrap());
        assert_eq!(bracket(&p, &p, 1).unwrap(), p.lift());
        let b = bracket(&p, &z("n", 0), 1).unwrap();
        assert_eq!(b, z("n - m1", 1));
    }

    #[test]
    fn reduce_examples() {
        let one = GSystem::new(vec![z("n", 0)]).unwrap();
        assert_eq!(reduce(&one).entries(), &[z("-m1", 1)]);

        let two = GSystem::new(vec![z("n", 0), z("2*n", 0)]).unwrap();
        assert_eq!(
            reduce(&two).entries(),
            &[z("n", 1), z("-2*m1", 1), z("n - m1", 1)]
        );

        let constant = GSystem::new(vec![heis("1", "2", "3", 0)]).unwrap();
        let r = reduce(&constant);
        assert!(is_trivial(&r));
        assert_eq!(r.level(), 1);
    }

    #[test]
    fn reorder_examples() {
        let s = GSystem::new(vec![z("n", 0), z("2*n", 0), z("3", 0)]).unwrap();
        assert_eq!(reorder(&s, &[0, 1, 2]).unwrap(), s);
        let swapped = reorder(&s, &[1, 0, 2]).unwrap();
        assert_eq!(reorder(&swapped, &[1, 0, 2]).unwrap(), s);
        assert_eq!(
            reorder(&s, &[2, 0, 1]).unwrap().entries(),
            &[z("3", 0), z("n", 0), z("2*n", 0)]
        );
        assert!(reorder(&s, &[0, 0, 1]).is_err());
        assert!(reorder(&s, &[0, 1]).is_err());
        assert!(reorder(&s, &[0, 1, 3]).is_err());
    }

    #[test]
    fn dedupe_examples() {
        let p = z("n", 1);
        let q = z("-2*m1", 1);
        let (d, removed) = dedupe(&GSystem::new(vec![p.clone(), p.clone()]).unwrap());
        assert_eq!(d.entries(), std::slice::from_ref(&p));
        assert_eq!(removed, vec![1]);
        let pq = GSystem::new(vec![p.clone(), q.clone()]).unwrap();
        assert_eq!(dedupe(&pq).0, pq);
        let (d, removed) =
            dedupe(&GSystem::new(vec![p.clone(), q.clone(), p.clone(), q.clone()]).unwrap());
        assert_eq!(d, pq);
        assert_eq!(removed, vec![2, 3]);
    }

    #[test]
    fn triviality() {
        assert!(is_trivial(
            &GSystem::new(vec![z("3", 0), NilSeq::identity(2, 0)]).unwrap()
        ));
        assert!(!is_trivial(&GSystem::new(vec![z("n", 0)]).unwrap()));
        assert!(is_trivial(
            &GSystem::new(vec![z("-m1", 2), z("-2*m1 - m2", 2)]).unwrap()
        ));
    }
}
