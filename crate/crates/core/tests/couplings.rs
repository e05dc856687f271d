mod common;

use common::{first_row, heisenberg, nilseq};
use nilavg::couplings::{
    basic_function, build_window, cesaro_last, embed, pairing, rearrange_indices,
    EmpiricalCoupling, SemidirectElement,
};
use nilavg::dynamics::{DynSystem, Observable};
use nilavg::exact::{ratio, Rational};
use nilavg::{GSystem, NilSeq};
use num_traits::{One, Signed};
use proptest::prelude::*;

fn bounded_table(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-3i64..=3, 3i64..=5), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| ratio(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rearrangement_indices_agree(r in heisenberg(0, 2), p in heisenberg(0, 2), n in -6i64..=6) {
        let (lhs, rhs) = rearrange_indices(&r, &p, n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rearrangement_indices_agree_over_z2(r in first_row(2, 0, 3), p in first_row(2, 0, 3), n in -6i64..=6) {
        let (lhs, rhs) = rearrange_indices(&r, &p, n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rho_is_a_homomorphism(a in nilseq(3, 1, 2), b in nilseq(3, 1, 2), x in nilseq(3, 1, 2),
                             s in -3i64..=3, t in -3i64..=3) {
        // Elements of G̃ do not involve n.
        let strip = |q: NilSeq| q.fix_var(0, 0).unwrap();
        let h1 = SemidirectElement::new(strip(a), s).unwrap();
        let h2 = SemidirectElement::new(strip(b), t).unwrap();
        let x = strip(x);
        let prod = h1.mul(&h2).unwrap();
        prop_assert_eq!(prod.act(&x).unwrap(), h1.act(&h2.act(&x).unwrap()).unwrap());
        prop_assert_eq!(h1.mul(&h1.inverse()).unwrap(), SemidirectElement::identity(3));
    }

    #[test]
    fn heisenberg_couplings(
        p in prop::collection::vec(heisenberg(0, 1), 2),
        f1 in bounded_table(27),
        f2 in bounded_table(27),
        last in bounded_table(27),
        n in 1u64..=7,
    ) {
        let sys = DynSystem::heisenberg(3).unwrap();
        let gsys = GSystem::new(p).unwrap();
        let mut w = build_window(&gsys, 0..=0, &[]).unwrap();
        w.close_under(&SemidirectElement::alpha(3, 1)).unwrap();
        let fs = [Observable::tabulated(f1)];
        let a_n = cesaro_last(&sys, &gsys, &fs, &Observable::tabulated(last), n).unwrap();
        let c = EmpiricalCoupling::new(&sys, &fs, &a_n, &w, n).unwrap();

        // X-marginal is μ and the mass is one.
        prop_assert!(c.x_marginal().iter().all(|m| *m == ratio(1, 27)));
        // α-shift distance obeys the boundary bound.
        prop_assert!(c.check_alpha_invariance().unwrap() <= ratio(2, n as i64));
        // Both sides of the pairing agree.
        let pr = pairing(&c, &Observable::tabulated(f2), &gsys).unwrap();
        prop_assert_eq!(pr.coupling_side, pr.dynamics_side);
        // Basic functions are bounded by the product of sup norms.
        let bound: Rational = c.observables().iter().map(Observable::sup_norm).product();
        prop_assert!(basic_function(&c, &gsys).unwrap().iter().all(|g| g.abs() <= bound));
    }

    #[test]
    fn diagonal_invariance_on_cyclic(shift in 1i64..5, n in 1u64..=12, states in prop::collection::btree_set(0usize..5, 1..=3)) {
        let sys = DynSystem::cyclic_product(vec![5]).unwrap();
        let p = NilSeq::parse("[[1, n^2 + n], [0, 1]]", 0).unwrap();
        let gsys = GSystem::new(vec![p]).unwrap();
        let mut w = build_window(&gsys, 0..=1, &[]).unwrap();
        let g = nilavg::nilseq::IntMatrix::first_row(&[shift]);
        w.close_under(&SemidirectElement::translation(&nilavg::couplings::iota(&g)).unwrap()).unwrap();
        let c = EmpiricalCoupling::new(&sys, &[], &Observable::indicator(states), &w, n).unwrap();
        prop_assert!(c.check_diag_invariance(&g).unwrap());
        prop_assert_eq!(c.total_mass(), Rational::one());
    }
}

#[test]
fn embed_reads_the_index_as_the_inner_variable() {
    let p = NilSeq::parse("[[1, n^2 - 1], [0, 1]]", 0).unwrap();
    let q = embed(&p).unwrap();
    assert_eq!(q, NilSeq::parse("[[1, m1^2 - 1], [0, 1]]", 1).unwrap());
}
