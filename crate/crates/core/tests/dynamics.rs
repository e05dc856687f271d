mod common;

use std::collections::BTreeSet;

use common::{first_row, heisenberg};
use nilavg::dynamics::{
    convergence_report, l2_norm_sq, lambda_exact, DynSystem, Estimator, Observable,
};
use nilavg::exact::{ratio, Rational};
use nilavg::nilseq::IntMatrix;
use nilavg::{GSystem, NilSeq};
use proptest::prelude::*;

fn int_heis() -> impl Strategy<Value = IntMatrix> {
    (-20i64..=20, -20i64..=20, -20i64..=20).prop_map(|(a, b, c)| IntMatrix::heisenberg(a, b, c))
}

fn int_first_row(r: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(-40i64..=40, r).prop_map(|v| IntMatrix::first_row(&v))
}

fn table(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-4i64..=4, 1i64..=4), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| ratio(a, b)).collect())
}

fn bounded_table(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-3i64..=3, 3i64..=5), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| ratio(a, b)).collect())
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn heisenberg_action_is_a_bijective_homomorphism(g in int_heis(), h in int_heis(), q in 2u64..=5) {
        let sys = DynSystem::heisenberg(q).unwrap();
        let pg = sys.permutation(&g).unwrap();
        let ph = sys.permutation(&h).unwrap();
        let pgh = sys.permutation(&g.mul(&h)).unwrap();
        let image: BTreeSet<usize> = pg.iter().copied().collect();
        prop_assert_eq!(image.len(), pg.len());
        for x in 0..pg.len() {
            prop_assert_eq!(pgh[x], pg[ph[x]]);
        }
    }

    #[test]
    fn cyclic_action_is_a_bijective_homomorphism(g in int_first_row(2), h in int_first_row(2)) {
        let sys = DynSystem::cyclic_product(vec![4, 3]).unwrap();
        let pg = sys.permutation(&g).unwrap();
        let ph = sys.permutation(&h).unwrap();
        let pgh = sys.permutation(&g.mul(&h)).unwrap();
        let image: BTreeSet<usize> = pg.iter().copied().collect();
        prop_assert_eq!(image.len(), 12);
        for x in 0..12 {
            prop_assert_eq!(pgh[x], pg[ph[x]]);
        }
    }

    #[test]
    fn torus_action_is_a_homomorphism(g in int_first_row(2), h in int_first_row(2), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let sys = DynSystem::torus(vec![2f64.sqrt() - 1.0, 0.5f64.sqrt()]).unwrap();
        let gh = sys.act_point(&g.mul(&h), &[x, y]).unwrap();
        let seq = sys.act_point(&g, &sys.act_point(&h, &[x, y]).unwrap()).unwrap();
        for (a, b) in gh.iter().zip(&seq) {
            let d = (a - b).abs();
            prop_assert!(d.min(1.0 - d) < 1e-9);
        }
    }

    #[test]
    fn contraction_in_the_last_slot(
        p in prop::collection::vec(heisenberg(0, 2), 2),
        f1 in bounded_table(27),
        f in table(27),
        f2 in table(27),
        n in 1u64..=8,
    ) {
        let sys = DynSystem::heisenberg(3).unwrap();
        let gsys = GSystem::new(p).unwrap();
        let first = Observable::tabulated(f1);
        let a = lambda_exact(&sys, &gsys, &[first.clone(), Observable::tabulated(f.clone())], n).unwrap();
        let b = lambda_exact(&sys, &gsys, &[first, Observable::tabulated(f2.clone())], n).unwrap();
        prop_assert!(l2_norm_sq(&sub(&a, &b)) <= l2_norm_sq(&sub(&f, &f2)));
    }

    #[test]
    fn multilinear_in_each_slot(
        p in prop::collection::vec(first_row(1, 0, 2), 2),
        f in table(7),
        g in table(7),
        h in table(7),
        c in -3i64..=3,
        slot in 0usize..2,
        n in 1u64..=9,
    ) {
        let sys = DynSystem::cyclic_product(vec![7]).unwrap();
        let gsys = GSystem::new(p).unwrap();
        let c = ratio(c, 1);
        let combo: Vec<Rational> = f.iter().zip(&g).map(|(a, b)| &c * a + b).collect();
        let with = |t: Vec<Rational>| {
            let mut fs = vec![Observable::tabulated(h.clone()), Observable::tabulated(h.clone())];
            fs[slot] = Observable::tabulated(t);
            lambda_exact(&sys, &gsys, &fs, n).unwrap()
        };
        let lhs = with(combo);
        let (lf, lg) = (with(f.clone()), with(g.clone()));
        let rhs: Vec<Rational> = lf.iter().zip(&lg).map(|(a, b)| &c * a + b).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cyclic_window_deviation_envelope(q in 2u64..=7, shift in 0i64..7, states in prop::collection::btree_set(0usize..7, 1..=3)) {
        let sys = DynSystem::cyclic_product(vec![q]).unwrap();
        let p = NilSeq::parse(&format!("[[1, n + {shift}], [0, 1]]"), 0).unwrap();
        let gsys = GSystem::new(vec![p]).unwrap();
        let f = Observable::indicator(states.into_iter().filter(|&s| (s as u64) < q));
        let grid: Vec<u64> = (1..=12).collect();
        let r = convergence_report(&sys, &gsys, &[f], &grid, 2.5, 0.0, &Estimator::Exact).unwrap();
        for row in &r.rows {
            let b = ratio(2, row.n as i64);
            prop_assert!(row.window_sup_dev_sq.clone().unwrap() <= &b * &b);
        }
    }
}

#[test]
fn exact_reports_have_zero_stderr() {
    let sys = DynSystem::heisenberg(3).unwrap();
    let gsys = GSystem::parse(&["[[1, n, 0], [0, 1, n], [0, 0, 1]]"], 0).unwrap();
    let r = convergence_report(
        &sys,
        &gsys,
        &[Observable::indicator([0, 1, 2])],
        &[2, 4, 6],
        2.0,
        0.5,
        &Estimator::Exact,
    )
    .unwrap();
    assert!(r.rows.iter().all(|row| row.stderr == 0.0));
}

#[test]
fn sampled_and_exact_agree_on_finite_systems() {
    let sys = DynSystem::cyclic_product(vec![5]).unwrap();
    let gsys = GSystem::parse(&["[[1, n^2], [0, 1]]"], 0).unwrap();
    let fs = [Observable::indicator([0, 3])];
    let exact = convergence_report(&sys, &gsys, &fs, &[3, 6], 2.0, 0.1, &Estimator::Exact).unwrap();
    let est = Estimator::MonteCarlo {
        samples: 4000,
        seed: 17,
    };
    let sampled = convergence_report(&sys, &gsys, &fs, &[3, 6], 2.0, 0.1, &est).unwrap();
    for (a, b) in exact.rows.iter().zip(&sampled.rows) {
        assert!((a.l2_norm - b.l2_norm).abs() < 4.0 * b.stderr + 1e-9);
    }
}
