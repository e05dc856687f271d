mod common;

use common::{any_group_element, first_row, heisenberg, nilseq};
use nilavg::poly::N;
use nilavg::reduction::{bracket, complexity, dedupe, difference, reduce, reorder, SearchOptions};
use nilavg::{GSystem, NilSeq};
use proptest::prelude::*;

fn max_degree(s: &GSystem) -> u32 {
    s.entries()
        .iter()
        .map(|e| e.degree_in(N))
        .max()
        .unwrap_or(0)
}

fn max_filtered(s: &GSystem) -> num_rational::Ratio<u32> {
    s.entries()
        .iter()
        .map(|e| e.filtered_degree_in(N))
        .max()
        .unwrap()
}

fn system(entries: Vec<NilSeq>) -> GSystem {
    GSystem::new(entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn bracket_identities(p in any_group_element(3)) {
        let e = NilSeq::identity(p.dim(), 0);
        prop_assert_eq!(bracket(&p, &e, 1).unwrap(), difference(&p, 1).unwrap());
        prop_assert_eq!(bracket(&p, &p, 1).unwrap(), p.lift());
    }

    #[test]
    fn bracket_matches_values(p in heisenberg(0, 2), q in heisenberg(0, 2), n in -3i64..=3, m in -3i64..=3) {
        let b = bracket(&p, &q, 1).unwrap().eval_i64(&[n, m]).unwrap();
        let at = |s: &NilSeq, t: i64| s.eval_i64(&[t]).unwrap();
        let direct = at(&q, n + m).mul(&at(&p, n + m).inverse()).mul(&at(&p, n));
        prop_assert_eq!(b, direct);
    }

    #[test]
    fn reduction_keeps_filtered_degree(entries in prop::collection::vec(nilseq(3, 0, 2), 1..=3)) {
        let s = system(entries);
        prop_assert!(max_filtered(&reduce(&s)) <= max_filtered(&s));
    }

    #[test]
    fn abelian_reduction_keeps_degree(entries in prop::collection::vec(first_row(2, 0, 3), 1..=3)) {
        let s = system(entries);
        prop_assert!(max_degree(&reduce(&s)) <= max_degree(&s));
    }

    #[test]
    fn linear_heisenberg_reduction_keeps_degree(entries in prop::collection::vec(heisenberg(0, 1), 1..=3)) {
        let s = system(entries);
        let r = reduce(&s);
        prop_assert!(max_degree(&r) <= max_degree(&s).max(1));
    }

    #[test]
    fn reorder_and_dedupe(entries in prop::collection::vec(first_row(1, 0, 2), 1..=4), seed in any::<u64>()) {
        let s = system(entries);
        let k = s.len();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut x = seed;
        for i in (1..k).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let shuffled = reorder(&s, &perm).unwrap();
        let mut inverse = vec![0; k];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        prop_assert_eq!(reorder(&shuffled, &inverse).unwrap(), s.clone());
        let (d, _) = dedupe(&s);
        prop_assert_eq!(dedupe(&d).0, d.clone());
        let mut doubled = s.entries().to_vec();
        doubled.extend(s.entries().iter().cloned());
        prop_assert_eq!(dedupe(&system(doubled)).0, d);
    }
}

#[test]
fn raw_degree_can_grow_outside_the_linear_heisenberg_case() {
    // Heis(n², n², 0): the corner of the difference picks up degree 3.
    let p = |s: &str| nilavg::MultiPoly::parse(s, 1).unwrap();
    let s = system(vec![NilSeq::heisenberg(p("n^2"), p("n^2"), p("0")).unwrap()]);
    let r = reduce(&s);
    assert_eq!(max_degree(&s), 2);
    assert_eq!(max_degree(&r), 3);
    assert!(max_filtered(&r) <= max_filtered(&s));
}

fn bundled() -> Vec<GSystem> {
    let parse = |v: &[&str]| GSystem::parse(v, 0).unwrap();
    vec![
        parse(&["[[1, 3], [0, 1]]"]),
        parse(&["[[1, n], [0, 1]]"]),
        parse(&["[[1, n], [0, 1]]", "[[1, 2*n], [0, 1]]"]),
        parse(&["[[1, n^2], [0, 1]]"]),
        parse(&[
            "[[1, n, 0], [0, 1, 0], [0, 0, 1]]",
            "[[1, 0, 0], [0, 1, n], [0, 0, 1]]",
        ]),
        parse(&["[[1, n, 0], [0, 1, n], [0, 0, 1]]"]),
    ]
}

#[test]
fn complexity_ignores_order_and_duplicates() {
    let opts = SearchOptions::default();
    for s in bundled() {
        let base = complexity(&s, 6, &opts).value();
        assert!(base.is_some(), "{s}");
        let k = s.len();
        let rev: Vec<usize> = (0..k).rev().collect();
        assert_eq!(
            complexity(&reorder(&s, &rev).unwrap(), 6, &opts).value(),
            base,
            "{s}"
        );
        let mut dup = s.entries().to_vec();
        dup.push(s.entries()[0].clone());
        assert_eq!(complexity(&system(dup), 6, &opts).value(), base, "{s}");
    }
}

#[test]
fn witnesses_replay_to_trivial_systems() {
    for s in bundled() {
        if let nilavg::reduction::ComplexityOutcome::Found { value, trace } =
            complexity(&s, 6, &SearchOptions::default())
        {
            let end = trace.replay().unwrap();
            assert!(nilavg::reduction::is_trivial(&end));
            assert_eq!(trace.reductions(), value);
        }
    }
}
