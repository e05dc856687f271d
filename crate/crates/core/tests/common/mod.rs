#![allow(dead_code)]

use nilavg::{MultiPoly, NilSeq};
use proptest::prelude::*;

/// Polynomial in `nvars` variables, total degree at most `max_deg`.
pub fn poly(nvars: usize, max_deg: u32, max_terms: usize) -> impl Strategy<Value = MultiPoly> {
    let term =
        (-6i64..=6, prop::collection::vec(0u32..=max_deg, nvars)).prop_map(move |(c, mut e)| {
            // Scale the exponent vector down to the degree bound.
            while e.iter().sum::<u32>() > max_deg {
                if let Some(x) = e.iter_mut().filter(|x| **x > 0).max() {
                    *x -= 1;
                }
            }
            (c, e)
        });
    prop::collection::vec(term, 0..=max_terms)
        .prop_map(move |terms| MultiPoly::from_terms(nvars, terms).unwrap())
}

/// Unitriangular `dim × dim` polynomial matrix at `level`.
pub fn nilseq(dim: usize, level: usize, max_deg: u32) -> impl Strategy<Value = NilSeq> {
    let count = dim * (dim - 1) / 2;
    prop::collection::vec(poly(level + 1, max_deg, 3), count).prop_map(move |entries| {
        let mut it = entries.into_iter();
        let rows: Vec<Vec<MultiPoly>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| match i.cmp(&j) {
                        std::cmp::Ordering::Less => it.next().unwrap(),
                        std::cmp::Ordering::Equal => MultiPoly::one(level + 1),
                        std::cmp::Ordering::Greater => MultiPoly::zero(level + 1),
                    })
                    .collect()
            })
            .collect();
        NilSeq::from_rows(rows).unwrap()
    })
}

/// First-row element of `ℤ^r`.
pub fn first_row(r: usize, level: usize, max_deg: u32) -> impl Strategy<Value = NilSeq> {
    prop::collection::vec(poly(level + 1, max_deg, 3), r)
        .prop_map(|v| NilSeq::first_row(&v).unwrap())
}

/// Heisenberg element `(a, b, c)`.
pub fn heisenberg(level: usize, max_deg: u32) -> impl Strategy<Value = NilSeq> {
    (
        poly(level + 1, max_deg, 3),
        poly(level + 1, max_deg, 3),
        poly(level + 1, max_deg, 3),
    )
        .prop_map(|(a, b, c)| NilSeq::heisenberg(a, b, c).unwrap())
}

/// A level-0 element over one of ℤ, ℤ² or the Heisenberg group.
pub fn any_group_element(max_deg: u32) -> impl Strategy<Value = NilSeq> {
    prop_oneof![
        first_row(1, 0, max_deg),
        first_row(2, 0, max_deg),
        heisenberg(0, max_deg),
    ]
}
